from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-9
NEGATIVE_TOL = 1e-12


class FrequencyContractError(RuntimeError):
    """A frequency update would leave the probability simplex."""


class BorderMode(str, enum.Enum):
    UNBORDERED = "unbordered"
    BORDERED = "bordered"


@dataclass(frozen=True)
class UpdateOutcome:
    changed: bool
    effective_winner_increment: float
    negative_clamp: bool = False


@dataclass
class Individual:
    values: np.ndarray
    fitness: Optional[float] = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.int64)


@dataclass
class Diagnostics:
    negative_clamps: int = 0
    renormalizations: int = 0


def borders(n: int, r: int) -> Tuple[float, float]:
    """Lower and upper frequency borders ``1/((r-1)n)`` and ``1 - 1/n``."""
    return 1.0 / ((r - 1) * n), 1.0 - 1.0 / n


def _is_integral(K: float) -> bool:
    return float(K).is_integer()


class FrequencyMatrix:
    """The n x r row-stochastic model of the r-cGA.

    In unbordered mode with ``r | K`` the rows are held as int64 numerators
    over ``K`` so every frequency stays an exact multiple of ``1/K``. Every
    other configuration uses float64 rows.
    """

    def __init__(
        self,
        n: int,
        r: int,
        K: float,
        mode: Union[BorderMode, str] = BorderMode.UNBORDERED,
        *,
        exact: Optional[bool] = None,
    ) -> None:
        mode = BorderMode(mode)
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if r < 2:
            raise ValueError(f"r must be >= 2, got {r}")
        if not K > 0:
            raise ValueError(f"K must be > 0, got {K}")
        divisible = _is_integral(K) and int(K) % r == 0
        if exact is None:
            exact = mode is BorderMode.UNBORDERED and divisible
        if exact and (mode is not BorderMode.UNBORDERED or not divisible):
            raise ValueError("exact numerators need unbordered mode with r dividing K")
        if mode is BorderMode.BORDERED:
            if n < 2:
                raise ValueError("bordered mode needs n >= 2")
            lo, hi = borders(n, r)
            assert lo <= 1.0 / r <= hi, "borders exclude the uniform row"

        self.n = n
        self.r = r
        self.K = float(K)
        self.mode = mode
        self.exact = exact
        self.diagnostics = Diagnostics()
        if exact:
            self._num = np.full((n, r), int(K) // r, dtype=np.int64)
        else:
            self._rows = np.full((n, r), 1.0 / r, dtype=np.float64)

    @classmethod
    def from_rows(
        cls,
        rows: Union[Sequence[Sequence[float]], np.ndarray],
        K: float,
        mode: Union[BorderMode, str] = BorderMode.UNBORDERED,
    ) -> "FrequencyMatrix":
        """Warm-start a matrix from explicit rows.

        Exact numerators are used when every entry is a multiple of 1/K in an
        unbordered, r-divisible configuration; otherwise rows are stored as floats.
        """
        arr = np.array(rows, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("rows must be a 2-d array")
        n, r = arr.shape
        m = cls(n, r, K, mode, exact=False)
        if np.any(arr < -NEGATIVE_TOL) or np.any(np.abs(arr.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            raise ValueError("every row must be a probability vector")
        arr = np.clip(arr, 0.0, 1.0)
        if m.mode is BorderMode.BORDERED:
            lo, hi = m.borders
            if np.any(arr < lo - NEGATIVE_TOL) or np.any(arr > hi + NEGATIVE_TOL):
                raise ValueError(f"bordered rows must lie in [{lo}, {hi}]")
            arr = np.clip(arr, lo, hi)
        scaled = arr * m.K
        if (
            m.mode is BorderMode.UNBORDERED
            and _is_integral(K)
            and int(K) % r == 0
            and np.allclose(scaled, np.rint(scaled), atol=1e-9)
        ):
            m.exact = True
            m._num = np.rint(scaled).astype(np.int64)
            del m._rows
        else:
            m._rows = arr
        return m

    @property
    def borders(self) -> Tuple[float, float]:
        return borders(self.n, self.r)

    @property
    def lower_border(self) -> float:
        return self.borders[0]

    @property
    def upper_border(self) -> float:
        return self.borders[1]

    @property
    def numerators(self) -> np.ndarray:
        if not self.exact:
            raise AttributeError("matrix does not hold exact numerators")
        return self._num

    @property
    def rows(self) -> np.ndarray:
        """Frequencies as a float64 (n, r) array (a copy in exact mode)."""
        if self.exact:
            return self._num / self.K
        return self._rows

    def row(self, i: int) -> np.ndarray:
        return self.rows[i].copy()

    def column(self, j: int) -> np.ndarray:
        if self.exact:
            return self._num[:, j] / self.K
        return self._rows[:, j].copy()

    def copy(self) -> "FrequencyMatrix":
        other = FrequencyMatrix.__new__(FrequencyMatrix)
        other.n, other.r, other.K = self.n, self.r, self.K
        other.mode, other.exact = self.mode, self.exact
        other.diagnostics = Diagnostics()
        if self.exact:
            other._num = self._num.copy()
        else:
            other._rows = self._rows.copy()
        return other

    def check_invariants(self) -> None:
        """Raise FrequencyContractError when any matrix invariant is broken."""
        if self.exact:
            if np.any(self._num.sum(axis=1) != int(self.K)):
                raise FrequencyContractError("row numerators do not sum to K")
            if np.any(self._num < 0) or np.any(self._num > int(self.K)):
                raise FrequencyContractError("numerator outside [0, K]")
            return
        rows = self._rows
        if np.any(np.abs(rows.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            raise FrequencyContractError("row sum drifted beyond tolerance")
        lo, hi = (self.borders if self.mode is BorderMode.BORDERED else (0.0, 1.0))
        if np.any(rows < lo - NEGATIVE_TOL) or np.any(rows > hi + NEGATIVE_TOL):
            raise FrequencyContractError(f"frequency outside [{lo}, {hi}]")

    def update(self, winner: np.ndarray, loser: np.ndarray) -> np.ndarray:
        """Apply one r-cGA update at every position.

        Returns the effective increment applied to each position's winner frequency.
        """
        winner = np.asarray(winner, dtype=np.int64)
        loser = np.asarray(loser, dtype=np.int64)
        moved = np.flatnonzero(winner != loser)
        increments = np.zeros(self.n, dtype=np.float64)
        if moved.size == 0:
            return increments
        w, l = winner[moved], loser[moved]

        if self.exact:
            if np.any(self._num[moved, l] < 1):
                raise FrequencyContractError("loser value had zero frequency")
            self._num[moved, w] += 1
            self._num[moved, l] -= 1
            increments[moved] = 1.0 / self.K
            return increments

        if self.mode is BorderMode.UNBORDERED:
            step = 1.0 / self.K
            rows = self._rows
            short = rows[moved, l] < step
            fast, slow = moved[~short], moved[short]
            rows[fast, winner[fast]] += step
            rows[fast, loser[fast]] -= step
            increments[fast] = step
            for i in slow:
                row, outcome = update_row_unbordered(rows[i], int(winner[i]), int(loser[i]), self.K)
                rows[i] = row
                increments[i] = outcome.effective_winner_increment
                if outcome.negative_clamp:
                    self.diagnostics.negative_clamps += 1
            self._renormalize(moved)
            return increments

        for i, wi, li in zip(moved, w, l):
            row, outcome = update_row_bordered(self._rows[i], int(wi), int(li), self.n, self.K)
            self._rows[i] = row
            increments[i] = outcome.effective_winner_increment
        self._renormalize(moved)
        return increments

    def _renormalize(self, idx: np.ndarray) -> None:
        sums = self._rows[idx].sum(axis=1)
        drifted = idx[np.abs(sums - 1.0) > ROW_SUM_TOL]
        if drifted.size:
            self._rows[drifted] /= self._rows[drifted].sum(axis=1, keepdims=True)
            self.diagnostics.renormalizations += int(drifted.size)
            logger.debug(f"renormalized {drifted.size} rows")


def init_matrix(
    n: int, r: int, K: float, mode: Union[BorderMode, str] = BorderMode.UNBORDERED
) -> FrequencyMatrix:
    return FrequencyMatrix(n, r, K, mode)


def sample_individual(m: FrequencyMatrix, rng: np.random.Generator) -> Individual:
    return Individual(sample_population(m, 1, rng)[0])


def sample_population(m: FrequencyMatrix, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` independent individuals as a (count, n) int64 array.

    Each position is a cumulative-sum scan of its row against one uniform draw.
    Exact matrices draw integers in [0, K) so zero-numerator values are never hit.
    """
    if m.exact:
        cum = np.cumsum(m.numerators, axis=1)
        draws = rng.integers(0, int(m.K), size=(count, m.n))
        values = (draws[:, :, None] >= cum[None, :, :]).sum(axis=2)
    else:
        cum = np.cumsum(m.rows, axis=1)
        draws = rng.random((count, m.n)) * cum[:, -1]
        values = (draws[:, :, None] >= cum[None, :, :]).sum(axis=2)
    return np.minimum(values, m.r - 1).astype(np.int64)


def update_row_unbordered(
    row: Sequence[float], winner_val: int, loser_val: int, K: float
) -> Tuple[np.ndarray, UpdateOutcome]:
    row = np.array(row, dtype=np.float64)
    if winner_val == loser_val:
        return row, UpdateOutcome(False, 0.0)
    if row[loser_val] <= 0.0:
        raise FrequencyContractError(f"loser value {loser_val} was not sampleable")
    step = 1.0 / K
    before = row[winner_val]
    row[winner_val] += step
    row[loser_val] -= step
    if row[loser_val] < -NEGATIVE_TOL:
        # outside the well-behaved regime: clamp to 0 and renormalize
        logger.debug(f"negative clamp at value {loser_val} ({row[loser_val]:.3g})")
        row[loser_val] = 0.0
        row /= row.sum()
        increment = min(step, max(0.0, float(row[winner_val] - before)))
        return row, UpdateOutcome(True, increment, negative_clamp=True)
    row[loser_val] = max(row[loser_val], 0.0)
    return row, UpdateOutcome(True, step)


def update_row_bordered(
    row: Sequence[float], winner_val: int, loser_val: int, n: int, K: float
) -> Tuple[np.ndarray, UpdateOutcome]:
    """Raw +-1/K step followed by the single-pass capping procedure.

    A loser below the lower border is clamped and the deficit is taken from the
    remaining non-winner entries in proportion to their slack; whatever slack
    cannot cover comes off the winner. A winner above the upper border is
    clamped and the excess goes to the other entries in proportion to headroom.
    """
    row = np.array(row, dtype=np.float64)
    if winner_val == loser_val:
        return row, UpdateOutcome(False, 0.0)
    original = row.copy()
    r = row.size
    lo, hi = borders(n, r)
    step = 1.0 / K
    before = row[winner_val]

    row[winner_val] += step
    row[loser_val] -= step

    if row[loser_val] < lo:
        deficit = lo - row[loser_val]
        row[loser_val] = lo
        others = np.ones(r, dtype=bool)
        others[[winner_val, loser_val]] = False
        slack = np.where(others, row - lo, 0.0)
        total = slack.sum()
        take = min(deficit, total)
        if total > 0.0:
            row -= take * slack / total
        row[winner_val] -= deficit - take

    if row[winner_val] > hi:
        excess = row[winner_val] - hi
        row[winner_val] = hi
        headroom = np.clip(hi - row, 0.0, None)
        headroom[winner_val] = 0.0
        total = headroom.sum()
        if total > 0.0:
            row += min(excess, total) * headroom / total

    row = np.clip(row, lo, hi)
    increment = min(step, max(0.0, float(row[winner_val] - before)))
    return row, UpdateOutcome(not np.array_equal(row, original), increment)
