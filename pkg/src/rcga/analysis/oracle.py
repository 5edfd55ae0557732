from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from rcga.fitness import ContributionSpec, FitnessFunction, evaluate_many
from rcga.model import BorderMode, FrequencyMatrix, update_row_bordered, update_row_unbordered

logger = logging.getLogger(__name__)

MAX_CONVOLUTION_SIZE = 10**4
MAX_ENUMERATED_PAIRS = 10**6


class OracleSizeError(ValueError):
    """The instance is too large for exact enumeration or convolution."""


@dataclass(frozen=True)
class DiDistribution:
    """Distribution of D_i on the integers ``-offset .. offset``."""

    offset: int
    masses: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return np.arange(-self.offset, self.offset + 1)

    def mass(self, d: int) -> float:
        if abs(d) > self.offset:
            return 0.0
        return float(self.masses[d + self.offset])

    @property
    def p_zero(self) -> float:
        return self.mass(0)


def position_difference(row: np.ndarray, spec: ContributionSpec) -> np.ndarray:
    """Mass of c(x_j) - c(y_j) on ``-cmax .. cmax`` for two i.i.d. draws from ``row``."""
    h = np.bincount(spec.as_array(), weights=np.asarray(row, dtype=np.float64),
                    minlength=spec.max_contribution + 1)
    return np.convolve(h, h[::-1])


def exact_di_distribution(m: FrequencyMatrix, i: int, c: ContributionSpec) -> DiDistribution:
    if c.r != m.r:
        raise ValueError(f"contribution table has {c.r} values, matrix has r={m.r}")
    if not 0 <= i < m.n:
        raise ValueError(f"position {i} outside [0, {m.n})")
    if m.n * (m.r - 1) > MAX_CONVOLUTION_SIZE:
        raise OracleSizeError(f"n*(r-1) = {m.n * (m.r - 1)} exceeds {MAX_CONVOLUTION_SIZE}")
    rows = m.rows
    masses = np.ones(1)
    for j in range(m.n):
        if j != i:
            masses = np.convolve(masses, position_difference(rows[j], c))
    offset = (masses.size - 1) // 2
    total = masses.sum()
    if abs(total - 1.0) > 1e-12:
        logger.debug(f"D_{i} masses summed to {total!r}; renormalizing")
        masses = masses / total
    return DiDistribution(offset, masses)


def delta_table(m: FrequencyMatrix, i: int, value: int) -> np.ndarray:
    """Change of ``p[i, value]`` for every sampleable (winner, loser) pair at position i.

    Pairs whose loser has zero frequency cannot occur and are left at 0.
    """
    row = m.row(i)
    table = np.zeros((m.r, m.r))
    for w in range(m.r):
        for l in range(m.r):
            if w == l or row[l] <= 0.0 or row[w] <= 0.0:
                continue
            if m.mode is BorderMode.BORDERED:
                new, _ = update_row_bordered(row, w, l, m.n, m.K)
            else:
                new, _ = update_row_unbordered(row, w, l, m.K)
            table[w, l] = new[value] - row[value]
    return table


def exact_step_drift(m: FrequencyMatrix, f: FitnessFunction, i: int) -> float:
    """E[Delta_{i,r-1}] by enumerating every (x, y) pair; feasible for r^(2n) <= 10^6."""
    count = m.r ** m.n
    if count * count > MAX_ENUMERATED_PAIRS:
        raise OracleSizeError(f"{count}^2 offspring pairs exceed {MAX_ENUMERATED_PAIRS}")
    rows = m.rows
    xs = np.indices((m.r,) * m.n).reshape(m.n, -1).T
    probs = np.prod(rows[np.arange(m.n), xs], axis=1)
    fit = evaluate_many(f, xs)
    swap = fit[:, None] < fit[None, :]
    xi = np.broadcast_to(xs[:, i][:, None], swap.shape)
    yi = np.broadcast_to(xs[:, i][None, :], swap.shape)
    winner = np.where(swap, yi, xi)
    loser = np.where(swap, xi, yi)
    table = delta_table(m, i, m.r - 1)
    return float(np.sum(np.outer(probs, probs) * table[winner, loser]))
