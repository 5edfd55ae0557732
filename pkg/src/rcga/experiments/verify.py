from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from rcga.analysis.drift import SMALL_N, lemma_di_zero_bound, mc_di_zero, mc_phi_drift, mc_step_drift
from rcga.analysis.oracle import exact_di_distribution
from rcga.analysis.potentials import PotentialVariant
from rcga.analysis.subgaussian import aggregate_subgaussian_check, mgf_subgaussian_check
from rcga.engine.runner import step
from rcga.engine.seeding import derive_seed
from rcga.experiments.sweep import CsvTable
from rcga.fitness import ContributionSpec, FitnessId, make_fitness
from rcga.model import (
    ROW_SUM_TOL,
    BorderMode,
    FrequencyMatrix,
    borders,
    init_matrix,
    sample_population,
    update_row_bordered,
)

logger = logging.getLogger(__name__)

VERIFY_HEADER = ("check_name", "params", "estimate", "bound", "pass")

# oracle vs Monte Carlo runs only up to this n; the exact oracle alone covers larger n
ORACLE_MC_MAX_N = 50
# family-wise false-failure rate shared by all oracle_mc_agreement checks
AGREEMENT_ALPHA = 0.01
# (n, r, K) cells for the winner-increment floor; each has 1/K > 1/((r-1)n)
FLOOR_CELLS = ((50, 5, 100.0), (50, 3, 50.0), (100, 2, 50.0), (20, 4, 40.0))


@dataclass(frozen=True)
class CheckResult:
    name: str
    params: str
    estimate: float
    bound: float
    passed: bool
    flag: Optional[str] = None

    @property
    def status(self) -> str:
        if self.flag:
            return self.flag
        return "pass" if self.passed else "fail"

    @property
    def failed(self) -> bool:
        return not self.passed and self.flag is None


@dataclass
class VerifySettings:
    n_values: Sequence[int] = (10, 50, 100)
    r_values: Sequence[int] = (2, 3, 5)
    K: float = 1000.0
    pzero_samples: int = 10**5
    drift_samples: int = 10**4
    model_steps: int = 10**4
    floor_updates: int = 10**5
    random_matrices: int = 20
    seed: int = 0
    bound_scale: float = 1.0


@dataclass
class VerifyReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(c.failed for c in self.checks)

    def table(self) -> CsvTable:
        table = CsvTable(VERIFY_HEADER)
        for c in self.checks:
            table.add(c.name, c.params, float(c.estimate), float(c.bound), c.status)
        return table


def _params(**kw) -> str:
    return ";".join(f"{k}={v}" for k, v in kw.items())


def random_rows(n: int, r: int, rng: np.random.Generator) -> np.ndarray:
    return rng.dirichlet(np.ones(r), size=n)


def random_bordered_row(n: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """A random row inside [1/((r-1)n), 1 - 1/n] summing to one."""
    lo, hi = borders(n, r)
    while True:
        row = lo + (1.0 - r * lo) * rng.dirichlet(np.ones(r))
        if row.max() <= hi:
            return row


def near_target_row(n: int, r: int, K: float, winner: int, rng: np.random.Generator) -> np.ndarray:
    """A bordered row whose ``winner`` entry sits within 2/K below 1 - 1/n - 1/K."""
    lo, _ = borders(n, r)
    target = 1.0 - 1.0 / n - 1.0 / K
    top = rng.uniform(max(lo, target - 2.0 / K), target)
    rest = lo + (1.0 - top - (r - 1) * lo) * rng.dirichlet(np.ones(r - 1))
    return np.insert(rest, winner, top)


def agreement_z(settings: VerifySettings) -> float:
    """Bonferroni-adjusted two-sided z for the oracle_mc_agreement family, never below 3."""
    family = 2 * len(settings.r_values) * sum(1 for n in settings.n_values if n <= ORACLE_MC_MAX_N)
    if family == 0:
        return 3.0
    return max(3.0, float(stats.norm.isf(AGREEMENT_ALPHA / (2 * family))))


class Verifier:
    def __init__(self, settings: VerifySettings) -> None:
        self.settings = settings
        self.report = VerifyReport()
        self.z = agreement_z(settings)
        self._streams = 0

    def rng(self) -> np.random.Generator:
        self._streams += 1
        return np.random.default_rng(derive_seed(self.settings.seed, self._streams))

    def lower(self, bound: float) -> float:
        return bound * self.settings.bound_scale

    def record(self, check: CheckResult) -> None:
        logger.info(f"{check.name} [{check.params}] -> {check.status}")
        self.report.checks.append(check)

    # model suite

    def check_model_invariants(self, n: int = 50, r: int = 5, K: float = 500.0) -> None:
        f = make_fitness(FitnessId.R_ONEMAX, n, r)
        for mode in BorderMode:
            m = init_matrix(n, r, K, mode)
            rng = self.rng()
            worst_sum = 0.0
            worst_border = 0.0
            lo, hi = m.borders
            for _ in range(self.settings.model_steps):
                step(m, f, rng)
                if m.exact:
                    # integer numerators: any deviation from K is a failure
                    dev = int(np.abs(m.numerators.sum(axis=1) - int(K)).max())
                    worst_sum = max(worst_sum, float(dev))
                    continue
                rows = m.rows
                worst_sum = max(worst_sum, float(np.abs(rows.sum(axis=1) - 1.0).max()))
                if mode is BorderMode.BORDERED:
                    worst_border = max(worst_border, float(lo - rows.min()), float(rows.max() - hi))
            p = _params(n=n, r=r, K=K, mode=mode.value)
            tol = 0.0 if m.exact else ROW_SUM_TOL
            self.record(CheckResult("row_sum", p, worst_sum, tol, worst_sum <= tol))
            if mode is BorderMode.BORDERED:
                self.record(CheckResult("border_containment", p, worst_border, 1e-12,
                                        worst_border <= 1e-12))
            elif m.exact:
                num = m.numerators
                ok = bool(np.all(num >= 0) and np.all(num <= int(K))
                          and np.all(num.sum(axis=1) == int(K)))
                self.record(CheckResult("well_behaved", p, float(num.min()), 0.0, ok))

    def check_winner_increment_floor(self, cells: Sequence[Tuple[int, int, float]] = FLOOR_CELLS) -> None:
        """Randomized bordered updates per cell; half the rows put the winner next to its cap."""
        rng = self.rng()
        per_cell = max(1, self.settings.floor_updates // len(cells))
        for n, r, K in cells:
            target = 1.0 - 1.0 / n - 1.0 / K
            worst = math.inf
            done = 0
            while done < per_cell:
                w, l = (int(v) for v in rng.choice(r, size=2, replace=False))
                if done % 2:
                    row = near_target_row(n, r, K, w, rng)
                else:
                    row = random_bordered_row(n, r, rng)
                    if row[w] > target:
                        continue
                _, outcome = update_row_bordered(row, w, l, n, K)
                worst = min(worst, outcome.effective_winner_increment)
                done += 1
            bound = self.lower(1.0 / K - 1.0 / ((r - 1) * n))
            self.record(CheckResult("winner_increment_floor", _params(n=n, r=r, K=K),
                                    worst, bound, worst >= bound - 1e-15))

    def check_sampling(self, r: int = 4, samples: int = 10**5) -> None:
        m = init_matrix(1, r, 4 * r)
        values = sample_population(m, samples, self.rng())[:, 0]
        counts = np.bincount(values, minlength=r)
        pvalue = float(stats.chisquare(counts).pvalue)
        self.record(CheckResult("sampling_gof", _params(r=r, samples=samples),
                                pvalue, 0.001, pvalue >= 0.001))

    # analysis suite

    def check_closed_forms(self) -> None:
        for n, r, expected in ((2, 2, 0.5), (3, 3, 19.0 / 81.0)):
            m = init_matrix(n, r, r * 10)
            got = exact_di_distribution(m, 0, ContributionSpec.identity(r)).p_zero
            self.record(CheckResult("pzero_closed_form", _params(n=n, r=r), got, expected,
                                    abs(got - expected) <= 1e-12))

    def check_oracle(self, n: int, r: int) -> None:
        K = self.settings.K
        m = init_matrix(n, r, K)
        for label, spec in (("identity", ContributionSpec.identity(r)),
                            ("indicator", ContributionSpec.indicator(r))):
            exact = exact_di_distribution(m, 0, spec)
            asym = float(np.abs(exact.masses - exact.masses[::-1]).max())
            p = _params(n=n, r=r, contribution=label)
            self.record(CheckResult("oracle_symmetry", p, asym, 1e-12, asym <= 1e-12))
            if n > ORACLE_MC_MAX_N:
                continue
            mc = mc_di_zero(m, 0, spec, self.settings.pzero_samples, self.rng())
            gap = abs(mc.estimate - exact.p_zero)
            margin = self.z * mc.standard_error
            self.record(CheckResult("oracle_mc_agreement", p, gap, margin, gap <= margin))

    def check_pzero_lemma(self, n: int, r: int) -> None:
        bound = self.lower(lemma_di_zero_bound(n, r))
        flag = "small-n" if n < SMALL_N else None
        spec = ContributionSpec.identity(r)
        uniform = init_matrix(n, r, self.settings.K)
        worst = exact_di_distribution(uniform, 0, spec).p_zero
        rng = self.rng()
        for _ in range(self.settings.random_matrices):
            m = FrequencyMatrix.from_rows(random_rows(n, r, rng), self.settings.K)
            worst = min(worst, exact_di_distribution(m, 0, spec).p_zero)
        self.record(CheckResult("pzero_lemma", _params(n=n, r=r), worst, bound,
                                worst >= bound, flag))

    def check_step_drift(self, n: int, r: int) -> None:
        m = init_matrix(n, r, self.settings.K)
        for fid in FitnessId:
            f = make_fitness(fid, n, r)
            rep = mc_step_drift(m, f, 0, self.settings.drift_samples, self.rng())
            bound = self.lower(rep.bound)
            passed = rep.estimate >= bound - 3 * rep.standard_error
            self.record(CheckResult("step_drift_lemma", _params(n=n, r=r, K=m.K, fitness=fid.value),
                                    rep.estimate, bound, passed))

    def check_phi_drift(self, n: int, r: int) -> None:
        # every p_{i,r-1} at 1/2, the rest spread evenly: inside the lemma's 1/4 floor
        rows = np.full((n, r), 0.5 / (r - 1))
        rows[:, r - 1] = 0.5
        m = FrequencyMatrix.from_rows(rows, self.settings.K)
        f = make_fitness(FitnessId.R_ONEMAX, n, r)
        rep = mc_phi_drift(m, f, self.settings.drift_samples, self.rng(), PotentialVariant.PLAIN)
        bound = self.lower(rep.bound)
        passed = rep.estimate >= bound - 3 * rep.standard_error
        self.record(CheckResult("phi_drift_lemma", _params(n=n, r=r, K=m.K), rep.estimate,
                                bound, passed))

    def check_subgaussian(self, K: float = 100.0, n: int = 100, grid: int = 20) -> None:
        worst = 0.0
        for p in np.linspace(0.0, 1.0, grid):
            z = p * (1.0 - p)
            eps = z / (3.0 * K * math.sqrt(n))
            for lam in np.linspace(0.0, K, grid):
                res = mgf_subgaussian_check(float(p), eps, K, float(lam))
                worst = max(worst, res.lhs / res.rhs)
        self.record(CheckResult("mgf_subgaussian", _params(K=K, grid=f"{grid}x{grid}"),
                                worst, 1.0, worst <= 1.0 + 1e-12))

    def check_aggregate_subgaussian(self, n: int, r: int) -> None:
        m = init_matrix(n, r, self.settings.K)
        res = aggregate_subgaussian_check(m)
        self.record(CheckResult("phi_subgaussian_exponent", _params(n=n, r=r, K=m.K),
                                res.lhs, res.rhs, res.satisfied))

    def run_all(self) -> VerifyReport:
        s = self.settings
        self.check_model_invariants()
        self.check_winner_increment_floor()
        self.check_sampling()
        self.check_closed_forms()
        self.check_subgaussian()
        for n in s.n_values:
            for r in s.r_values:
                self.check_oracle(n, r)
                self.check_pzero_lemma(n, r)
                self.check_step_drift(n, r)
                self.check_phi_drift(n, r)
                self.check_aggregate_subgaussian(n, r)
        return self.report


def verify(settings: Optional[VerifySettings] = None) -> VerifyReport:
    return Verifier(settings or VerifySettings()).run_all()
