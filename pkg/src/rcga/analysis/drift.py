from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from rcga.analysis.oracle import delta_table
from rcga.analysis.potentials import (
    PotentialVariant,
    phi_bound_flags,
    phi_drift_bound,
    phi_values,
)
from rcga.fitness import ContributionSpec, FitnessFunction, FitnessId, evaluate_many
from rcga.model import FrequencyMatrix, sample_population

logger = logging.getLogger(__name__)

SE_MARGIN = 3.0
SMALL_N = 10
MIN_PZERO_SAMPLES = 10**3
MIN_DRIFT_SAMPLES = 10**4
_CHUNK_CELLS = 2_000_000


@dataclass(frozen=True)
class DriftReport:
    estimate: float
    standard_error: float
    sample_count: int
    bound: float
    flags: Tuple[str, ...] = ()

    @property
    def satisfied(self) -> bool:
        return self.estimate >= self.bound - SE_MARGIN * self.standard_error


def _pairs(
    m: FrequencyMatrix, samples: int, rng: np.random.Generator
) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    chunk = max(1, _CHUNK_CELLS // (m.n * m.r))
    left = samples
    while left > 0:
        size = min(chunk, left)
        yield sample_population(m, size, rng), sample_population(m, size, rng)
        left -= size


def _ranked(f: FitnessFunction, xs: np.ndarray, ys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    swap = evaluate_many(f, xs) < evaluate_many(f, ys)
    winners = np.where(swap[:, None], ys, xs)
    losers = np.where(swap[:, None], xs, ys)
    return winners, losers


def lemma_di_zero_bound(n: int, r: int) -> float:
    """4 / (9 (2(r-1) sqrt(3n) + 1))."""
    if n < 1 or r < 2:
        raise ValueError(f"need n >= 1 and r >= 2, got n={n}, r={r}")
    return 4.0 / (9.0 * (2.0 * (r - 1) * math.sqrt(3.0 * n) + 1.0))


def mc_di_zero(
    m: FrequencyMatrix,
    i: int,
    c: ContributionSpec,
    samples: int,
    rng: np.random.Generator,
) -> DriftReport:
    """Monte Carlo estimate of P[D_i = 0] against the lemma's lower bound."""
    if samples < MIN_PZERO_SAMPLES:
        raise ValueError(f"need at least {MIN_PZERO_SAMPLES} samples, got {samples}")
    table = c.as_array()
    hits = 0
    for xs, ys in _pairs(m, samples, rng):
        diff = table[xs] - table[ys]
        d = diff.sum(axis=1) - diff[:, i]
        hits += int(np.count_nonzero(d == 0))
    p = hits / samples
    flags = ("small-n",) if m.n < SMALL_N else ()
    return DriftReport(p, math.sqrt(p * (1.0 - p) / samples), samples,
                       lemma_di_zero_bound(m.n, m.r), flags)


def lemma_step_drift_bound(m: FrequencyMatrix, f: FitnessFunction, i: int) -> float:
    """Right-hand side of the single-frequency drift lemma matching ``f``."""
    top = m.column(m.r - 1)
    z = top[i] * (1.0 - top[i])
    if f.id is FitnessId.G_ONEMAX:
        return 8.0 * z / (9.0 * m.K * (2.0 * (m.r - 1) * math.sqrt(3.0 * m.n) + 1.0))
    V = float(np.sum(top * (1.0 - top)))
    return (8.0 / 9.0) * z / (m.K * (2.0 * math.sqrt(3.0 * V) + 1.0))


def mc_step_drift(
    m: FrequencyMatrix,
    f: FitnessFunction,
    i: int,
    samples: int,
    rng: np.random.Generator,
    *,
    strict: bool = True,
) -> DriftReport:
    """Estimate E[Delta_{i,r-1}] by replaying ``samples`` steps from the frozen state ``m``."""
    p = m.column(m.r - 1)[i]
    flags: Tuple[str, ...] = ()
    if not 1.0 / m.K <= p <= 1.0 - 1.0 / m.K:
        if strict:
            raise ValueError(f"p[{i}, r-1] = {p} outside [1/K, 1-1/K]")
        flags = ("precondition",)
    if samples < MIN_DRIFT_SAMPLES and strict:
        raise ValueError(f"need at least {MIN_DRIFT_SAMPLES} samples, got {samples}")
    table = delta_table(m, i, m.r - 1)
    total = 0.0
    total_sq = 0.0
    for xs, ys in _pairs(m, samples, rng):
        winners, losers = _ranked(f, xs, ys)
        delta = table[winners[:, i], losers[:, i]]
        total += float(delta.sum())
        total_sq += float(np.dot(delta, delta))
    mean = total / samples
    var = max(0.0, (total_sq - samples * mean * mean) / max(samples - 1, 1))
    return DriftReport(mean, math.sqrt(var / samples), samples,
                       lemma_step_drift_bound(m, f, i), flags)


def mc_phi_drift(
    m: FrequencyMatrix,
    f: FitnessFunction,
    samples: int,
    rng: np.random.Generator,
    variant: PotentialVariant = PotentialVariant.PLAIN,
) -> DriftReport:
    """Estimate E[phi_t - phi_{t+1}] at the frozen state ``m``."""
    variant = PotentialVariant(variant)
    top = m.column(m.r - 1)
    phi = float(phi_values(top, variant, m.n, m.K))
    tables = np.stack([delta_table(m, j, m.r - 1) for j in range(m.n)])
    positions = np.arange(m.n)
    gains = []
    for xs, ys in _pairs(m, samples, rng):
        winners, losers = _ranked(f, xs, ys)
        new_top = top + tables[positions, winners, losers]
        gains.append(phi - phi_values(new_top, variant, m.n, m.K))
    gain = np.concatenate(gains)
    se = float(gain.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    min_freq = float(top.min())
    bound = phi_drift_bound(phi, m.K, variant, min_frequency=min_freq)
    return DriftReport(float(gain.mean()), se, samples, bound,
                       phi_bound_flags(phi, variant, min_freq))
