from __future__ import annotations

import enum
from collections import Counter
from typing import Dict, Sequence, Union

import numpy as np

from rcga.fitness import ContributionSpec, FitnessFunction, FitnessId
from rcga.model import FrequencyMatrix, sample_population


class StepKind(str, enum.Enum):
    RANDOM_WALK = "random-walk"
    BIASED = "biased"
    NEUTRAL = "neutral"


_KINDS = (StepKind.RANDOM_WALK, StepKind.BIASED, StepKind.NEUTRAL)


def _require_graded(c: ContributionSpec) -> None:
    if c.table != tuple(range(c.r)):
        raise ValueError("step classification is defined for the G-OneMax (identity) contribution")


def classify_steps(xs: np.ndarray, ys: np.ndarray, i: int, c: ContributionSpec) -> np.ndarray:
    """Vectorized classify_step over (count, n) offspring arrays; returns indices into StepKind order."""
    _require_graded(c)
    xs = np.atleast_2d(np.asarray(xs, dtype=np.int64))
    ys = np.atleast_2d(np.asarray(ys, dtype=np.int64))
    r = c.r
    xi, yi = xs[:, i], ys[:, i]
    d = (xs.sum(axis=1) - xi) - (ys.sum(axis=1) - yi)
    mixed = (d != 0) & (d >= -(r - 1)) & (d <= r - 2) & ((yi - xi) > d)
    kinds = np.where((d == 0) | mixed, 1, 0)
    return np.where(xi == yi, 2, kinds)


def classify_step(
    x: Union[Sequence[int], np.ndarray],
    y: Union[Sequence[int], np.ndarray],
    i: int,
    c: ContributionSpec,
) -> StepKind:
    return _KINDS[int(classify_steps(x, y, i, c)[0])]


def step_frequencies(
    m: FrequencyMatrix, f: FitnessFunction, i: int, samples: int, rng: np.random.Generator
) -> Dict[StepKind, float]:
    """Empirical share of each step kind at position i for pairs sampled from ``m``."""
    if f.id is not FitnessId.G_ONEMAX:
        raise ValueError("step classification is defined for G-OneMax")
    kinds = classify_steps(sample_population(m, samples, rng), sample_population(m, samples, rng),
                           i, f.contribution_spec())
    counts = Counter(int(k) for k in kinds)
    return {kind: counts.get(idx, 0) / samples for idx, kind in enumerate(_KINDS)}
