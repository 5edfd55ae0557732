from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np


class FitnessId(str, enum.Enum):
    R_ONEMAX = "r-onemax"
    G_ONEMAX = "g-onemax"


@dataclass(frozen=True)
class ContributionSpec:
    """Per-position contribution map ``value -> integer``, as a length-r table."""

    table: tuple

    def __post_init__(self) -> None:
        if len(self.table) < 2:
            raise ValueError("contribution table needs at least two values")
        if any(int(c) != c or c < 0 for c in self.table):
            raise ValueError("contributions must be non-negative integers")

    @classmethod
    def identity(cls, r: int) -> "ContributionSpec":
        return cls(tuple(range(r)))

    @classmethod
    def indicator(cls, r: int) -> "ContributionSpec":
        return cls(tuple(int(v == r - 1) for v in range(r)))

    @property
    def r(self) -> int:
        return len(self.table)

    @property
    def max_contribution(self) -> int:
        return int(max(self.table))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)


@dataclass(frozen=True)
class FitnessFunction:
    id: FitnessId
    n: int
    r: int
    contribution: ContributionSpec = field(compare=False)

    @property
    def max_fitness(self) -> float:
        return float(self.n * self.contribution.max_contribution)

    @property
    def optimum(self) -> np.ndarray:
        return np.full(self.n, self.r - 1, dtype=np.int64)

    def contribution_spec(self) -> ContributionSpec:
        return self.contribution


def make_fitness(fitness_id: Union[FitnessId, str], n: int, r: int) -> FitnessFunction:
    fitness_id = FitnessId(fitness_id)
    if n < 1 or r < 2:
        raise ValueError(f"need n >= 1 and r >= 2, got n={n}, r={r}")
    if fitness_id is FitnessId.R_ONEMAX:
        spec = ContributionSpec.indicator(r)
    else:
        spec = ContributionSpec.identity(r)
    return FitnessFunction(fitness_id, n, r, spec)


def evaluate_many(f: FitnessFunction, xs: np.ndarray) -> np.ndarray:
    """Fitness of each row of a (count, n) value array."""
    xs = np.asarray(xs, dtype=np.int64)
    if xs.ndim != 2 or xs.shape[1] != f.n:
        raise ValueError(f"expected shape (count, {f.n}), got {xs.shape}")
    if xs.size and (xs.min() < 0 or xs.max() > f.r - 1):
        raise ValueError(f"values must lie in [0, {f.r - 1}]")
    return f.contribution.as_array()[xs].sum(axis=1).astype(np.float64)


def evaluate(f: FitnessFunction, x: Union[Sequence[int], np.ndarray]) -> float:
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (f.n,):
        raise ValueError(f"expected {f.n} values, got shape {x.shape}")
    value = float(evaluate_many(f, x[None, :])[0])
    assert value.is_integer()
    return value


def is_optimal(f: FitnessFunction, fitness: float) -> bool:
    return fitness == f.max_fitness
