from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np

from rcga.engine.monitor import DriftExcursion, ExcursionMonitor
from rcga.engine.seeding import mix
from rcga.fitness import FitnessFunction, FitnessId, evaluate_many, is_optimal, make_fitness
from rcga.model import BorderMode, FrequencyMatrix, Individual, init_matrix, sample_population

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 10**7


@dataclass(frozen=True)
class TraceOptions:
    position: int
    stride: int = 1


@dataclass(frozen=True)
class RunConfig:
    n: int
    r: int
    K: float
    fitness: FitnessId = FitnessId.R_ONEMAX
    mode: BorderMode = BorderMode.UNBORDERED
    base_seed: int = 0
    replications: int = 1
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    trace: Optional[TraceOptions] = None
    monitor: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "fitness", FitnessId(self.fitness))
        object.__setattr__(self, "mode", BorderMode(self.mode))
        object.__setattr__(self, "monitor", tuple(float(v) for v in self.monitor))
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.r < 2:
            raise ValueError(f"r must be >= 2, got {self.r}")
        if not self.K > 0:
            raise ValueError(f"K must be > 0, got {self.K}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.trace is not None:
            if not 0 <= self.trace.position < self.n:
                raise ValueError(f"trace position {self.trace.position} outside [0, {self.n})")
            if self.trace.stride < 1:
                raise ValueError("trace stride must be >= 1")


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    frequencies: np.ndarray


@dataclass
class RunResult:
    found_optimum: bool
    iterations: int
    best_fitness: float
    seed: int
    best: Optional[Individual] = None
    trace: List[TracePoint] = field(default_factory=list)
    excursions: List[DriftExcursion] = field(default_factory=list)
    final_potential: float = math.nan

    @property
    def evaluations(self) -> int:
        return 2 * self.iterations


@dataclass
class BatchSummary:
    runs: int
    successes: int
    mean_iterations: float
    median_iterations: float
    std_iterations: float
    seeds: List[int]
    results: List[RunResult] = field(repr=False, default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.successes / self.runs

    @property
    def failures(self) -> int:
        return self.runs - self.successes


def sample_pair(
    m: FrequencyMatrix, f: FitnessFunction, rng: np.random.Generator
) -> Tuple[Individual, Individual]:
    values = sample_population(m, 2, rng)
    fx, fy = evaluate_many(f, values)
    return Individual(values[0], fx), Individual(values[1], fy)


def rank_pair(x: Individual, y: Individual) -> Tuple[Individual, Individual]:
    # strict inequality: ties keep x as the winner
    if x.fitness < y.fitness:
        return y, x
    return x, y


def step(
    m: FrequencyMatrix, f: FitnessFunction, rng: np.random.Generator
) -> Tuple[FrequencyMatrix, Individual, Individual]:
    """One iteration of the r-cGA; returns (m, x, y) with x, y in sampling order."""
    x, y = sample_pair(m, f, rng)
    winner, loser = rank_pair(x, y)
    m.update(winner.values, loser.values)
    return m, x, y


def run(
    config: RunConfig, seed: Optional[int] = None, initial: Optional[FrequencyMatrix] = None
) -> RunResult:
    seed = config.base_seed if seed is None else seed
    rng = np.random.default_rng(seed)
    f = make_fitness(config.fitness, config.n, config.r)
    if initial is not None:
        if (initial.n, initial.r) != (config.n, config.r):
            raise ValueError("initial matrix shape does not match config")
        m = initial.copy()
    else:
        m = init_matrix(config.n, config.r, config.K, config.mode)
    top = config.r - 1

    trace: List[TracePoint] = []
    monitor = ExcursionMonitor(config.monitor, config.r, config.n) if config.monitor else None

    def record(t: int) -> None:
        if config.trace is not None:
            trace.append(TracePoint(t, m.row(config.trace.position)))

    record(0)
    if monitor is not None:
        monitor.observe(0, m.column(top))

    best_fitness = -math.inf
    best: Optional[Individual] = None
    found = False
    t = 0
    logger.debug(f"run start n={config.n} r={config.r} K={config.K} seed={seed}")
    while t < config.max_iterations:
        t += 1
        x, y = sample_pair(m, f, rng)
        winner, loser = rank_pair(x, y)
        if winner.fitness > best_fitness:
            best_fitness, best = winner.fitness, winner
        if is_optimal(f, winner.fitness):
            found = True
            break
        m.update(winner.values, loser.values)
        if config.trace is not None and t % config.trace.stride == 0:
            record(t)
        if monitor is not None:
            monitor.observe(t, m.column(top))

    if config.trace is not None and (not trace or trace[-1].iteration != t):
        record(t)
    if not found:
        logger.info(f"budget of {config.max_iterations} iterations exhausted (seed={seed})")
    else:
        logger.debug(f"optimum after {t} iterations (seed={seed})")
    return RunResult(
        found_optimum=found,
        iterations=t,
        best_fitness=float(best_fitness),
        seed=seed,
        best=best,
        trace=trace,
        excursions=monitor.excursions if monitor is not None else [],
        final_potential=float(np.sum(1.0 - m.column(top))),
    )


def replication_seeds(config: RunConfig) -> List[int]:
    return [mix(config.base_seed, i) for i in range(config.replications)]


def summarize(results: Sequence[RunResult], seeds: Sequence[int]) -> BatchSummary:
    done = np.array([r.iterations for r in results if r.found_optimum], dtype=np.float64)
    if done.size:
        mean, median = float(done.mean()), float(np.median(done))
        std = float(done.std(ddof=1)) if done.size > 1 else 0.0
    else:
        mean = median = std = math.nan
    return BatchSummary(
        runs=len(results),
        successes=int(done.size),
        mean_iterations=mean,
        median_iterations=median,
        std_iterations=std,
        seeds=list(seeds),
        results=list(results),
    )


def run_batch(config: RunConfig, threads: int = 1) -> BatchSummary:
    seeds = replication_seeds(config)
    worker = partial(run, config)
    if threads > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, seeds))
    else:
        results = [worker(s) for s in seeds]
    summary = summarize(results, seeds)
    logger.info(
        f"batch n={config.n} r={config.r} K={config.K} {config.fitness.value}: "
        f"{summary.successes}/{summary.runs} found, mean={summary.mean_iterations:.1f}"
    )
    return summary
