from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, TextIO, Tuple, Union

from rcga.engine.runner import RunConfig, RunResult, replication_seeds, run, summarize
from rcga.engine.seeding import derive_seed
from rcga.fitness import FitnessId
from rcga.model import BorderMode

logger = logging.getLogger(__name__)

SWEEP_HEADER = (
    "n", "r", "K", "fitness", "borders", "replications",
    "success_rate", "mean_iterations", "std_iterations", "median_iterations",
)
TRACE_HEADER = ("iteration", "value", "frequency")


def fmt(value: Union[int, float, str, bool]) -> str:
    """Locale-free, deterministic CSV field; floats use the shortest repr that round-trips."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if value.is_integer() and abs(value) < 1e15:
            return str(int(value))
        return repr(float(value))
    return str(value)


@dataclass
class CsvTable:
    header: Tuple[str, ...]
    rows: List[Tuple[str, ...]] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.header):
            raise ValueError(f"row has {len(values)} fields, header has {len(self.header)}")
        self.rows.append(tuple(fmt(v) for v in values))

    def write(self, stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write(buf)
        return buf.getvalue()


def parse_grid(text: str, kind: type = int) -> Tuple:
    """``START:STOP:STEP`` (inclusive), a comma list, or a single value."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid '{text}' must look like START:STOP:STEP")
        start, stop, step = (kind(p) for p in parts)
        if step <= 0:
            raise ValueError(f"grid step must be positive, got {step}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = tuple(kind(start + k * step) for k in range(max(count, 0)))
    else:
        values = tuple(kind(p) for p in text.split(",") if p.strip())
    if not values:
        raise ValueError(f"grid '{text}' is empty")
    return values


@dataclass(frozen=True)
class SweepSpec:
    r: int
    fitness: FitnessId
    mode: BorderMode
    replications: int
    base_seed: int
    n_values: Tuple[int, ...]
    k_values: Tuple[float, ...]
    max_iterations: int = 10**7

    def __post_init__(self) -> None:
        object.__setattr__(self, "fitness", FitnessId(self.fitness))
        object.__setattr__(self, "mode", BorderMode(self.mode))
        if not self.n_values or not self.k_values:
            raise ValueError("sweep grids must be non-empty")
        if any(k <= 0 for k in self.k_values):
            raise ValueError("K values must be positive")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")

    def cells(self) -> List[Tuple[int, float]]:
        return [(n, K) for n in sorted(self.n_values) for K in sorted(self.k_values)]

    def cell_config(self, n: int, K: float) -> RunConfig:
        return RunConfig(
            n=n, r=self.r, K=K, fitness=self.fitness, mode=self.mode,
            base_seed=derive_seed(self.base_seed, n, K),
            replications=self.replications, max_iterations=self.max_iterations,
        )


def _run_job(job: Tuple[RunConfig, int]) -> RunResult:
    config, seed = job
    return run(config, seed)


def run_sweep(spec: SweepSpec, threads: int = 1) -> CsvTable:
    configs = [spec.cell_config(n, K) for n, K in spec.cells()]
    jobs = [(cfg, seed) for cfg in configs for seed in replication_seeds(cfg)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        results = [_run_job(job) for job in jobs]

    table = CsvTable(SWEEP_HEADER)
    for k, cfg in enumerate(configs):
        chunk = results[k * spec.replications:(k + 1) * spec.replications]
        summary = summarize(chunk, [res.seed for res in chunk])
        logger.info(f"cell n={cfg.n} K={cfg.K}: {summary.successes}/{summary.runs} found")
        table.add(
            cfg.n, cfg.r, float(cfg.K), cfg.fitness.value,
            cfg.mode is BorderMode.BORDERED, summary.runs,
            summary.success_rate, summary.mean_iterations,
            summary.std_iterations, summary.median_iterations,
        )
    return table


def trace_table(result: RunResult) -> CsvTable:
    """One row per (recorded iteration, value) at the traced position."""
    table = CsvTable(TRACE_HEADER)
    for point in result.trace:
        for j, freq in enumerate(point.frequencies):
            table.add(point.iteration, j, float(freq))
    return table
