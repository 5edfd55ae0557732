#!/usr/bin/env python3
from __future__ import annotations

from typing import Optional

try:
    from dotenv import load_dotenv
    load_dotenv()
except Exception:
    pass

from rcga.analysis.oracle import exact_di_distribution
from rcga.engine.runner import RunConfig, TraceOptions, run
from rcga.experiments.config import load_config
from rcga.experiments.sweep import SweepSpec, run_sweep, trace_table
from rcga.experiments.verify import VerifySettings, verify as run_verify
from rcga.fitness import ContributionSpec, FitnessId, make_fitness
from rcga.model import BorderMode, init_matrix

try:
    from mcp.server.fastmcp import FastMCP
except Exception as e:
    raise RuntimeError(
        "The 'mcp' package is required. Install with `pip install mcp`."
    ) from e

mcp = FastMCP("rcga")

_CFG = load_config()


def _mode(borders: bool) -> BorderMode:
    return BorderMode.BORDERED if borders else BorderMode.UNBORDERED


@mcp.tool()
def run_once(
    n: int,
    r: int,
    k: float,
    fitness: str = FitnessId.R_ONEMAX.value,
    borders: bool = False,
    seed: Optional[int] = None,
    max_iters: Optional[int] = None,
    trace_pos: Optional[int] = None,
    trace_stride: int = 1,
) -> dict:
    trace = TraceOptions(trace_pos, trace_stride) if trace_pos is not None else None
    config = RunConfig(
        n=n, r=r, K=k, fitness=fitness, mode=_mode(borders),
        base_seed=_CFG["base_seed"] if seed is None else seed,
        max_iterations=max_iters or _CFG["max_iterations"], trace=trace,
    )
    result = run(config)
    out = {
        "found_optimum": result.found_optimum,
        "iterations": result.iterations,
        "evaluations": result.evaluations,
        "best_fitness": result.best_fitness,
        "max_fitness": make_fitness(fitness, n, r).max_fitness,
        "seed": result.seed,
    }
    if trace is not None:
        out["trace_csv"] = trace_table(result).to_csv()
    return out


@mcp.tool()
def sweep_cell(
    n: int,
    r: int,
    k: float,
    fitness: str = FitnessId.R_ONEMAX.value,
    borders: bool = False,
    replications: Optional[int] = None,
    seed: Optional[int] = None,
) -> str:
    spec = SweepSpec(
        r=r, fitness=fitness, mode=_mode(borders),
        replications=replications or _CFG["replications"],
        base_seed=_CFG["base_seed"] if seed is None else seed,
        n_values=(n,), k_values=(k,), max_iterations=_CFG["max_iterations"],
    )
    return run_sweep(spec, threads=int(_CFG["threads"])).to_csv()


@mcp.tool()
def verify(n_grid: Optional[list] = None, r_grid: Optional[list] = None, seed: Optional[int] = None) -> dict:
    settings = VerifySettings(
        n_values=tuple(n_grid or _CFG["verify_n"]),
        r_values=tuple(r_grid or _CFG["verify_r"]),
        K=float(_CFG["verify_k"]),
        pzero_samples=int(_CFG["pzero_samples"]),
        drift_samples=int(_CFG["drift_samples"]),
        seed=_CFG["base_seed"] if seed is None else seed,
    )
    report = run_verify(settings)
    return {"ok": report.ok, "report_csv": report.table().to_csv()}


@mcp.tool()
def di_distribution(n: int, r: int, position: int = 0, contribution: str = "identity") -> dict:
    if contribution not in ("identity", "indicator"):
        raise ValueError("contribution must be 'identity' or 'indicator'")
    spec = ContributionSpec.identity(r) if contribution == "identity" else ContributionSpec.indicator(r)
    dist = exact_di_distribution(init_matrix(n, r, float(r)), position, spec)
    return {
        "support": [int(d) for d in dist.support],
        "masses": [float(v) for v in dist.masses],
        "p_zero": dist.p_zero,
    }


def main() -> None:
    mcp.run()


if __name__ == "__main__":
    main()
