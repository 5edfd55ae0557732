from __future__ import annotations

import argparse
import logging
import os
import sys
from contextlib import contextmanager
from typing import Iterator, List, Optional, TextIO

try:
    from dotenv import load_dotenv
except Exception:  # pragma: no cover
    load_dotenv = None  # type: ignore

from rcga.engine.runner import RunConfig, TraceOptions, run
from rcga.experiments.config import load_config
from rcga.experiments.sweep import SweepSpec, parse_grid, run_sweep, trace_table
from rcga.experiments.verify import VerifySettings, verify
from rcga.fitness import FitnessId, make_fitness
from rcga.model import BorderMode

logger = logging.getLogger(__name__)

FITNESS_CHOICES = [f.value for f in FitnessId]


@contextmanager
def _output(path: Optional[str]) -> Iterator[TextIO]:
    if not path or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        yield fh


def _setup_logging(level: Optional[str], cfg: dict) -> None:
    name = (level or os.getenv("RCGA_LOG_LEVEL") or str(cfg.get("log_level", "WARNING"))).upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _common(cfg: dict) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=None, help="Extra JSON config layered on the resolved one")
    p.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default from config)")
    p.add_argument("--seed", type=int, default=cfg["base_seed"],
                   help=f"Base seed (default: {cfg['base_seed']})")
    return p


def _algorithm_flags(p: argparse.ArgumentParser, cfg: dict) -> None:
    p.add_argument("--r", type=int, default=3, help="Number of values per position (default: 3)")
    p.add_argument("--fitness", choices=FITNESS_CHOICES, default=FitnessId.R_ONEMAX.value,
                   help="Objective (default: r-onemax)")
    p.add_argument("--borders", action="store_true",
                   help="Restrict frequencies to [1/((r-1)n), 1-1/n] (off by default)")
    p.add_argument("--max-iters", type=int, default=cfg["max_iterations"],
                   help=f"Iteration budget per run (default: {cfg['max_iterations']})")


def build_parser(cfg: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rcga",
        description="Simulate the r-valued compact GA on multi-valued OneMax and audit its drift bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(cfg)

    p = sub.add_parser("run", parents=[common], help="Run once and print key=value results")
    p.add_argument("--n", type=int, default=100, help="Number of positions (default: 100)")
    p.add_argument("--k", type=float, default=600.0, help="Hypothetical population size K (default: 600)")
    _algorithm_flags(p, cfg)
    p.add_argument("--trace-pos", type=int, default=None, help="Position whose frequencies are traced")
    p.add_argument("--trace-stride", type=int, default=cfg["trace_stride"],
                   help=f"Record every k-th iteration (default: {cfg['trace_stride']})")
    p.add_argument("--monitor", default=None,
                   help="Comma list of k; monitors drops below k/r - 1/(2r) after reaching k/r")
    p.add_argument("--out", default=None, help="Trace CSV path (iteration,value,frequency)")

    p = sub.add_parser("sweep", parents=[common], help="Grid over n and K, one CSV row per cell")
    p.add_argument("--n-grid", default="100", help="START:STOP:STEP or comma list (default: 100)")
    p.add_argument("--k-grid", default="200:1000:100",
                   help="START:STOP:STEP or comma list (default: 200:1000:100)")
    _algorithm_flags(p, cfg)
    p.add_argument("--replications", type=int, default=cfg["replications"],
                   help=f"Runs per cell (default: {cfg['replications']})")
    p.add_argument("--threads", type=int, default=cfg["threads"],
                   help=f"Worker processes (default: {cfg['threads']})")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")

    p = sub.add_parser("verify", parents=[common], help="Run the model and lemma checks")
    p.add_argument("--n-grid", default=",".join(str(v) for v in cfg["verify_n"]),
                   help="Comma list of n for the lemma grid")
    p.add_argument("--r-grid", default=",".join(str(v) for v in cfg["verify_r"]),
                   help="Comma list of r for the lemma grid")
    p.add_argument("--k", type=float, default=float(cfg["verify_k"]),
                   help=f"K used by the lemma checks (default: {cfg['verify_k']})")
    p.add_argument("--pzero-samples", type=int, default=cfg["pzero_samples"],
                   help=f"Monte Carlo samples for P[D_i=0] (default: {cfg['pzero_samples']})")
    p.add_argument("--drift-samples", type=int, default=cfg["drift_samples"],
                   help=f"Monte Carlo samples per drift estimate (default: {cfg['drift_samples']})")
    p.add_argument("--model-steps", type=int, default=10**4,
                   help="Random steps for the model invariant checks (default: 10000)")
    p.add_argument("--floor-updates", type=int, default=10**5,
                   help="Randomized bordered updates for the increment floor (default: 100000)")
    p.add_argument("--corrupt-bound", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("--out", default=None, help="Report CSV path (default: stdout)")
    return parser


def cmd_run(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.r < 2:
        parser.error("--r must be at least 2")
    if args.n < 1:
        parser.error("--n must be at least 1")
    if args.trace_pos is not None and not 0 <= args.trace_pos < args.n:
        parser.error(f"--trace-pos must lie in [0, {args.n})")
    monitor = ()
    if args.monitor:
        monitor = tuple(float(k) / args.r for k in args.monitor.split(","))
    trace = TraceOptions(args.trace_pos, args.trace_stride) if args.trace_pos is not None else None
    config = RunConfig(
        n=args.n, r=args.r, K=args.k, fitness=args.fitness,
        mode=BorderMode.BORDERED if args.borders else BorderMode.UNBORDERED,
        base_seed=args.seed, max_iterations=args.max_iters, trace=trace, monitor=monitor,
    )
    result = run(config)
    f = make_fitness(config.fitness, config.n, config.r)
    lines = [
        f"found_optimum={str(result.found_optimum).lower()}",
        f"iterations={result.iterations}",
        f"evaluations={result.evaluations}",
        f"best_fitness={result.best_fitness:g}",
        f"max_fitness={f.max_fitness:g}",
        f"seed={result.seed}",
        f"excursions={len(result.excursions)}",
    ]
    print("\n".join(lines))
    if trace is not None:
        if args.out:
            with _output(args.out) as fh:
                trace_table(result).write(fh)
        else:
            logger.warning("--trace-pos given without --out; trace not written")
    return 0


def cmd_sweep(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.r < 2:
        parser.error("--r must be at least 2")
    try:
        spec = SweepSpec(
            r=args.r, fitness=args.fitness,
            mode=BorderMode.BORDERED if args.borders else BorderMode.UNBORDERED,
            replications=args.replications, base_seed=args.seed,
            n_values=parse_grid(args.n_grid, int), k_values=parse_grid(args.k_grid, float),
            max_iterations=args.max_iters,
        )
    except ValueError as e:
        parser.error(str(e))
    table = run_sweep(spec, threads=args.threads)
    with _output(args.out) as fh:
        table.write(fh)
    return 0


def cmd_verify(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        settings = VerifySettings(
            n_values=parse_grid(args.n_grid, int), r_values=parse_grid(args.r_grid, int),
            K=args.k, pzero_samples=args.pzero_samples, drift_samples=args.drift_samples,
            model_steps=args.model_steps, floor_updates=args.floor_updates, seed=args.seed,
            bound_scale=1e6 if args.corrupt_bound else 1.0,
        )
    except ValueError as e:
        parser.error(str(e))
    if any(r < 2 for r in settings.r_values):
        parser.error("--r-grid values must be at least 2")
    report = verify(settings)
    with _output(args.out) as fh:
        report.table().write(fh)
    failed = [c for c in report.checks if c.failed]
    if failed:
        print(f"Error: {len(failed)} of {len(report.checks)} checks failed", file=sys.stderr)
        return 1
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv: Optional[List[str]] = None) -> int:
    if load_dotenv is not None:
        try:
            load_dotenv()
        except Exception:
            pass
    cfg = load_config()
    parser = build_parser(cfg)
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = load_config(args.config)
        except RuntimeError as e:
            print(f"Error: {e}", file=sys.stderr)
            return 1
        parser = build_parser(cfg)
        args = parser.parse_args(argv)
    _setup_logging(args.log_level, cfg)
    try:
        return COMMANDS[args.command](args, parser)
    except Exception as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
