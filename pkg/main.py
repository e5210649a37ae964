#!/usr/bin/env python3
"""
Coherent-State Resolution Diagnostics - Command Line Entry Point

Subcommands tabulate the incomplete-gamma kernel, apply the truncated
resolution A_r, sweep radii, pick a radius for a target error, certify the
missing uniform limit, compare against disk quadrature, and run the full
acceptance suite. Reports go to stdout (or --output); logs go to stderr.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import orjson

from src.core.errors import ResolutionError
from src.study.checks import CHECK_COLUMNS, run_check_suite
from src.study.config import LibrarySettings, build_study_config, load_study_config
from src.study.reporting import emit, header_block, render
from src.study.runner import (
    CommandOutput,
    converge_command,
    gamma_table_command,
    norm_witness_command,
    quadrature_compare_command,
    resolve_command,
    select_radius_command,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def configure_logging(level: str, log_file: Optional[str] = None) -> None:
    """stderr always, plus a file when asked; stdout is reserved for reports."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _sweep(text: str) -> Dict[str, Any]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"sweep must be start,factor,count, got {text!r}")
    try:
        return {"start": float(parts[0]), "factor": float(parts[1]), "count": int(parts[2])}
    except ValueError:
        raise argparse.ArgumentTypeError(f"sweep must be start,factor,count, got {text!r}") from None


def build_parser(settings: LibrarySettings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=None, help="Report format (csv)")
    common.add_argument("--output", default=None, help="Write the report here instead of stdout")
    common.add_argument("--log-level", default=settings.log_level, help="Logging level")
    common.add_argument("--log-file", default=None, help="Also log to this file")

    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Truncated coherent-state resolution of the identity: numerics and diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma-table", parents=[common], help="Tabulate I_n(R) and Q_n(R)")
    p.add_argument("--radius-sq", type=float, required=True, help="Argument R = r^2")
    p.add_argument("--max-n", type=int, required=True, help="Largest index n")

    p = sub.add_parser("resolve", parents=[common], help="Apply A_r to a test vector")
    p.add_argument("--vector", required=True, help="Test vector spec")
    p.add_argument("--dim", type=int, default=64, help="Truncation dimension")
    p.add_argument("--radius", type=float, required=True, help="Disk radius r")

    p = sub.add_parser("converge", parents=[common], help="Radius sweep report")
    p.add_argument("--config", default=None, help="YAML study configuration")
    p.add_argument("--vector", default=None, help="Test vector spec")
    p.add_argument("--dim", type=int, default=None, help="Truncation dimension")
    p.add_argument("--radii", type=_float_list, default=None, help="Comma-separated increasing radii")
    p.add_argument("--sweep", type=_sweep, default=None, help="Geometric sweep start,factor,count")
    p.add_argument("--grid", default=None, help="Polar grid KxL for --quadrature")
    p.add_argument("--quadrature", action="store_true", default=None,
                   help="Also compare each radius against disk quadrature")
    p.add_argument("--max-m", type=int, default=None, help="Norm-witness horizon")
    p.add_argument("--workers", type=int, default=None, help="Threads for the radius sweep")
    p.add_argument("--seed", type=int, default=None, help="Seed for the quadrature bra vector")

    p = sub.add_parser("select-radius", parents=[common], help="Radius reaching a strong-error target")
    p.add_argument("--vector", required=True, help="Test vector spec")
    p.add_argument("--dim", type=int, default=64, help="Truncation dimension")
    p.add_argument("--eps", type=float, required=True, help="Target strong error")

    p = sub.add_parser("norm-witness", parents=[common], help="Basis-vector lower bound on ||A_r - I||")
    p.add_argument("--radius", type=float, required=True, help="Disk radius r")
    p.add_argument("--max-m", type=int, default=None, help="Largest mode searched")

    p = sub.add_parser("quadrature-compare", parents=[common], help="Disk quadrature against A_r")
    p.add_argument("--vector", required=True, help="Test vector spec")
    p.add_argument("--dim", type=int, default=64, help="Truncation dimension")
    p.add_argument("--radius", type=float, required=True, help="Disk radius r")
    p.add_argument("--grid", default=settings.default_grid, help="Polar grid KxL")
    p.add_argument("--seed", type=int, default=0, help="Seed for the bra-exchange vector")

    p = sub.add_parser("check", parents=[common], help="Run the full acceptance suite")
    p.add_argument("--seed", type=int, default=0, help="Seed for the randomized suites")
    return parser


def _converge(args: argparse.Namespace, settings: LibrarySettings) -> CommandOutput:
    overrides: Dict[str, Any] = {
        "vector": args.vector, "dim": args.dim, "radii": args.radii, "sweep": args.sweep,
        "grid": args.grid, "quadrature": args.quadrature, "max_m": args.max_m,
        "workers": args.workers, "seed": args.seed,
    }
    if args.config:
        cfg = load_study_config(args.config, overrides)
        base_dir: Optional[str] = str(Path(args.config).resolve().parent)
    else:
        data = {k: v for k, v in overrides.items() if v is not None}
        data.setdefault("grid", settings.default_grid)
        cfg = build_study_config(data)
        base_dir = None

    output = cfg.output.model_copy(update={
        k: v for k, v in (("path", args.output), ("format", args.format)) if v is not None
    })
    cfg = cfg.model_copy(update={"output": output})
    args.output = cfg.output.path
    return converge_command(cfg, base_dir)


def _check(args: argparse.Namespace, fmt: str) -> CommandOutput:
    results = run_check_suite(args.seed)
    rows = [(suite, check.name, check.passed, check.detail) for suite, check in results]
    passed = all(check.passed for _, check in results)
    header = header_block("check", {"seed": args.seed, "checks": len(rows),
                                    "failed": sum(not check.passed for _, check in results)})
    text = render(fmt, header, {"checks": (CHECK_COLUMNS, rows)})
    return CommandOutput(text, passed, [check for _, check in results])


def dispatch(args: argparse.Namespace, settings: LibrarySettings) -> CommandOutput:
    fmt = args.format or "csv"
    handlers: Dict[str, Callable[[], CommandOutput]] = {
        "gamma-table": lambda: gamma_table_command(args.radius_sq, args.max_n, fmt),
        "resolve": lambda: resolve_command(args.vector, args.dim, args.radius, fmt),
        "converge": lambda: _converge(args, settings),
        "select-radius": lambda: select_radius_command(args.vector, args.dim, args.eps, fmt,
                                                       settings.bisection_steps),
        "norm-witness": lambda: norm_witness_command(args.radius, args.max_m, fmt),
        "quadrature-compare": lambda: quadrature_compare_command(args.vector, args.dim, args.radius,
                                                                 args.grid, args.seed, fmt),
        "check": lambda: _check(args, fmt),
    }
    return handlers[args.command]()


def _report_error(error: Exception) -> None:
    payload = {"error": type(error).__name__, "message": str(error)}
    sys.stderr.write(orjson.dumps(payload).decode() + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit status."""
    settings = LibrarySettings()
    args = build_parser(settings).parse_args(argv)
    configure_logging(args.log_level, args.log_file)

    try:
        result = dispatch(args, settings)
        emit(result.text, args.output, sys.stdout)
    except ResolutionError as e:
        logger.error(f"{args.command} failed: {e}")
        _report_error(e)
        return EXIT_ERROR
    except OSError as e:
        logger.error(f"{args.command} could not write its report: {e}")
        _report_error(e)
        return EXIT_ERROR

    if not result.passed:
        failed = [check.name for check in result.checks if not check.passed]
        logger.warning(f"{args.command}: {len(failed)} assertions failed")
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
