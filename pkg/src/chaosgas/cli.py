"""Command line entry point: ``chaosgas {run,sweep,diagnose}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .chaos import DEFAULT_DISCARD, DEFAULT_START, ChaoticState, MapParams
from .experiment import ConfigError, emit_diagnostics, load_config, load_sweep, preset, run_case, run_sweep


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
    p.add_argument("--preset", choices=("desk", "paper"), default="desk",
                   help="defaults for keys the config omits (default: desk)")
    p.add_argument("--seed", type=int, help="rng seed (overrides rng_seed)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="chaosgas", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="simulate and analyse one case")
    run.add_argument("--config", type=Path, help="key: value config document")

    sweep = sub.add_parser("sweep", parents=[common], help="run several cases (default: Table 1 lambda_b values)")
    sweep.add_argument("--config", type=Path)
    sweep.add_argument("--parallel", type=int, default=1, metavar="K")

    diag = sub.add_parser("diagnose", parents=[common], help="attractor, spectrum and occupancy of the map")
    diag.add_argument("--lambda-a", type=float, required=True)
    diag.add_argument("--lambda-b", type=float, required=True)
    diag.add_argument("--points", type=int, default=2000)
    diag.add_argument("--discard", type=int, default=DEFAULT_DISCARD)
    diag.add_argument("--start", type=float, nargs=2, default=DEFAULT_START, metavar=("X0", "Y0"))
    return parser


def _overrides(args) -> dict:
    out = {}
    if args.out is not None:
        out["output_dir"] = args.out
    if args.seed is not None:
        out["rng_seed"] = args.seed
    return out


def _document(args) -> str:
    return args.config.read_text(encoding="utf-8") if args.config else ""


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            cfg = load_config(_document(args), preset(args.preset))
            cfg = cfg.replace(**_overrides(args))
            art = run_case(cfg)
            print(f"case {cfg.case_id}: artifacts in {art.directory}")
            return 0

        if args.command == "sweep":
            if args.parallel < 1:
                raise ConfigError("--parallel must be >= 1")
            spec = load_sweep(_document(args), preset(args.preset))
            spec = type(spec)(spec.base.replace(**_overrides(args)), spec.cases)
            res = run_sweep(spec, args.parallel)
            print(f"summary: {res.summary_file}")
            for r in res.failures:
                print(f"FAILED case {r['case_id']}: {r['error']}", file=sys.stderr)
            return 1 if res.failures else 0

        params = MapParams(args.lambda_a, args.lambda_b)
        if not params.in_chaotic_window:
            logging.getLogger("chaosgas").warning("parameters outside the chaotic window")
        out = args.out if args.out is not None else Path("diagnostics")
        files = emit_diagnostics(params, ChaoticState(*args.start), args.points, args.discard, out)
        for name, path in files.items():
            print(f"{name}: {path}")
        return 0
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
