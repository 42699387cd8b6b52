"""Command-line entry point: ``hamap run`` and ``hamap compare``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from .harness import ENGINES, RunConfig, compare_baseline, run


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return value == "on"


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("inputs", nargs="+", help="QASM files or directories of *.qasm")
    p.add_argument("--calibration", default="valencia",
                   help="calibration JSON file, or a bundled device name (valencia, almaden)")
    p.add_argument("--alpha1", type=float, default=0.5, help="weight of the hop-count matrix")
    p.add_argument("--alpha2", type=float, default=0.5, help="weight of the swap-error matrix")
    p.add_argument("--alpha3", type=float, default=0.0, help="weight of the swap-time matrix")
    p.add_argument("--weight", type=float, default=0.5, help="look-ahead weight W")
    p.add_argument("--extended-size", type=int, default=20, help="look-ahead window size")
    p.add_argument("--bridge", type=_on_off, default=True, metavar="{on,off}")
    p.add_argument("--initial", choices=ENGINES, default="sabre")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--budget", type=int, default=100, help="routing calls per initial mapping search")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory for routed QASM and the report")
    p.add_argument("--report", choices=("json", "csv"), default="json")
    p.add_argument("--select", choices=("best",), default="best",
                   help="which trial's routed circuit to emit")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--timing", action="store_true", help="fill runtime_s (makes reports non-reproducible)")
    p.add_argument("--no-verify", dest="verify", action="store_false", help="skip statevector verification")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamap", description="Hardware-aware qubit routing")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="route circuits and report metrics"))
    _add_common(sub.add_parser("compare", help="compare against the SWAP-only baseline"))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        inputs=list(args.inputs),
        calibration=args.calibration,
        alphas=(args.alpha1, args.alpha2, args.alpha3),
        W=args.weight,
        extended_size=args.extended_size,
        bridge=args.bridge,
        initial=args.initial,
        trials=args.trials,
        budget=args.budget,
        seed=args.seed,
        out=args.out,
        report=args.report,
        timing=args.timing,
        verify=args.verify,
        jobs=args.jobs,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
    except ValueError as exc:
        print(f"hamap: {exc}", file=sys.stderr)
        return 2
    if args.command == "run":
        result = run(config)
    else:
        result = compare_baseline(config)
    if not config.out and result.text:
        sys.stdout.write(result.text)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
