"""Command-line interface.

Subcommands::

    tfbs convergence --example 1 --alpha 0.3 --gamma 4 --mode spatial \
        --ladder 4,8,16 --scheme both --out table.csv
    tfbs price --example 4 --alpha 0.3,0.5,0.8 --lambda 1,4 --out prices/
    tfbs soe-check --alpha 0.5 --eps 1e-12 --delta 1e-6 --T 1 --out diag/

Parameters may also come from a flat ``key = value`` config file via
``--config``; explicit flags override file entries.  Exit codes:
0 success, 2 parameter error, 3 solve failure, 4 SOE bound failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from tfbs.harness import (
    PricingConfig,
    StudyConfig,
    run_convergence_study,
    run_pricing,
    soe_check,
)

EXIT_OK = 0
EXIT_PARAM = 2
EXIT_SOLVE = 3
EXIT_SOE = 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_PARAM) -> None:
        super().__init__(message)
        self.code = code


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merge(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill unset flags from the config file; flags always win."""
    if not getattr(args, "config", None):
        return
    file_values = _read_config(args.config)
    defaults = args._defaults
    for key, value in file_values.items():
        if key == "lambda":
            key = "lam"
        if key not in defaults or key == "command":
            raise CliError(f"unknown config key {key!r}")
        if key in args._explicit:
            continue
        default = defaults[key]
        if isinstance(default, bool):
            parsed = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(default, int) and not isinstance(default, bool):
            parsed = int(value)
        elif isinstance(default, float):
            parsed = float(value)
        else:
            parsed = value
        setattr(args, key, parsed)


class _TrackingParser(argparse.ArgumentParser):
    """Records which destinations were set explicitly on the command line."""

    def parse_args(self, argv=None, namespace=None):  # type: ignore[override]
        args = super().parse_args(argv, namespace)
        sentinel = super().parse_args([] if not args.command else [args.command])
        explicit = set()
        for key, value in vars(args).items():
            if key == "command":
                continue
            if vars(sentinel).get(key, object()) != value:
                explicit.add(key)
        args._explicit = explicit
        args._defaults = vars(sentinel)
        return args


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in str(text).split(",") if tok.strip())
    except ValueError:
        raise CliError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in str(text).split(",") if tok.strip())
    except ValueError:
        raise CliError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> _TrackingParser:
    parser = _TrackingParser(prog="tfbs", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="flat key = value config file")
        p.add_argument("--eps", type=float, default=1e-12, help="SOE tolerance")
        p.add_argument("--out", default=None, help="output path")

    conv = sub.add_parser("convergence", help="run a convergence study")
    common(conv)
    conv.add_argument("--example", type=int, default=1, choices=(1, 2))
    conv.add_argument("--scheme", default="both", choices=("ds", "fs", "both"))
    conv.add_argument("--alpha", default="0.3")
    conv.add_argument("--gamma", type=float, default=None)
    conv.add_argument("--lambda", dest="lam", type=float, default=1.0)
    conv.add_argument("--mode", default="spatial", choices=("spatial", "temporal"))
    conv.add_argument("--ladder", default="4,8,16", help="comma-separated N or M values")
    conv.add_argument("--stability-monitor", action="store_true")

    price = sub.add_parser("price", help="price a benchmark option")
    common(price)
    price.add_argument("--example", type=int, default=4, choices=(3, 4))
    price.add_argument("--scheme", default="fs", choices=("ds", "fs"))
    price.add_argument("--alpha", default="0.3,0.5,0.8", help="comma-separated list")
    price.add_argument("--lambda", dest="lam", default="1,4", help="comma-separated list")
    price.add_argument("--resolution", dest="N", type=int, default=32)
    price.add_argument("--strike-aligned", action="store_true")
    price.add_argument("--stability-monitor", action="store_true")

    soe = sub.add_parser("soe-check", help="build and verify an SOE kernel")
    common(soe)
    soe.add_argument("--alpha", type=float, default=0.5)
    soe.add_argument("--delta", type=float, default=1e-6)
    soe.add_argument("--T", type=float, default=1.0)

    return parser


def _default_gamma(alpha: float) -> float:
    from tfbs.benchmarks import recommended_gamma

    return recommended_gamma(alpha)


def _cmd_convergence(args: argparse.Namespace) -> int:
    try:
        alpha = float(args.alpha)
    except ValueError:
        raise CliError(f"--alpha must be a single number here, got {args.alpha!r}")
    gamma = float(args.gamma) if args.gamma is not None else _default_gamma(alpha)
    try:
        config = StudyConfig(
            example=args.example,
            alpha=alpha,
            gamma=gamma,
            lam=args.lam,
            scheme=args.scheme,
            mode=args.mode,
            ladder=_int_list(args.ladder),
            eps=args.eps,
            out=Path(args.out) if args.out else None,
            stability_monitor=args.stability_monitor,
        )
    except ValueError as exc:
        raise CliError(str(exc))
    table = run_convergence_study(config)
    sys.stdout.write(table.to_csv(full=False))
    failures = [r for r in table.rows if r.failure is not None]
    for r in failures:
        print(f"# FAILED {r.scheme} N={r.N} M={r.M}: {r.failure}", file=sys.stderr)
    return EXIT_SOLVE if failures else EXIT_OK


def _cmd_price(args: argparse.Namespace) -> int:
    try:
        config = PricingConfig(
            example=args.example,
            alphas=_float_list(args.alpha),
            lams=_float_list(args.lam),
            N=args.N,
            scheme=args.scheme,
            eps=args.eps,
            out=Path(args.out) if args.out else None,
            strike_aligned=args.strike_aligned,
            stability_monitor=args.stability_monitor,
        )
    except ValueError as exc:
        raise CliError(str(exc))
    try:
        result = run_pricing(config)
    except Exception as exc:  # noqa: BLE001 - map to exit code
        print(f"solve failed: {exc}", file=sys.stderr)
        return EXIT_SOLVE
    for case in result.cases:
        print(
            f"ex{result.example} alpha={case.alpha:g} lambda={case.lam:g} "
            f"gamma={case.gamma:g} M={case.M} -> {case.surface_csv}, {case.curve_csv}"
        )
    if config.out is None:
        print("# no --out given: surfaces computed but not written", file=sys.stderr)
    return EXIT_OK


def _cmd_soe_check(args: argparse.Namespace) -> int:
    if not (0.0 < args.delta < args.T):
        raise CliError(f"require 0 < delta < T, got delta={args.delta} T={args.T}")
    report = soe_check(
        args.alpha, args.eps, args.delta, args.T,
        out=Path(args.out) if args.out else None,
    )
    print(report.summary())
    if not report.passed:
        return EXIT_SOE
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _merge(args, parser)
        if args.command == "convergence":
            return _cmd_convergence(args)
        if args.command == "price":
            return _cmd_price(args)
        if args.command == "soe-check":
            return _cmd_soe_check(args)
        raise CliError(f"unknown command {args.command!r}")
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
