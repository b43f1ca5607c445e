"""Command-line front door: compute, render, verify, and fill-out analysis.

Exit codes: 0 success, 2 rejected input (message names the offending
flag), 1 runtime failure. Identical invocations produce byte-identical
output files regardless of --threads.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import NotCoprime, NotDivisor, TooLarge, ValidationError
from .fillout import applicability_check, coverage, laurent_map
from .periods import (
    ColoringMode,
    PeriodParams,
    compute_period_set,
    dihedral_order,
    period_value,
    rescale_identity_check,
    verify_dihedral,
)
from .render import RenderSpec, export_layers, render_to_file

_FLAG_HINTS = {
    NotCoprime: "--omega",
    NotDivisor: "--c",
    TooLarge: "--n",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="modulus (positive integer)")
    p.add_argument("--omega", type=int, required=True, help="generator, a unit mod n")
    p.add_argument("--c", type=int, default=1, help="coloring modulus, must divide n")
    p.add_argument(
        "--mode",
        choices=[m.value for m in ColoringMode],
        default=ColoringMode.STANDARD.value,
        help="coloring mode",
    )
    p.add_argument("--threads", type=int, default=None, help="worker threads (output is identical regardless)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussian-periods",
        description="Compute, render and verify Gaussian-period point sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="write the orbit table as CSV or JSON")
    _add_common(p)
    p.add_argument("--out", default="-", help="output path (.csv or .json); '-' for stdout CSV")

    p = sub.add_parser("render", help="rasterize to PNG (plus optional per-class layers)")
    _add_common(p)
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--width", type=int, default=1000)
    p.add_argument("--height", type=int, default=1000)
    p.add_argument("--point-radius", type=int, default=2)
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--layers-dir", default=None, help="also write layer_<class>.png files here")

    p = sub.add_parser("verify", help="check symmetry and rescaling laws; JSON report")
    _add_common(p)
    p.add_argument("--out", default="-", help="report path; '-' for stdout")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0, help="seed for spot-check sampling")
    p.add_argument("--spot-checks", type=int, default=8)

    p = sub.add_parser("fillout", help="coverage of the torus-map image; JSON report")
    _add_common(p)
    p.add_argument("--out", default="-", help="report path; '-' for stdout")
    p.add_argument("--epsilon", type=float, default=0.15)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", choices=["grid", "random"], default="grid")

    return parser


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _cmd_compute(args) -> int:
    pset = compute_period_set(args.n, args.omega, args.c, ColoringMode(args.mode))
    if args.out == "-":
        pset.to_csv(sys.stdout)
    elif args.out.endswith(".json"):
        pset.to_json(args.out)
    else:
        pset.to_csv(args.out)
    return 0


def _cmd_render(args) -> int:
    if args.width < 1 or args.height < 1:
        raise ValidationError("--width/--height: dimensions must be positive")
    pset = compute_period_set(args.n, args.omega, args.c, ColoringMode(args.mode))
    spec = RenderSpec(
        width=args.width,
        height=args.height,
        margin=args.margin,
        point_radius=args.point_radius,
    )
    render_to_file(pset, spec, args.out, threads=args.threads)
    if args.layers_dir:
        export_layers(pset, spec, args.layers_dir, threads=args.threads)
    return 0


def _cmd_verify(args) -> int:
    pset = compute_period_set(args.n, args.omega, args.c, ColoringMode(args.mode))
    params = pset.params
    fold = dihedral_order(args.n, args.omega)
    report = verify_dihedral(pset, fold, tol=args.tol)

    rng = np.random.default_rng(args.seed)
    count = min(args.spot_checks, len(pset.reps))
    picks = rng.choice(len(pset.reps), size=count, replace=False)
    oracle_checks = []
    for i in picks:
        rep = int(pset.reps[i])
        err = abs(period_value(params, rep) - complex(pset.values[i]))
        oracle_checks.append({"rep": rep, "abs_error": err})
    rescale_checks = []
    for i in picks:
        k = int(pset.reps[i])
        if k == 0:
            continue
        rc = rescale_identity_check(args.n, args.omega, k, tol=args.tol)
        rescale_checks.append(
            {"k": k, "multiplier": rc.multiplier, "holds": rc.holds, "mismatch": rc.mismatch}
        )

    doc = {
        "n": params.n,
        "omega": params.omega,
        "d": params.d,
        "c": pset.c,
        "mode": pset.mode.value,
        "class_count": pset.class_count,
        "orbit_count": len(pset.reps),
        "partition_ok": bool(pset.sizes.sum() == params.n),
        "dihedral_order": fold,
        "dihedral": {
            "fold": report.fold,
            "holds": report.holds,
            "max_mismatch": report.max_mismatch,
            "tol": args.tol,
        },
        "oracle_spot_checks": oracle_checks,
        "max_oracle_error": max((c["abs_error"] for c in oracle_checks), default=0.0),
        "rescale_checks": rescale_checks,
    }
    ok = (
        doc["partition_ok"]
        and report.holds
        and all(c["abs_error"] <= args.tol for c in oracle_checks)
        and all(c["holds"] for c in rescale_checks)
    )
    doc["holds"] = ok
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_fillout(args) -> int:
    pset = compute_period_set(args.n, args.omega, args.c, ColoringMode(args.mode))
    applic = applicability_check(args.n, args.omega)
    lmap = laurent_map(applic.d)
    rep = coverage(
        pset,
        lmap,
        epsilon=args.epsilon,
        sample_count=args.samples,
        strategy=args.strategy,
        seed=args.seed,
    )
    doc = {
        "n": args.n,
        "omega": pset.params.omega,
        "d": applic.d,
        "arity": lmap.arity,
        "applicability": {
            "is_prime_power": applic.is_prime_power,
            "p": applic.p,
            "a": applic.a,
            "d_divides_p_minus_1": applic.d_divides_p_minus_1,
            "applicable": applic.applicable,
        },
        "coverage": rep.to_dict(),
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


_COMMANDS = {
    "compute": _cmd_compute,
    "render": _cmd_render,
    "verify": _cmd_verify,
    "fillout": _cmd_fillout,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.n is not None and args.n < 1:
        print("error: --n must be a positive integer", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        hint = _FLAG_HINTS.get(type(exc), "")
        prefix = f"{hint}: " if hint and not str(exc).startswith("--") else ""
        print(f"error: {prefix}{exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
