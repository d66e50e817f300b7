"""
Command-line front end: single-point steady states, sweeps, counting
statistics, optomechanical mapping and design helpers.

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical
failures of single-point commands (unstable system, counting field outside
the admissible region).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys as _sys

from .cascaded import (
    CascadedParams,
    InvalidParamsError,
    UnstableSystemError,
    UnsupportedParamsError,
    build_system,
    delta_n,
    steady_state,
)
from .counting import (
    OutsideAdmissibleRegionError,
    ZeroRateChannelError,
    flow_cumulant,
    flow_first_moment,
    large_deviation,
)
from .linalg import NoConvergenceError, solve_lyapunov, stability_margin
from .optomech import (
    NoCouplingError,
    OmParams,
    design_nonreciprocal,
    map_to_cascaded,
    preset_microwave,
)
from .sweeps import (
    NegativeOccupationError,
    SchemaError,
    convert_mbar,
    emit,
    parse_config,
    run_sweep,
)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _parse_sets(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise SchemaError(f"expected name=value, got {pair!r}")
        name, _, value = pair.partition("=")
        try:
            out[name] = complex(value) if name == "F" else float(value)
        except ValueError as exc:
            raise SchemaError(f"{name}: not a number: {value!r}") from exc
    return out


def _cascaded_from_sets(pairs: list[str]) -> CascadedParams:
    raw = convert_mbar(_parse_sets(pairs))
    if "Delta" in raw:
        delta = raw.pop("Delta")
        raw["omega2"] = raw.get("omega1", 0.0) + delta
    try:
        return CascadedParams(**raw)
    except TypeError as exc:
        raise SchemaError(str(exc)) from exc


def _om_from_sets(pairs: list[str]) -> OmParams:
    try:
        return OmParams(**_parse_sets(pairs))
    except TypeError as exc:
        raise SchemaError(str(exc)) from exc


def _cmd_steady_state(args: argparse.Namespace) -> int:
    p = _cascaded_from_sets(args.set)
    try:
        report = delta_n(p, numeric=True)
    except UnstableSystemError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_NUMERIC
    except UnsupportedParamsError:
        # baseline undefined for unequal rates; report occupations only
        from .cascaded import occupations

        n1, n2 = occupations(steady_state(p))
        print(json.dumps({"n1": n1, "n2": n2}, indent=2))
        return 0
    print(
        json.dumps(
            {
                "n1": report.n1,
                "n2": report.n2,
                "m1": report.m1,
                "m2": report.m2,
                "dn1": report.dn1,
                "dn2": report.dn2,
            },
            indent=2,
        )
    )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    if args.format:
        cfg = dataclasses.replace(cfg, format=args.format)
    if args.parallel:
        cfg = dataclasses.replace(cfg, parallel=True)
    data = emit(run_sweep(cfg), cfg)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        _sys.stdout.buffer.write(data)
    return 0


def _cmd_fcs(args: argparse.Namespace) -> int:
    p = _cascaded_from_sets(args.set)
    try:
        sys = build_system(p)
        V = steady_state(p)
        import numpy as np

        s_values = np.linspace(args.s_min, args.s_max, args.s_points)
        samples = [
            {"s": float(s), "theta": large_deviation(args.channel, float(s), sys, V)}
            for s in s_values
        ]
        result = {
            "channel": args.channel,
            "theta": samples,
            "eta1_trace": flow_first_moment(args.channel, sys, V),
            "cumulants": {
                str(n): flow_cumulant(args.channel, n, sys, V) for n in (1, 2)
            },
        }
    except (
        UnstableSystemError,
        OutsideAdmissibleRegionError,
        ZeroRateChannelError,
        NoConvergenceError,
    ) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(result, indent=2))
    return 0


def _om_dict(p: OmParams) -> dict:
    return {k: v for k, v in dataclasses.asdict(p).items() if v is not None}


def _cmd_map_om(args: argparse.Namespace) -> int:
    p = _om_from_sets(args.set)
    cp = map_to_cascaded(p)
    out = {f.name: getattr(cp, f.name) for f in dataclasses.fields(cp)}
    out["F"] = [out["F"].real, out["F"].imag]
    out["F_residual"] = abs(complex(cp.F))
    print(json.dumps(out, indent=2))
    return 0


def _cmd_design(args: argparse.Namespace) -> int:
    p = _om_from_sets(args.set)
    try:
        d = design_nonreciprocal(p)
    except NoCouplingError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_NUMERIC
    print(
        json.dumps(
            {"j_star": d.j_star, "phi_star": d.phi_star, "residual": d.residual},
            indent=2,
        )
    )
    return 0


def _cmd_preset(args: argparse.Namespace) -> int:
    if args.name != "microwave":
        raise SchemaError(f"unknown preset {args.name!r}")
    p = preset_microwave()
    out = _om_dict(p)
    if args.mapped:
        cp = map_to_cascaded(p)
        mapped = {f.name: getattr(cp, f.name) for f in dataclasses.fields(cp)}
        mapped["F"] = [mapped["F"].real, mapped["F"].imag]
        out = {"preset": out, "mapped": mapped}
    print(json.dumps(out, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisecascade",
        description="Non-reciprocal thermal-noise transport simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ss = sub.add_parser("steady-state", help="single-point occupations")
    ss.add_argument("--set", action="append", default=[], metavar="NAME=VALUE")
    ss.set_defaults(func=_cmd_steady_state)

    sw = sub.add_parser("sweep", help="run a sweep from a JSON config")
    sw.add_argument("config")
    sw.add_argument("--format", choices=("csv", "json"), default=None)
    sw.add_argument("--out", default=None)
    sw.add_argument("--parallel", action="store_true")
    sw.set_defaults(func=_cmd_sweep)

    fc = sub.add_parser("fcs", help="counting statistics for one channel")
    fc.add_argument("channel", type=int, choices=(1, 2, 3))
    fc.add_argument("--set", action="append", default=[], metavar="NAME=VALUE")
    fc.add_argument("--s-min", type=float, default=-0.01)
    fc.add_argument("--s-max", type=float, default=0.01)
    fc.add_argument("--s-points", type=int, default=11)
    fc.set_defaults(func=_cmd_fcs)

    mo = sub.add_parser("map-om", help="map optomechanical to cascaded parameters")
    mo.add_argument("--set", action="append", default=[], metavar="NAME=VALUE")
    mo.set_defaults(func=_cmd_map_om)

    de = sub.add_parser("design", help="non-reciprocity design point")
    de.add_argument("--set", action="append", default=[], metavar="NAME=VALUE")
    de.set_defaults(func=_cmd_design)

    pr = sub.add_parser("preset", help="print a named parameter preset")
    pr.add_argument("name")
    pr.add_argument("--mapped", action="store_true")
    pr.set_defaults(func=_cmd_preset)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, NegativeOccupationError, InvalidParamsError, OSError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
