"""Command line front end.

Subcommands:
    sample     run a seeded experiment, write a report (JSON) or histogram (CSV)
    theory     evaluate the reference laws for an architecture
    commutant  enumerate moment-space data for a given order k
    doped      run a doped experiment and judge it against its exact reference
    fit        fit the one-parameter deficit family to a histogram CSV
    validate   run the acceptance battery

Exit codes: 0 success, 1 a validation verdict failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys

from . import acceptance, commutant, experiments, theory
from .architectures import KINDS, RESOURCES, ArchitectureSpec, DopingSpec
from .experiments import (
    ExperimentConfig,
    frame_potential_observable,
    g_histogram,
    ipr_observable,
    run,
)


def _add_common(p, *, samples_default=10_000):
    p.add_argument("--arch", choices=KINDS, default="global")
    p.add_argument("--n", type=int, required=True, help="qubit count")
    p.add_argument("--r", type=int, default=0, help="staircase window parameter")
    p.add_argument("--t", type=int, default=0, help="brickwork depth")
    p.add_argument("--dope", default="none",
                   help="resource or resource:count, e.g. T_state:2")
    p.add_argument("--k", type=int, nargs="+", help="moment orders")
    p.add_argument("--samples", type=int, default=samples_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="json")


def _arch(args) -> ArchitectureSpec:
    return ArchitectureSpec(args.arch, args.n, r=args.r, t=args.t)


def _doping(text: str) -> DopingSpec:
    if ":" in text:
        resource, _, count = text.partition(":")
        try:
            r_doped = int(count)
        except ValueError:
            raise ValueError(f"doping count must be an integer, got {count!r}")
    else:
        resource, r_doped = text, (0 if text == "none" else 1)
    if resource not in RESOURCES:
        raise ValueError(f"unknown doping resource {resource!r}")
    return DopingSpec(resource, r_doped)


def _observable(args):
    name = getattr(args, "observable", "g")
    if name == "g":
        return g_histogram()
    ks = tuple(args.k or (2,))
    if name == "ipr":
        return ipr_observable(*ks)
    return frame_potential_observable(*ks)


def _reference_tag(spec: ArchitectureSpec, doping: DopingSpec):
    """Closed-form participation law matching an architecture, if any."""
    if doping.resource in ("PlusI", "MinusI") and doping.r_doped > 0:
        return theory.COMPLEX_CLIFFORD
    if doping.resource != "none" and doping.r_doped > 0:
        return theory.doped_staircase(doping.resource)
    return {
        "global": theory.REAL_CLIFFORD,
        "staircase": theory.STAIRCASE_REAL,
        "glued": theory.GLUED_REAL,
    }.get(spec.kind)


def _open_out(args):
    return open(args.out, "w", newline="") if args.out else None


def _emit_json(payload, args) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_sample(args) -> int:
    cfg = ExperimentConfig(
        architecture=_arch(args),
        observable=_observable(args),
        samples=args.samples,
        seed=args.seed,
        workers=args.workers,
        doping=_doping(args.dope),
        engine=args.engine,
    )
    report = run(cfg)
    if args.format == "json":
        if args.out:
            experiments.write_report_json(report, args.out)
        else:
            print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
        return 0
    if report.observable_kind != "g_histogram":
        raise ValueError("CSV output is the histogram schema; "
                         "moment runs emit JSON reports")
    tag = _reference_tag(report.architecture, report.doping)
    if tag is None:
        raise ValueError("no closed-form law for this architecture; "
                         "write JSON and use the fit subcommand")
    table = experiments.reference_g_pmf(tag, report.architecture)
    if not args.out:
        raise ValueError("CSV output needs --out")
    experiments.write_histogram_csv(report, table, args.out)
    return 0


def _cmd_theory(args) -> int:
    spec = _arch(args)
    doping = _doping(args.dope)
    tag = _reference_tag(spec, doping)
    if tag is None:
        raise ValueError(f"no closed-form law for architecture {spec.kind!r}")
    table = experiments.reference_g_pmf(tag, spec)
    payload = {
        "ensemble": dataclasses.asdict(tag),
        "architecture": dataclasses.asdict(spec),
        "pmf": {str(g): p for g, p in table.rows()},
    }
    if args.k:
        payload["ipr"] = {
            str(k): experiments.reference_moment(tag, k, spec, doping)
            for k in args.k
        }
        try:
            payload["frame_potential"] = {
                str(k): float(theory.frame_potential(tag, k, spec.n))
                for k in args.k
            }
        except ValueError:
            # only the group ensembles have a closed-form frame potential
            pass
    if args.format == "json":
        _emit_json(payload, args)
        return 0
    fh = _open_out(args) or sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(["g", "probability", "ensemble"])
        for g, p in table.rows():
            writer.writerow([g, repr(p), tag.kind])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def _poly_str(poly) -> str:
    """Human-readable polynomial in d, highest degree first."""
    terms = []
    for power in range(len(poly.coeffs) - 1, -1, -1):
        c = poly.coeffs[power]
        if c == 0:
            continue
        if power == 0:
            terms.append(str(c))
        else:
            var = "d" if power == 1 else f"d^{power}"
            terms.append(var if c == 1 else f"{c}*{var}")
    return " + ".join(terms) or "0"


def _cmd_commutant(args) -> int:
    ks = args.k or [2]
    rows = []
    for k in ks:
        for flavor in commutant.FLAVORS:
            if k > commutant.ENUM_GUARD[flavor]:
                continue
            subs = commutant.enumerate_lagrangians(k, flavor)
            row = {
                "k": k,
                "flavor": flavor,
                "count": len(subs),
                "count_formula": commutant.expected_count(k, flavor),
                "gram_row_sum": _poly_str(commutant.gram_row_sum_poly(k, flavor)),
            }
            if flavor == "real":
                row["real_magic_invariant_subset"] = len(commutant.theta_subset(k))
            rows.append(row)
    if args.format == "json":
        _emit_json(rows, args)
        return 0
    fh = _open_out(args) or sys.stdout
    try:
        names = ["k", "flavor", "count", "count_formula", "gram_row_sum",
                 "real_magic_invariant_subset"]
        writer = csv.DictWriter(fh, fieldnames=names)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def _cmd_doped(args) -> int:
    doping = _doping(args.dope)
    if doping.resource == "none":
        raise ValueError("doped runs need --dope resource[:count]")
    spec = _arch(args)
    cfg = ExperimentConfig(
        architecture=spec,
        observable=_observable(args),
        samples=args.samples,
        seed=args.seed,
        workers=args.workers,
        doping=doping,
        engine=args.engine,
    )
    report = run(cfg)
    tag = _reference_tag(spec, doping)
    verdicts = experiments.compare(report, tag)
    payload = {
        "report": report.to_dict(),
        "verdicts": [dataclasses.asdict(v) for v in verdicts],
    }
    if args.format == "json":
        _emit_json(payload, args)
    else:
        fh = _open_out(args) or sys.stdout
        try:
            writer = csv.writer(fh)
            writer.writerow(["metric", "value", "threshold", "passed", "detail"])
            for v in verdicts:
                writer.writerow([v.metric, v.value, v.threshold, v.passed,
                                 v.detail])
        finally:
            if fh is not sys.stdout:
                fh.close()
    return 0 if all(v.passed for v in verdicts) else 1


def _cmd_fit(args) -> int:
    counts = experiments.read_histogram_csv(args.histogram)
    n = args.n
    if n is None:
        with open(args.histogram) as fh:
            row = next(csv.DictReader(fh), None)
        if row and "param_n" in row:
            n = int(row["param_n"])
        else:
            raise ValueError("histogram lacks a param_n column; pass --n")
    deficits = {n - g: c for g, c in counts.items()}
    fit = theory.fit_scaling_x(deficits)
    payload = {
        "x": fit.x,
        "chi_square": fit.chi_square,
        "dof": fit.dof,
        "bins": fit.bins,
        "chi_square_per_dof": fit.chi_square_per_dof,
    }
    _emit_json(payload, args)
    return 0


def _cmd_validate(args) -> int:
    fh = open(args.out, "w") if args.out else sys.stdout
    try:
        suite = acceptance.validate_all(scale=args.scale, stream=fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0 if suite.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="realclifford",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="run a seeded experiment")
    _add_common(p)
    p.add_argument("--observable", choices=("g", "ipr", "frame"), default="g")
    p.add_argument("--engine", choices=experiments.ENGINES, default="auto")
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("theory", help="evaluate reference laws")
    _add_common(p)
    p.set_defaults(fn=_cmd_theory)

    p = sub.add_parser("commutant", help="moment-space data for order k")
    p.add_argument("--k", type=int, nargs="+")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(fn=_cmd_commutant)

    p = sub.add_parser("doped", help="doped run judged against its reference")
    _add_common(p, samples_default=3000)
    p.add_argument("--observable", choices=("g", "ipr", "frame"), default="ipr")
    p.add_argument("--engine", choices=experiments.ENGINES, default="auto")
    p.set_defaults(fn=_cmd_doped)

    p = sub.add_parser("fit", help="fit the deficit family to a histogram CSV")
    p.add_argument("histogram", help="CSV written by the sample subcommand")
    p.add_argument("--n", type=int, help="qubit count (default: param_n column)")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(fn=_cmd_fit)

    p = sub.add_parser("validate", help="run the acceptance battery")
    p.add_argument("--scale", type=float, default=1.0,
                   help="sample-count multiplier (1.0 = full battery)")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
