"""Command-line entry points.

Exit codes: 0 = success and all checks passed; 1 = a verification failed
(the report is still emitted); 2 = usage or input error.  Human-readable
summaries go to stdout; canonical JSON goes to --out when given.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import bondal, gensys, ioschema
from .divisors import class_group, div_scale
from .fan import (
    Fan,
    has_codim_ge2_strata,
    is_complete,
    is_smooth,
    stellar_subdivision,
    validate_fan,
)
from .thomsen import NoStabilization, frobenius_cube, frobenius_lattice, thomsen_collection


def _parse_cone(text):
    try:
        return tuple(sorted({int(t) for t in text.split(",")}))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ray indices, got {text!r}")


def _parse_rat(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational like 1/2, got {text!r}")


def _emit(obj, out_path):
    if out_path:
        ioschema.dump(obj, out_path)
    else:
        sys.stdout.write(ioschema.dumps_canonical(obj))


def _cmd_fan_check(args):
    f = ioschema.fan_from_json(ioschema.load(args.fan))
    report = {
        "smooth": is_smooth(f),
        "complete": is_complete(f),
        "codim_ge2_strata": has_codim_ge2_strata(f),
        "violations": [],
    }
    print(f"rank {f.rank}, {len(f.rays)} rays, {len(f.max_cones)} maximal cones")
    print(f"smooth: {report['smooth']}  complete: {report['complete']}  codim>=2 strata: {report['codim_ge2_strata']}")
    if args.out:
        ioschema.dump(report, args.out)
    return 0


def _cmd_fan_blowup(args):
    f = ioschema.fan_from_json(ioschema.load(args.fan))
    sub = stellar_subdivision(f, args.cone)
    print(f"exceptional ray id {sub.new_ray_id}, generator {sub.fan.rays[sub.new_ray_id]}")
    _emit({"fan": ioschema.fan_to_json(sub.fan), "exceptional_ray": sub.new_ray_id}, args.out)
    return 0


def _cmd_thomsen(args):
    f = ioschema.fan_from_json(ioschema.load(args.fan))
    d = ioschema.qdivisor_from_json(ioschema.load(args.c)) if args.c else {}
    try:
        coll = thomsen_collection(f, d, budget=args.budget)
    except NoStabilization as exc:
        print(str(exc), file=sys.stderr)
        return 1
    classes = [str(c) for c in coll.sorted_classes()]
    print(f"{len(classes)} classes at denominator {coll.m_used}: {' '.join(classes)}")
    _emit({"classes": classes, "m_used": coll.m_used, "evidence": list(coll.stabilization_evidence)}, args.out)
    return 0


def _cmd_frobenius(args):
    f = ioschema.fan_from_json(ioschema.load(args.fan))
    d = ioschema.qdivisor_from_json(ioschema.load(args.c)) if args.c else {}
    bundle = div_scale(args.m, d)
    if any(c.denominator != 1 for c in bundle.values()):
        print("m times the divisor must be integral", file=sys.stderr)
        return 2
    group = class_group(f)
    tables = {}
    if args.method in ("cube", "both"):
        dec = frobenius_cube(f, args.m, {i: int(c) for i, c in bundle.items()}, group)
        tables["cube"] = {str(c): k for c, k in dec.sorted_items()}
    if args.method in ("lattice", "both"):
        dec = frobenius_lattice(f, args.m, d, group)
        tables["lattice"] = {str(c): k for c, k in dec.sorted_items()}
    agree = args.method != "both" or tables["cube"] == tables["lattice"]
    for name, table in sorted(tables.items()):
        pretty = ", ".join(f"{c}:{k}" for c, k in sorted(table.items()))
        print(f"{name}: {{{pretty}}} (total {sum(table.values())})")
    if args.method == "both":
        print(f"methods agree: {agree}")
    _emit({"m": args.m, "tables": tables, "agree": agree}, args.out)
    return 0 if agree else 1


def _cmd_gensys_resolve(args):
    gs = ioschema.system_from_json(ioschema.load(args.system))
    cert = gensys.resolve(gs)
    violations = gensys.verify_certificate(cert, gs)
    assert not violations, violations
    leaves = sum(1 for n in cert.nodes.values() if isinstance(n, gensys.Leaf))
    print(f"certificate with {len(cert.nodes)} nodes ({leaves} leaves) verifies")
    _emit(ioschema.certificate_to_json(cert), args.out)
    return 0


def _cmd_gensys_verify(args):
    cert = ioschema.certificate_from_json(ioschema.load(args.certificate))
    gs = ioschema.system_from_json(ioschema.load(args.system))
    violations = gensys.verify_certificate(cert, gs)
    for v in violations:
        print(v, file=sys.stderr)
    print("certificate accepted" if not violations else f"certificate rejected ({len(violations)} violations)")
    return 0 if not violations else 1


def _cmd_bondal_run(args):
    inst = ioschema.instance_from_json(ioschema.load(args.instance))
    report = bondal.bondal_pipeline(inst, args.grid)
    print(f"eq1: {report.eq1_total - len(report.eq1_failures)}/{report.eq1_total} grid points pass")
    print(f"claim2: {sum(1 for r in report.claim2_records if r.checks.ok)}/{len(report.claim2_records)} admissible points pass")
    print(f"d-window: achieved {sorted(report.d_values)}, expected {sorted(report.d_window_expected)}")
    print(f"restriction tests: {sum(1 for r in report.restriction_records if r.ok)}/{len(report.restriction_records)} pass")
    print(f"overall: {'ok' if report.ok else 'FAILED'}")
    if args.out:
        ioschema.dump(ioschema.report_to_json(report), args.out)
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toricgen", description="Exact toric fans, Frobenius splittings, and generation certificates.")
    sub = parser.add_subparsers(dest="command", required=True)

    fan = sub.add_parser("fan", help="fan inspection and blow-up")
    fan_sub = fan.add_subparsers(dest="subcommand", required=True)
    p = fan_sub.add_parser("check", help="validate a fan and report its properties")
    p.add_argument("fan")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fan_check)
    p = fan_sub.add_parser("blowup", help="stellar subdivision at a cone")
    p.add_argument("fan")
    p.add_argument("--cone", type=_parse_cone, required=True, metavar="i,j,...")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fan_blowup)

    p = sub.add_parser("thomsen", help="stabilized floor-divisor class collection")
    p.add_argument("fan")
    p.add_argument("--c", help="Q-divisor JSON file")
    p.add_argument("--budget", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_thomsen)

    p = sub.add_parser("frobenius", help="pushforward splitting multiplicities")
    p.add_argument("fan")
    p.add_argument("-m", type=int, required=True)
    p.add_argument("--method", choices=("cube", "lattice", "both"), default="both")
    p.add_argument("--c", help="Q-divisor JSON file (m times it must be integral)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_frobenius)

    g = sub.add_parser("gensys", help="generating systems and certificates")
    g_sub = g.add_subparsers(dest="subcommand", required=True)
    p = g_sub.add_parser("resolve", help="produce a generation certificate")
    p.add_argument("system")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gensys_resolve)
    p = g_sub.add_parser("verify", help="check a certificate against a system")
    p.add_argument("certificate")
    p.add_argument("system")
    p.set_defaults(func=_cmd_gensys_verify)

    b = sub.add_parser("bondal", help="blow-up twist pipeline")
    b_sub = b.add_subparsers(dest="subcommand", required=True)
    p = b_sub.add_parser("run", help="run all grid checks on an instance")
    p.add_argument("instance")
    p.add_argument("--grid", type=int, default=4)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bondal_run)

    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (ioschema.SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
