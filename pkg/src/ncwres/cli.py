"""Command line front end.

Subcommands: ``wres`` prints the residue of an inverse power, both as a
canonical rendering and as JSON; ``parametrix`` emits the correction
terms and the composition defect; ``verify`` runs the self-check battery
and exits 3 when a check fails; ``oracle-check`` replays symbolic
identities on a concrete representation.  Exit codes: 0 success, 2 bad
usage, 3 failed checks.  Timing always goes to stderr, never into the
JSON, so output bytes depend only on the arguments and the seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .fourier_oracle import FourierElement
from .ncalg import Algebra
from .parametrix import OperatorSpec, laplace_symbol, parametrix_terms
from .randgen import random_assignment
from .serialize import (
    assignment_from_json,
    symbol_to_json,
    trace_expression_to_json,
)
from .trace import format_trace_expression, ibp_reduce, trace, trace_equal
from .verify import run_verification
from .wres import wres_inverse_power


def default_seed() -> int:
    return int(os.environ.get("NCWRES_SEED", "0"))


def build_spec(args) -> OperatorSpec:
    try:
        if args.spec:
            with open(args.spec) as fh:
                data = json.load(fh)
            return OperatorSpec(**data)
        # --flat means the plain flat operator; torsion stays reachable
        # through a spec file for anyone who wants the combination
        return OperatorSpec(
            d=args.d,
            include_t=not (args.no_torsion or args.flat),
            include_x=args.include_x,
            flat=args.flat,
        )
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"ncwres: invalid operator configuration: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _add_operator_flags(sub: argparse.ArgumentParser):
    sub.add_argument("--d", type=int, default=4, help="torus dimension (even)")
    sub.add_argument("--flat", action="store_true", help="freeze the conformal factor at 1")
    sub.add_argument("--no-torsion", action="store_true", help="drop the first-order terms")
    sub.add_argument("--include-x", action="store_true", help="add the order-zero potential")
    sub.add_argument("--spec", help="operator configuration as a JSON file")


def _add_common_flags(sub: argparse.ArgumentParser):
    sub.add_argument("--format", choices=("text", "json"), default="text")
    sub.add_argument("--seed", type=int, default=None, help="override NCWRES_SEED")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncwres",
        description="Exact residue calculus for conformally rescaled torus operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    w = sub.add_parser("wres", help="residue of an inverse power of the operator")
    _add_operator_flags(w)
    _add_common_flags(w)
    w.add_argument("--power", type=int, choices=(1, 2), default=1)
    w.add_argument("--mode", choices=("noncommutative", "commutative"), default="noncommutative")

    p = sub.add_parser("parametrix", help="correction terms and composition defect")
    _add_operator_flags(p)
    _add_common_flags(p)
    p.add_argument("--order", type=int, default=None, help="depth of the recursion")

    v = sub.add_parser("verify", help="run the self-check battery")
    _add_common_flags(v)
    v.add_argument("--d", type=int, default=4)
    # deliberately undocumented: poisons one sphere moment so the
    # battery can demonstrate that it catches a corrupted ingredient
    v.add_argument("--inject-sphere-fault", action="store_true", help=argparse.SUPPRESS)

    o = sub.add_parser("oracle-check", help="replay symbolic identities numerically")
    _add_common_flags(o)
    o.add_argument("--d", type=int, default=3)
    o.add_argument("--oracle-assignment", help="assignment JSON file instead of a seeded one")
    return parser


def _classical_residue(d: int):
    # commutative no-torsion closed form at d = 4, a second-derivative
    # rewrite of the scalar-curvature density for the rescaled metric
    from .ncalg import Scalar
    from .trace import TraceExpression

    alg = Algebra(d)
    out = TraceExpression.zero(d)
    for a in range(1, d + 1):
        dh = alg.h().derive(a)
        out = out + trace(dh * dh)
    return out.scale(Scalar(-2, 2))


def cmd_wres(args) -> int:
    spec = build_spec(args)
    raw = wres_inverse_power(spec, power=args.power)
    commutative = args.mode == "commutative"
    reduced = ibp_reduce(raw, commutative=commutative)
    rendering = format_trace_expression(reduced)
    verdict = None
    if commutative and spec.d == 4 and args.power == 1 and not spec.include_t:
        verdict = trace_equal(reduced, _classical_residue(spec.d), commutative=True)
    if args.format == "json":
        payload = {"expression": trace_expression_to_json(reduced), "rendering": rendering}
        if verdict is not None:
            payload["classical_match"] = verdict
        print(json.dumps(payload, indent=2))
    else:
        print(rendering)
        if verdict is not None:
            print(f"classical scalar-curvature form: {'match' if verdict else 'mismatch'}")
    return 0


def cmd_parametrix(args) -> int:
    spec = build_spec(args)
    order = spec.d - 2 if args.order is None else args.order
    if order < 0:
        print("ncwres: --order must be nonnegative", file=sys.stderr)
        return 2
    res = parametrix_terms(laplace_symbol(spec), order)
    if args.format == "json":
        payload = {
            "terms": [symbol_to_json(term) for term in res.terms],
            "defect": symbol_to_json(res.defect),
        }
        print(json.dumps(payload, indent=2))
    else:
        from .symcalc import format_symbol

        for k, term in enumerate(res.terms):
            print(f"# correction term {k}")
            print(format_symbol(term))
        surviving = res.defect.degrees()
        print(f"# defect degrees: {surviving if surviving else 'none'}")
    return 0


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    t0 = time.perf_counter()
    report = run_verification(
        d=args.d, seed=seed, inject_sphere_fault=args.inject_sphere_fault
    )
    elapsed = time.perf_counter() - t0
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        for check in report["checks"]:
            mark = "PASS" if check["passed"] else "FAIL"
            print(f"{mark} {check['name']}: {check['detail']}")
        if "minimality" in report:
            verdict = "yes" if report["minimality"]["minimal"] else "no"
            print(f"residue-minimal with torsion: {verdict}")
        print("passed" if report["passed"] else "failed")
    print(f"verification took {elapsed:.2f}s", file=sys.stderr)
    return 0 if report["passed"] else 3


def _oracle_battery(asg, d: int) -> list[dict]:
    alg = Algebra(d)
    checks = []

    inv = asg.h_inverse()
    unit_gap = (asg.atoms["h"] * inv.element - FourierElement.one(asg.theta)).norm1()
    checks.append(
        {
            "name": "neumann-inverse",
            "passed": unit_gap < 10 * asg.tol,
            "detail": f"|h h^-1 - 1| = {unit_gap:.3e}, certified tail {inv.tail_bound:.3e}",
        }
    )

    exprs = [
        trace(alg.h() * alg.h().derive(1).derive(1)),
        trace((alg.h() * alg.t(1) * alg.h()).derive(min(2, d))),
        trace(alg.hinv() * alg.h() * alg.x()) - trace(alg.x()),
        trace(alg.h().derive(1) * alg.h()) - trace(alg.h() * alg.h().derive(1)),
    ]
    worst = 0.0
    for e in exprs:
        red = ibp_reduce(e)
        worst = max(
            worst,
            abs(asg.evaluate_trace_expression(e) - asg.evaluate_trace_expression(red)),
        )
    checks.append(
        {
            "name": "reduced-identities",
            "passed": worst < 1e-8,
            "detail": f"worst deviation {worst:.3e} across {len(exprs)} identities",
        }
    )

    from .fourier_oracle import gamma_sum_evaluation
    from .symcalc import Symbol, symbol_product

    p = Symbol.from_poly(alg.h(), alpha=(1,) + (0,) * (d - 1))
    q = Symbol.from_poly(alg.t(1), alpha=(0, 1) + (0,) * (d - 2))
    prod = symbol_product(p, q, min_degree=0)
    xi = tuple(0.5 + 0.25 * i for i in range(d))
    gap = (
        asg.evaluate_symbol(prod, xi) - gamma_sum_evaluation(asg, p, q, 0, xi)
    ).norm1()
    checks.append(
        {
            "name": "symbol-product",
            "passed": gap < 1e-8,
            "detail": f"symbolic composition vs direct gamma sum differ by {gap:.3e}",
        }
    )
    return checks


def cmd_oracle_check(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    if args.oracle_assignment:
        with open(args.oracle_assignment) as fh:
            asg = assignment_from_json(json.load(fh))
        d = asg.d
    else:
        d = args.d
        asg = random_assignment(d, seed)
    checks = _oracle_battery(asg, d)
    passed = all(c["passed"] for c in checks)
    if args.format == "json":
        print(json.dumps({"seed": seed, "d": d, "checks": checks, "passed": passed}, indent=2))
    else:
        for check in checks:
            mark = "PASS" if check["passed"] else "FAIL"
            print(f"{mark} {check['name']}: {check['detail']}")
        print("passed" if passed else "failed")
    return 0 if passed else 3


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    handlers = {
        "wres": cmd_wres,
        "parametrix": cmd_parametrix,
        "verify": cmd_verify,
        "oracle-check": cmd_oracle_check,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
