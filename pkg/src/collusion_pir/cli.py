"""Batch command line: JSON in, JSON out.

Exit status is 0 on success, 1 when a verification fails and 2 on malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .construct import (
    construct_cyclic,
    optimal_message_size,
    prior_message_size,
    sigma_2x2,
)
from .errors import BudgetExhausted, CollusionPirError, NotDivisible
from .family import (
    build_minimal_family,
    closed_form_bound,
    hitting_number,
    is_hitting_set,
    message_size_lower_bound,
    no_smaller_hitting_set,
)
from .lp import capacity, check_fractional_covering, reduce_by_support, solve_covering, solve_packing
from .pattern import (
    ENUMERATION_CAP,
    gen_cyclic_contiguous,
    gen_disjoint,
    gen_t_collusion,
    incidence_matrix,
    make_pattern,
    pattern_from_json,
)
from .scheme import scheme_from_json, scheme_to_json
from .verify import verify_capacity_achieving

EXIT_OK, EXIT_FAILED, EXIT_BAD_INPUT = 0, 1, 2

IVC_SETS = [[0, 1, 2], [0, 3], [1, 3], [2, 3], [4]]
IVC_X_STAR = [Fraction(2, 3), Fraction(1, 3), Fraction(1, 3), Fraction(1, 3), Fraction(1)]


class InputError(Exception):
    pass


def _frac(v) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path}: {exc}") from None


def _load_pattern(path: str, cap: int | None):
    return pattern_from_json(_read_json(path), cap)


def _capacity_report(p, K: int) -> dict:
    cover = solve_covering(p)
    pack = solve_packing(p)
    s = pack.optimal_value
    return {
        "pattern": p.to_json(),
        "s_star": _frac(s),
        "x_star": [_frac(v) for v in cover.point],
        "y_star": [_frac(v) for v in pack.point],
        "K": K,
        "capacity": _frac(capacity(s, K)),
    }


def _family_report(p, cap: int | None) -> dict:
    fam = build_minimal_family(p, cap)
    hit = hitting_number(fam)
    return {
        "minimal_family": fam.to_json()["minimal_sets"],
        "alpha": hit.alpha,
        "witness": list(hit.witness),
        "certified": hit.certified and no_smaller_hitting_set(fam, hit.alpha),
    }


def cmd_gen(args) -> tuple[dict, int]:
    if args.kind == "t-collusion":
        p = gen_t_collusion(args.N, args.T)
    elif args.kind == "cyclic":
        p = gen_cyclic_contiguous(args.N, args.T)
    else:
        p = gen_disjoint(args.Ns, args.Ts, "full" if args.kind == "disjoint-full" else "cyclic")
    return p.to_json(), EXIT_OK


def cmd_capacity(args):
    return _capacity_report(_load_pattern(args.pattern, args.cap), args.K), EXIT_OK


def cmd_family(args):
    p = _load_pattern(args.pattern, args.cap)
    return {"pattern": p.to_json(), **_family_report(p, args.cap)}, EXIT_OK


def cmd_bound(args):
    p = _load_pattern(args.pattern, args.cap)
    fam = _family_report(p, args.cap)
    return {
        "alpha": fam["alpha"],
        "y": args.y,
        "bound_bits": _frac(message_size_lower_bound(p, args.y)),
        "bound_y_symbols": fam["alpha"],
    }, EXIT_OK


def cmd_closed_form(args):
    if args.kind in ("t_collusion", "cyclic"):
        if len(args.params) != 2:
            raise InputError(f"{args.kind} takes N T")
        params = [int(v) for v in args.params]
    else:
        if len(args.params) != 2:
            raise InputError(f"{args.kind} takes Ns Ts as comma lists")
        params = [_int_list(v) for v in args.params]
    return {"kind": args.kind, "params": params, "alpha": closed_form_bound(args.kind, *params)}, EXIT_OK


def cmd_verify(args):
    scheme = scheme_from_json(_read_json(args.scheme))
    p = _load_pattern(args.pattern, args.cap)
    report = verify_capacity_achieving(scheme, p, args.K)
    return report.to_json(), EXIT_OK if report.all_passed else EXIT_FAILED


def _descriptor(args):
    if args.cyclic:
        return "cyclic", tuple(args.cyclic)
    if args.disjoint_cyclic:
        return "disjoint_cyclic", (_int_list(args.disjoint_cyclic[0]), _int_list(args.disjoint_cyclic[1]))
    raise InputError("give --cyclic N T or --disjoint-cyclic Ns Ts")


def cmd_construct(args):
    kind, params = _descriptor(args)
    try:
        scheme, p = construct_cyclic(kind, *params, K=args.K, y_modulus=args.modulus, budget=args.search_budget)
    except BudgetExhausted as exc:
        return {"found": False, "reason": str(exc)}, EXIT_FAILED
    report = verify_capacity_achieving(scheme, p)
    out = {"found": True, "pattern": p.to_json(), "scheme": scheme_to_json(scheme), "report": report.to_json()}
    return out, EXIT_OK if report.all_passed else EXIT_FAILED


def cmd_prior_size(args):
    kind, params = _descriptor(args)
    prior = prior_message_size(kind, *params, args.K)
    optimal = closed_form_bound(kind, *params)
    try:
        achieved = optimal_message_size(kind, *params) == optimal
    except NotDivisible:
        achieved = False
    return {
        "kind": kind,
        "params": list(params),
        "K": args.K,
        "prior_L": prior,
        "optimal_symbols": optimal,
        "optimum_achievable": achieved,
        "ratio": _frac(Fraction(prior, optimal)) if optimal else None,
    }, EXIT_OK


def cmd_fixture(args):
    return scheme_to_json(sigma_2x2()), EXIT_OK


def example_ivc_report(K: int = 2) -> dict:
    p = make_pattern(5, IVC_SETS)
    cov = solve_covering(p)
    problem_value = sum(IVC_X_STAR)
    covering = check_fractional_covering(p, IVC_X_STAR)
    reduced, removed = reduce_by_support(p)
    fam = build_minimal_family(p)
    hit = hitting_number(fam)
    return {
        "pattern": p.to_json(),
        "incidence": [list(r) for r in incidence_matrix(p)],
        "s_star": _frac(cov.optimal_value),
        "printed_x_star": [_frac(v) for v in IVC_X_STAR],
        "printed_x_star_feasible": covering.valid,
        "printed_x_star_optimal": covering.valid and problem_value == cov.optimal_value,
        "reduced_unchanged": reduced == p and not removed,
        "capacity": _frac(capacity(cov.optimal_value, K)),
        "K": K,
        "minimal_family": [list(s) for s in fam.minimal_sets],
        "alpha": hit.alpha,
        "witness": list(hit.witness),
        "witness_1_4_hits": is_hitting_set(fam, [1, 4]),
    }


def cmd_example_ivc(args):
    return example_ivc_report(args.K), EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="collusion-pir", description=__doc__.splitlines()[0])
    parser.add_argument("--cap", type=int, default=ENUMERATION_CAP, help="enumeration cap on N (0 disables)")
    parser.add_argument("--output", "-o", help="write JSON here instead of standard output")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="emit a pattern from a generator")
    g.add_argument("kind", choices=["t-collusion", "cyclic", "disjoint-full", "disjoint-cyclic"])
    g.add_argument("--N", type=int)
    g.add_argument("--T", type=int)
    g.add_argument("--Ns", type=_int_list)
    g.add_argument("--Ts", type=_int_list)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("capacity", help="S*, optimal covering and packing points, capacity")
    c.add_argument("pattern")
    c.add_argument("--K", type=int, required=True)
    c.set_defaults(func=cmd_capacity)

    f = sub.add_parser("family", help="minimal family, hitting number and witness")
    f.add_argument("pattern")
    f.set_defaults(func=cmd_family)

    b = sub.add_parser("bound", help="message-size lower bound")
    b.add_argument("pattern")
    b.add_argument("--y", type=int, required=True, help="answer alphabet size |Y|")
    b.set_defaults(func=cmd_bound)

    cf = sub.add_parser("closed-form", help="closed-form hitting number of a pattern class")
    cf.add_argument("kind", choices=["t_collusion", "disjoint_full", "cyclic", "disjoint_cyclic"])
    cf.add_argument("params", nargs="+")
    cf.set_defaults(func=cmd_closed_form)

    v = sub.add_parser("verify", help="verify a scheme against a pattern")
    v.add_argument("scheme")
    v.add_argument("pattern")
    v.add_argument("--K", type=int)
    v.set_defaults(func=cmd_verify)

    for name, func in (("construct", cmd_construct), ("prior-size", cmd_prior_size)):
        s = sub.add_parser(name)
        grp = s.add_mutually_exclusive_group(required=True)
        grp.add_argument("--cyclic", nargs=2, type=int, metavar=("N", "T"))
        grp.add_argument("--disjoint-cyclic", nargs=2, metavar=("NS", "TS"))
        s.add_argument("--K", type=int, default=2)
        if name == "construct":
            s.add_argument("--search-budget", type=int, default=100_000)
            s.add_argument("--modulus", type=int, default=2)
        s.set_defaults(func=func)

    fx = sub.add_parser("fixture", help="emit the two-server two-message example scheme")
    fx.set_defaults(func=cmd_fixture)

    ex = sub.add_parser("example-ivc", help="worked five-server example as one report")
    ex.add_argument("--K", type=int, default=2)
    ex.set_defaults(func=cmd_example_ivc)
    return parser


def _check_gen_args(args):
    if args.command != "gen":
        return
    if args.kind in ("t-collusion", "cyclic") and (args.N is None or args.T is None):
        raise InputError(f"{args.kind} needs --N and --T")
    if args.kind.startswith("disjoint") and (args.Ns is None or args.Ts is None):
        raise InputError(f"{args.kind} needs --Ns and --Ts")


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code else EXIT_OK
    if args.cap == 0:
        args.cap = None
    try:
        _check_gen_args(args)
        payload, code = args.func(args)
    except (InputError, CollusionPirError) as exc:
        payload, code = {"error": type(exc).__name__, "message": str(exc)}, EXIT_BAD_INPUT
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
