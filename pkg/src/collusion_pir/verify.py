"""Exact checks on finite schemes: correctness, privacy, uniform decomposability and P1-P4.

Every check enumerates the full message space of one query realization at a
time. Independence means the joint law equals the product of the marginals,
functional dependence means constancy on level sets, and uniformity means all
point masses are equal. No entropies or floats are computed.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Sequence

from .errors import SizeMismatch, ZeroDownload
from .family import build_minimal_family, hitting_number
from .lp import capacity, s_star
from .pattern import CollusionPattern
from .scheme import (
    PirScheme,
    component_is_constant,
    eval_component,
    eval_matrix,
    message_size_in_symbols,
    rate,
    realizations,
    split,
)


@dataclass
class CheckResult:
    name: str
    passed: bool = True
    cases: int = 0
    failures: int = 0
    witness: dict | None = None

    def fail(self, witness: dict):
        self.passed = False
        self.failures += 1
        if self.witness is None:
            self.witness = witness

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        return {
            "status": "pass" if self.passed else "fail",
            "cases": self.cases,
            "failures": self.failures,
            "witness": _jsonable(self.witness),
        }


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _desired(scheme: PirScheme, k: int | None) -> range | list[int]:
    return range(scheme.K) if k is None else [k]


def _is_independent(samples: Sequence[tuple]) -> tuple[bool, Any]:
    """Exact test that the coordinates of equally likely ``samples`` are mutually independent."""
    total = len(samples)
    if not samples or len(samples[0]) < 2:
        return True, None
    width = len(samples[0])
    joint = Counter(samples)
    margins = [Counter(s[i] for s in samples) for i in range(width)]
    support = 1
    for m in margins:
        support *= len(m)
    if support != len(joint):
        missing = next(
            (a for a in _product_support(margins) if a not in joint), None
        )
        return False, {"impossible_joint_value": missing}
    for a, c in joint.items():
        lhs = c * total ** (width - 1)
        rhs = 1
        for i, m in enumerate(margins):
            rhs *= m[a[i]]
        if lhs != rhs:
            return False, {"joint_value": a, "joint_count": c}
    return True, None


def _product_support(margins):
    return product(*(list(m) for m in margins))


def _is_uniform(values: Sequence, support_size: int) -> bool:
    counts = Counter(values)
    return len(counts) == support_size and len(set(counts.values())) == 1


def _answers(scheme: PirScheme, q: tuple[str, ...], w) -> tuple:
    return tuple(eval_matrix(scheme, scheme.matrix(n, label), w) for n, label in enumerate(q))


def check_correctness(scheme: PirScheme) -> CheckResult:
    """For every k and realization, the answers determine W_k."""
    res = CheckResult("correctness")
    assignments = list(scheme.message_assignments())
    for k in range(scheme.K):
        for _, q in realizations(scheme, k):
            res.cases += 1
            seen: dict[tuple, tuple] = {}
            for w in assignments:
                a = _answers(scheme, q, w)
                prev = seen.setdefault(a, w)
                if prev[k] != w[k]:
                    res.fail({"k": k, "queries": q, "w_a": prev, "w_b": w})
                    break
    return res


def query_distribution(scheme: PirScheme, servers: Sequence[int], k: int) -> dict[tuple, Fraction]:
    dist: dict[tuple, Fraction] = {}
    for key in scheme.keys:
        if key.prob > 0:
            sub = tuple(key.queries[k][n] for n in servers)
            dist[sub] = dist.get(sub, Fraction(0)) + key.prob
    return dist


def check_privacy(scheme: PirScheme, pattern: CollusionPattern) -> CheckResult:
    """The joint query law seen by each colluding set is the same for every desired index."""
    if scheme.n_servers != pattern.n_servers:
        raise SizeMismatch(f"scheme has {scheme.n_servers} servers, pattern has {pattern.n_servers}")
    res = CheckResult("privacy")
    for t in pattern.sets:
        base = query_distribution(scheme, t, 0)
        for k in range(1, scheme.K):
            res.cases += 1
            other = query_distribution(scheme, t, k)
            if other != base:
                diff = next(v for v in set(base) | set(other) if base.get(v, 0) != other.get(v, 0))
                res.fail({
                    "colluding_set": t, "k": 0, "k_prime": k, "queries": diff,
                    "p_k": base.get(diff, Fraction(0)), "p_k_prime": other.get(diff, Fraction(0)),
                })
    return res


def check_uniform_decomposable(scheme: PirScheme) -> CheckResult:
    """Every component is constant or maps uniform X^L onto uniform Y."""
    res = CheckResult("uniform_decomposable")
    alphabet = scheme.message_alphabet
    order = scheme.group.order
    for (n, label), mat in sorted(scheme.matrices.items(), key=lambda t: t[0]):
        for k, row in enumerate(mat.rows):
            for i, comp in enumerate(row):
                res.cases += 1
                if component_is_constant(comp):
                    continue
                images = [eval_component(comp, w, scheme.x_size, scheme.group) for w in alphabet]
                if len(set(images)) == 1:
                    continue
                if not _is_uniform(images, order):
                    res.fail({"server": n, "query": label, "message": k, "position": i})
    return res


def _per_realization(
    name: str,
    scheme: PirScheme,
    k: int | None,
    test: Callable[[int, tuple[str, ...]], Any],
) -> CheckResult:
    res = CheckResult(name)
    for j in _desired(scheme, k):
        for _, q in realizations(scheme, j):
            res.cases += 1
            bad = test(j, q)
            if bad is not None:
                res.fail({"k": j, "queries": q, **bad})
    return res


def _with_desired(scheme: PirScheme, k: int, wk):
    """Assignment with W_k = wk and every other message zero."""
    zero = (0,) * scheme.L
    return tuple(wk if j == k else zero for j in range(scheme.K))


def check_p1(scheme: PirScheme, k: int | None = None) -> CheckResult:
    """The N answers are mutually independent in every realization."""
    assignments = list(scheme.message_assignments())

    def test(j, q):
        ok, info = _is_independent([_answers(scheme, q, w) for w in assignments])
        return None if ok else (info or {})

    return _per_realization("P1", scheme, k, test)


def check_p2(scheme: PirScheme, k: int | None = None) -> CheckResult:
    """Each answer is uniform over Y^ell."""
    assignments = list(scheme.message_assignments())
    order = scheme.group.order

    def test(j, q):
        for n, label in enumerate(q):
            mat = scheme.matrix(n, label)
            values = [eval_matrix(scheme, mat, w) for w in assignments]
            if not _is_uniform(values, order ** mat.length):
                return {"server": n}
        return None

    return _per_realization("P2", scheme, k, test)


def residual_values(scheme: PirScheme, j: int, q: tuple[str, ...]) -> list[tuple]:
    """Residual tuples (R_0..R_{N-1}) over all assignments of the non-desired messages."""
    splits = [split(scheme, n, label, j).residual for n, label in enumerate(q)]
    out = []
    for w in scheme.message_assignments():
        if any(w[j]):
            continue
        out.append(tuple(eval_matrix(scheme, m, w) for m in splits))
    return out


def signal_values(scheme: PirScheme, j: int, q: tuple[str, ...]) -> list[tuple]:
    """Signal tuples (M_0..M_{N-1}) over all values of the desired message."""
    splits = [split(scheme, n, label, j).signal for n, label in enumerate(q)]
    return [
        tuple(eval_matrix(scheme, m, _with_desired(scheme, j, wk)) for m in splits)
        for wk in scheme.message_alphabet
    ]


def check_p3(scheme: PirScheme, pattern: CollusionPattern, k: int | None = None) -> CheckResult:
    """For every colluding set, all residuals are functions of that set's residuals."""
    if scheme.n_servers != pattern.n_servers:
        raise SizeMismatch("scheme and pattern server counts differ")

    def test(j, q):
        rows = residual_values(scheme, j, q)
        for t in pattern.sets:
            seen: dict[tuple, tuple] = {}
            for r in rows:
                key = tuple(r[i] for i in t)
                if seen.setdefault(key, r) != r:
                    return {"colluding_set": t}
        return None

    return _per_realization("P3", scheme, k, test)


def check_p4(scheme: PirScheme, k: int | None = None) -> CheckResult:
    """The desired-message signals are mutually independent."""

    def test(j, q):
        ok, info = _is_independent(signal_values(scheme, j, q))
        return None if ok else (info or {})

    return _per_realization("P4", scheme, k, test)


@dataclass
class SupportCount:
    count: int | None
    alpha: int
    status: str  # pass, fail, vacuous, no_qualifying_realization
    qualifying: int = 0

    def to_json(self) -> dict:
        return {"count": self.count, "alpha": self.alpha, "status": self.status, "qualifying": self.qualifying}


def signal_support_count(scheme: PirScheme, pattern: CollusionPattern, k: int, alpha: int | None = None) -> SupportCount:
    """Fewest servers with a non-constant signal, over realizations where every colluding set sees a non-constant residual."""
    if alpha is None:
        alpha = hitting_number(build_minimal_family(pattern)).alpha
    if scheme.K == 1:
        return SupportCount(None, alpha, "vacuous")
    best, qualifying = None, 0
    for _, q in realizations(scheme, k):
        rows = residual_values(scheme, k, q)
        if any(len({tuple(r[i] for i in t) for r in rows}) == 1 for t in pattern.sets):
            continue
        qualifying += 1
        sig = signal_values(scheme, k, q)
        count = sum(1 for n in range(scheme.n_servers) if len({s[n] for s in sig}) > 1)
        best = count if best is None else min(best, count)
    if best is None:
        return SupportCount(None, alpha, "no_qualifying_realization")
    return SupportCount(best, alpha, "pass" if best >= alpha else "fail", qualifying)


@dataclass
class VerifyReport:
    checks: dict[str, CheckResult]
    rate: Fraction | None
    capacity: Fraction
    s_star: Fraction
    alpha: int
    message_size: Fraction
    support: list[SupportCount] = field(default_factory=list)

    @property
    def valid_pir(self) -> bool:
        return bool(self.checks["correctness"] and self.checks["privacy"])

    @property
    def properties_hold(self) -> bool:
        return all(bool(self.checks[p]) for p in ("P1", "P2", "P3", "P4"))

    @property
    def capacity_achieving(self) -> bool:
        return self.valid_pir and self.rate is not None and self.rate == self.capacity

    @property
    def characterization_applicable(self) -> bool:
        # The P1-P4 characterization is about schemes that are already correct and private.
        return self.valid_pir

    @property
    def iff_consistent(self) -> bool:
        return not self.characterization_applicable or self.capacity_achieving == self.properties_hold

    @property
    def meets_size_bound(self) -> bool:
        return self.message_size >= self.alpha

    @property
    def all_passed(self) -> bool:
        return all(bool(c) for c in self.checks.values()) and self.capacity_achieving

    def to_json(self) -> dict:
        frac = _jsonable
        return {
            "checks": {name: c.to_json() for name, c in self.checks.items()},
            "rate": frac(self.rate),
            "capacity": frac(self.capacity),
            "s_star": frac(self.s_star),
            "capacity_achieving": self.capacity_achieving,
            "properties_P1_P4": self.properties_hold,
            "characterization_applicable": self.characterization_applicable,
            "iff_consistent": self.iff_consistent,
            "alpha": self.alpha,
            "message_size_symbols": frac(self.message_size),
            "meets_size_bound": self.meets_size_bound,
            "signal_support": [s.to_json() for s in self.support],
        }


def verify_capacity_achieving(scheme: PirScheme, pattern: CollusionPattern, K: int | None = None) -> VerifyReport:
    """Run every check, compute rate and capacity, and cross-check the P1-P4 characterization."""
    if scheme.n_servers != pattern.n_servers:
        raise SizeMismatch(f"scheme has {scheme.n_servers} servers, pattern has {pattern.n_servers}")
    if K is not None and K != scheme.K:
        raise SizeMismatch(f"scheme has K={scheme.K}, asked to verify K={K}")
    checks = {
        "correctness": check_correctness(scheme),
        "privacy": check_privacy(scheme, pattern),
        "uniform_decomposable": check_uniform_decomposable(scheme),
        "P1": check_p1(scheme),
        "P2": check_p2(scheme),
        "P3": check_p3(scheme, pattern),
        "P4": check_p4(scheme),
    }
    try:
        r = rate(scheme)
    except ZeroDownload:
        r = None
    s = s_star(pattern)
    alpha = hitting_number(build_minimal_family(pattern)).alpha
    support = [signal_support_count(scheme, pattern, k, alpha) for k in range(scheme.K)]
    return VerifyReport(
        checks=checks,
        rate=r,
        capacity=capacity(s, scheme.K),
        s_star=s,
        alpha=alpha,
        message_size=message_size_in_symbols(scheme),
        support=support,
    )
