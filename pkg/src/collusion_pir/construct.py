"""Achievable schemes for cyclically contiguous collusion and supporting constructions.

The recipe: pick servers that pairwise never collude, run a no-collusion
scheme on them and send every other server a null query.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Sequence

from .errors import BadParams, BudgetExhausted, NotDivisible, SizeMismatch
from .lp import capacity
from .pattern import CollusionPattern, gen_cyclic_contiguous, gen_disjoint, group_ranges, make_pattern
from .scheme import (
    NULL,
    AnswerMatrix,
    FiniteAbelianGroup,
    Key,
    PirScheme,
    empty_matrix,
    linear_label,
    linear_matrix,
    log_ratio,
)
from .verify import check_correctness, check_p1, check_p2, check_p3, check_p4, verify_capacity_achieving

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SubsetSelection:
    active: tuple[int, ...]

    @property
    def relabel(self) -> dict[int, int]:
        return {a: i for i, a in enumerate(self.active)}


def is_noncolluding(pattern: CollusionPattern, servers: Sequence[int]) -> bool:
    chosen = set(servers)
    return all(len(chosen & set(t)) <= 1 for t in pattern.sets)


def select_noncolluding(kind: str, *params) -> SubsetSelection:
    """First server of every length-T block: ``cyclic(N, T)`` or ``disjoint_cyclic(Ns, Ts)``."""
    if kind == "cyclic":
        n, t = params
        if n % t:
            raise NotDivisible(f"T={t} does not divide N={n}")
        active = tuple(range(0, n, t))
        pattern = gen_cyclic_contiguous(n, t)
    elif kind == "disjoint_cyclic":
        ns, ts = params
        active = []
        for servers, n, t in zip(group_ranges(ns), ns, ts):
            if n % t:
                raise NotDivisible(f"T={t} does not divide N={n}")
            active.extend(servers[::t])
        active = tuple(active)
        pattern = gen_disjoint(ns, ts, "cyclic")
    else:
        raise BadParams(f"unknown pattern class {kind!r}")
    assert is_noncolluding(pattern, active)
    return SubsetSelection(active)


def lift_scheme(base: PirScheme, sel: SubsetSelection, n_servers: int) -> PirScheme:
    """Run ``base`` on the selected servers; every other server always gets the null query."""
    if base.n_servers != len(sel.active):
        raise SizeMismatch(f"base scheme has {base.n_servers} servers, selection has {len(sel.active)}")
    if any(not 0 <= a < n_servers for a in sel.active):
        raise SizeMismatch("selection refers to servers outside the lifted range")
    relabel = sel.relabel
    matrices: dict[tuple[int, str], AnswerMatrix] = {}
    for (b, label), mat in base.matrices.items():
        matrices[(sel.active[b], label)] = mat
    for n in range(n_servers):
        if n not in relabel:
            matrices[(n, NULL)] = empty_matrix(base.K)
    keys = []
    for key in base.keys:
        queries = tuple(
            tuple(qs[relabel[n]] if n in relabel else NULL for n in range(n_servers))
            for qs in key.queries
        )
        keys.append(Key(key.prob, queries))
    return PirScheme(n_servers, base.K, base.L, base.x_size, base.group, tuple(keys), matrices)


def _unit(K: int, k: int) -> AnswerMatrix:
    return linear_matrix([[[1 if j == k else 0]] for j in range(K)])


def sigma_2x2() -> PirScheme:
    """Two servers, two one-bit messages, uniform key over four query pairs.

    For desired k: (null, e_k), (e_k, null), (e_{1-k}, W_0+W_1), (W_0+W_1, e_{1-k}).
    """
    both = linear_matrix([[[1]], [[1]]])
    e = [_unit(2, 0), _unit(2, 1)]
    labels = {"e0": linear_label(e[0]), "e1": linear_label(e[1]), "both": linear_label(both)}
    matrices = {(n, NULL): empty_matrix(2) for n in (0, 1)}
    for n in (0, 1):
        matrices[(n, labels["e0"])] = e[0]
        matrices[(n, labels["e1"])] = e[1]
        matrices[(n, labels["both"])] = both

    def plan(k: int, f: int) -> tuple[str, str]:
        ek, other = labels[f"e{k}"], labels[f"e{1 - k}"]
        return [(NULL, ek), (ek, NULL), (other, labels["both"]), (labels["both"], other)][f]

    keys = tuple(Key(Fraction(1, 4), (plan(0, f), plan(1, f))) for f in range(4))
    return PirScheme(2, 2, 1, 2, FiniteAbelianGroup((2,)), keys, matrices)


def direct_download(n_servers: int = 2, L: int = 1, x_size: int = 2) -> PirScheme:
    """K = 1: server 0 sends the whole message, the others stay silent."""
    mat = linear_matrix([[[1 if j == i else 0 for j in range(L)] for i in range(L)]])
    label = linear_label(mat)
    matrices = {(0, label): mat}
    for n in range(1, n_servers):
        matrices[(n, NULL)] = empty_matrix(1)
    queries = ((label,) + (NULL,) * (n_servers - 1),)
    return PirScheme(n_servers, 1, L, x_size, FiniteAbelianGroup((x_size,)), (Key(Fraction(1), queries),), matrices)


# Bounded search for tiny no-collusion schemes -------------------------------

def _server_matrices(K: int, L: int, q: int, max_len: int, tick=lambda: None) -> list[AnswerMatrix]:
    """All linear answer matrices with up to ``max_len`` non-zero columns, columns as sorted multisets."""
    columns = [c for c in product(range(q), repeat=K * L) if any(c)]
    out = [empty_matrix(K)]
    for ell in range(1, max_len + 1):
        for cols in combinations_with_replacement(columns, ell):
            tick()
            rows = [[list(col[k * L:(k + 1) * L]) for col in cols] for k in range(K)]
            out.append(linear_matrix(rows))
    return out


def _swap_rows(mat: AnswerMatrix, a: int, b: int) -> AnswerMatrix:
    rows = list(mat.rows)
    rows[a], rows[b] = rows[b], rows[a]
    return AnswerMatrix(tuple(rows))


def _build_symmetric(n_prime: int, K: int, L: int, q: int, realizations) -> PirScheme:
    """Scheme whose plan for desired k swaps message rows 0 and k of the plan for message 0."""
    group = FiniteAbelianGroup((q,))
    matrices: dict[tuple[int, str], AnswerMatrix] = {}
    keys = []
    prob = Fraction(1, len(realizations))
    for real in realizations:
        per_k = []
        for k in range(K):
            labels = []
            for n, mat in enumerate(real):
                m = _swap_rows(mat, 0, k) if k else mat
                label = linear_label(m)
                matrices[(n, label)] = m
                labels.append(label)
            per_k.append(tuple(labels))
        keys.append(Key(prob, tuple(per_k)))
    return PirScheme(n_prime, K, L, q, group, tuple(keys), matrices)


def _realization_ok(probe: PirScheme, pattern: CollusionPattern) -> bool:
    return all(
        bool(c)
        for c in (
            check_p2(probe, 0),
            check_p4(probe, 0),
            check_p1(probe, 0),
            check_p3(probe, pattern, 0),
            check_correctness(probe),
        )
    )


def search_scheme(
    n_prime: int,
    K: int,
    L: int,
    y_modulus: int,
    budget: int = 100_000,
    max_keys: int = 6,
    max_len: int | None = None,
) -> PirScheme | None:
    """Search linear schemes over Z_q that reach no-collusion capacity on ``n_prime`` servers.

    Candidate key distributions are uniform over a multiset of query
    realizations for message 0; the plan for message k swaps message rows 0
    and k. Realizations are pre-filtered by P1-P4 and correctness for message
    0, multisets by total download; survivors go through the full verifier.

    Returns ``None`` only when the bounded space was exhausted. Raises
    ``BudgetExhausted`` when ``budget`` nodes were visited first.
    """
    if min(n_prime, K, L) < 1 or y_modulus < 2:
        raise BadParams("need n', K, L >= 1 and modulus >= 2")
    pattern = make_pattern(n_prime, [[i] for i in range(n_prime)])
    target = capacity(n_prime, K)
    # E[download] must equal L / C in Y-symbols (X = Y here).
    download = Fraction(L) * log_ratio(y_modulus, y_modulus) / target
    if max_len is None:
        max_len = L + 1
    nodes = 0

    def tick():
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExhausted(f"search budget of {budget} nodes exhausted")

    tick()
    per_server = _server_matrices(K, L, y_modulus, max_len, tick)
    candidates = []
    for real in product(per_server, repeat=n_prime):
        tick()
        if all(m.length == 0 for m in real):
            continue
        probe = _build_symmetric(n_prime, K, L, y_modulus, [real])
        if _realization_ok(probe, pattern):
            candidates.append((sum(m.length for m in real), real))
    log.debug("%d admissible realizations", len(candidates))

    for n_keys in range(1, max_keys + 1):
        total = download * n_keys
        if total.denominator != 1:
            continue
        total = int(total)

        def extend(start: int, chosen: list, used: int):
            tick()
            if len(chosen) == n_keys:
                if used != total:
                    return None
                scheme = _build_symmetric(n_prime, K, L, y_modulus, [c[1] for c in chosen])
                report = verify_capacity_achieving(scheme, pattern)
                return scheme if report.all_passed else None
            for i in range(start, len(candidates)):
                size = candidates[i][0]
                remaining = n_keys - len(chosen) - 1
                if used + size > total:
                    continue
                if used + size + remaining * max(c[0] for c in candidates) < total:
                    continue
                found = extend(i, chosen + [candidates[i]], used + size)
                if found is not None:
                    return found
            return None

        found = extend(0, [], 0)
        if found is not None:
            return found
    return None


def prior_message_size(kind: str, *params) -> int:
    """Sub-packetization of the earlier general-pattern construction.

    ``cyclic(N, T, K)`` gives N^K; ``disjoint_cyclic(Ns, Ts, K)`` gives
    (sum_i prod_j T_j * N_i / T_i)^K.
    """
    if kind == "cyclic":
        n, t, k = (int(v) for v in params)
        if not 1 <= t <= n or k < 1:
            raise BadParams("need 1 <= T <= N and K >= 1")
        return n ** k
    if kind == "disjoint_cyclic":
        ns, ts, k = [int(v) for v in params[0]], [int(v) for v in params[1]], int(params[2])
        if len(ns) != len(ts) or not ns or k < 1 or any(not 1 <= t <= n for n, t in zip(ns, ts)):
            raise BadParams("need equal-length Ns, Ts with 1 <= T_i <= N_i, and K >= 1")
        prod_t = 1
        for t in ts:
            prod_t *= t
        return sum(prod_t * n // t for n, t in zip(ns, ts)) ** k
    raise BadParams(f"unknown pattern class {kind!r}")


def optimal_message_size(kind: str, *params) -> int:
    """Optimal sub-packetization (in |Y| = |X| symbols) when every T divides its N."""
    if kind == "cyclic":
        n, t = params[:2]
        if n % t:
            raise NotDivisible(f"T={t} does not divide N={n}")
        return n // t - 1
    if kind == "disjoint_cyclic":
        ns, ts = params[:2]
        if any(n % t for n, t in zip(ns, ts)):
            raise NotDivisible("every T_i must divide N_i")
        return sum(n // t for n, t in zip(ns, ts)) - 1
    raise BadParams(f"unknown pattern class {kind!r}")


def construct_cyclic(
    kind: str, *params, K: int = 2, y_modulus: int = 2, budget: int = 100_000
) -> tuple[PirScheme, CollusionPattern]:
    """Search a base scheme on the selected servers and lift it onto the full pattern."""
    sel = select_noncolluding(kind, *params)
    if kind == "cyclic":
        n, t = params
        pattern = gen_cyclic_contiguous(n, t)
    else:
        ns, ts = params
        pattern = gen_disjoint(ns, ts, "cyclic")
    n_prime = len(sel.active)
    if n_prime < 2 and K > 1:
        raise BadParams("a single non-colluding server cannot hide the desired index")
    base = search_scheme(n_prime, K, max(n_prime - 1, 1), y_modulus, budget)
    if base is None:
        raise BudgetExhausted("no base scheme in the searched space")
    return lift_scheme(base, sel, pattern.n_servers), pattern
