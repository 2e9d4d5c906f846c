"""The server-subset family behind the message-size bound, and its hitting number.

A set S of servers is in the family when it contains a colluding set T such
that, for every i in T, S minus {i} still contains some colluding set. The
colluding sets quantified over are the stored maximal sets of the pattern;
reading them as the full subset closure makes every non-empty S qualify.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import BadParams, IncommensurableAlphabets, OutOfRangeIndex, TooLarge
from .pattern import ENUMERATION_CAP, CollusionPattern, from_mask, gen_cyclic_contiguous, to_mask


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low
        mask ^= low


def _member_mask(masks: Sequence[int], s: int) -> bool:
    for t in masks:
        if t & ~s:
            continue
        if all(any(r & ~(s & ~bit) == 0 for r in masks) for bit in _bits(t)):
            return True
    return False


def _as_mask(n_servers: int, subset) -> int:
    if isinstance(subset, int):
        if subset < 0 or subset >> n_servers:
            raise OutOfRangeIndex(f"mask {subset} has bits outside [0, {n_servers - 1}]")
        return subset
    for i in subset:
        if not 0 <= i < n_servers:
            raise OutOfRangeIndex(f"server index {i} not in [0, {n_servers - 1}]")
    return to_mask(subset)


def family_membership(p: CollusionPattern, subset) -> bool:
    """Whether ``subset`` (index iterable or bitmask) belongs to the family of ``p``."""
    return _member_mask(p.masks, _as_mask(p.n_servers, subset))


@dataclass(frozen=True)
class SetFamily:
    """An upward-closed family over ``[0, n_servers)`` stored by its minimal sets."""

    n_servers: int
    minimal_sets: tuple[tuple[int, ...], ...]

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(to_mask(s) for s in self.minimal_sets)

    def __contains__(self, subset) -> bool:
        s = _as_mask(self.n_servers, subset)
        return any(m & ~s == 0 for m in self.masks)

    def to_json(self) -> dict:
        return {"n": self.n_servers, "minimal_sets": [list(s) for s in self.minimal_sets]}


def _sort_key(s: tuple[int, ...]):
    return (len(s), s)


def build_minimal_family(
    p: CollusionPattern, cap: int | None = ENUMERATION_CAP, check_closure: bool = True
) -> SetFamily:
    """Scan all 2^N subsets and keep the inclusion-minimal family members."""
    n = p.n_servers
    if cap is not None and n > cap:
        raise TooLarge(f"N={n} exceeds enumeration cap {cap}")
    masks = p.masks
    member = [_member_mask(masks, s) for s in range(1 << n)]
    if check_closure:
        for s in range(1 << n):
            if member[s]:
                for i in range(n):
                    assert member[s | (1 << i)], "family is not upward closed"
    minimal: list[int] = []
    for s in sorted(range(1 << n), key=lambda x: (bin(x).count("1"), x)):
        if member[s] and not any(m & ~s == 0 for m in minimal):
            minimal.append(s)
    sets = sorted((from_mask(m) for m in minimal), key=_sort_key)
    return SetFamily(n, tuple(sets))


@dataclass(frozen=True)
class HittingResult:
    alpha: int
    witness: tuple[int, ...]
    certified: bool = True

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "witness": list(self.witness), "certified": self.certified}


def is_hitting_set(family: SetFamily, candidate: Iterable[int]) -> bool:
    h = to_mask(candidate)
    return all(m & h for m in family.masks)


def _greedy_hitting(sets: list[int]) -> int:
    chosen = 0
    remaining = list(sets)
    while remaining:
        freq: dict[int, int] = {}
        for s in remaining:
            for b in _bits(s):
                freq[b] = freq.get(b, 0) + 1
        best = max(freq, key=lambda b: (freq[b], -b))
        chosen |= best
        remaining = [s for s in remaining if not s & best]
    return chosen


def _disjoint_lower_bound(sets: list[int]) -> int:
    used, count = 0, 0
    for s in sorted(sets, key=lambda x: bin(x).count("1")):
        if not s & used:
            used |= s
            count += 1
    return count


def hitting_number(family: SetFamily) -> HittingResult:
    """Exact minimum hitting set by branch and bound.

    Branches on the elements of the smallest unhit set, most frequent first
    (ties to the smallest index); prunes with a greedy packing of pairwise
    disjoint unhit sets. The search is exhaustive, so the result is certified.
    """
    sets = list(family.masks)
    if not sets:
        return HittingResult(0, ())
    if any(s == 0 for s in sets):
        raise BadParams("family contains the empty set; nothing hits it")
    best = _greedy_hitting(sets)
    best_size = bin(best).count("1")

    def search(chosen: int, size: int, unhit: list[int]):
        nonlocal best, best_size
        if not unhit:
            if size < best_size:
                best, best_size = chosen, size
            return
        if size + _disjoint_lower_bound(unhit) >= best_size:
            return
        pivot = min(unhit, key=lambda s: (bin(s).count("1"), s))
        freq = {b: sum(1 for s in unhit if s & b) for b in _bits(pivot)}
        for b in sorted(freq, key=lambda b: (-freq[b], b)):
            search(chosen | b, size + 1, [s for s in unhit if not s & b])

    search(0, 0, sets)
    return HittingResult(best_size, from_mask(best))


def no_smaller_hitting_set(family: SetFamily, alpha: int) -> bool:
    """Brute-force confirmation that no set of size ``alpha - 1`` hits the family."""
    if alpha == 0:
        return True
    return not any(
        is_hitting_set(family, c) for c in combinations(range(family.n_servers), alpha - 1)
    )


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def closed_form_bound(kind: str, *params) -> int:
    """Closed-form hitting number for the four special pattern classes.

    ``t_collusion(N, T)`` and ``cyclic(N, T)`` take integers;
    ``disjoint_full(Ns, Ts)`` and ``disjoint_cyclic(Ns, Ts)`` take sequences.
    """
    if kind in ("t_collusion", "cyclic"):
        if len(params) != 2:
            raise BadParams(f"{kind} takes (N, T)")
        n, t = (int(v) for v in params)
        if not 1 <= t <= n:
            raise BadParams(f"need 1 <= T <= N, got N={n}, T={t}")
        return n - t if kind == "t_collusion" else _ceil_div(n, t) - 1
    if kind in ("disjoint_full", "disjoint_cyclic"):
        if len(params) != 2:
            raise BadParams(f"{kind} takes (Ns, Ts)")
        ns, ts = [int(v) for v in params[0]], [int(v) for v in params[1]]
        if len(ns) != len(ts) or not ns:
            raise BadParams("Ns and Ts must be non-empty and of equal length")
        for n, t in zip(ns, ts):
            if not 1 <= t <= n:
                raise BadParams(f"need 1 <= T <= N, got N={n}, T={t}")
        if kind == "disjoint_full":
            return sum(n - t for n, t in zip(ns, ts)) + len(ns) - 1
        return sum(_ceil_div(n, t) for n, t in zip(ns, ts)) - 1
    raise BadParams(f"unknown pattern class {kind!r}")


def log2_exact(q: int) -> int:
    """log2(q) for a power of two; raises otherwise."""
    if q < 2 or q & (q - 1):
        raise IncommensurableAlphabets(f"log2({q}) is irrational")
    return q.bit_length() - 1


def message_size_lower_bound(p: CollusionPattern, y_alphabet_size: int) -> Fraction:
    """alpha(F(P)) * log2|Y| bits; |Y| must be a power of two for an exact value."""
    if y_alphabet_size < 2:
        raise BadParams("|Y| must be at least 2")
    alpha = hitting_number(build_minimal_family(p)).alpha
    return Fraction(alpha * log2_exact(y_alphabet_size))


def _cyclic_threshold(p: CollusionPattern) -> int:
    sizes = {len(s) for s in p.sets}
    if len(sizes) != 1:
        raise BadParams("pattern is not cyclically contiguous")
    t = sizes.pop()
    if gen_cyclic_contiguous(p.n_servers, t) != p:
        raise BadParams("pattern is not cyclically contiguous")
    return t


def contains_two_disjoint(p: CollusionPattern, subset) -> bool:
    s = _as_mask(p.n_servers, subset)
    inside = [m for m in p.masks if m & ~s == 0]
    return any(a & b == 0 for a, b in combinations(inside, 2))


def cyclic_family_characterization(p: CollusionPattern, subset) -> bool:
    """Membership for cyclic T-contiguous patterns with N >= 2T: two disjoint windows inside S."""
    t = _cyclic_threshold(p)
    if p.n_servers < 2 * t:
        raise BadParams(f"characterization needs N >= 2T, got N={p.n_servers}, T={t}")
    return contains_two_disjoint(p, subset)


def alpha_of(p: CollusionPattern) -> int:
    return hitting_number(build_minimal_family(p)).alpha

