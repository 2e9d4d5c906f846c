"""Collusion patterns: validation, normalization, generators and incidence matrices.

A pattern is stored by its maximal colluding sets only; every subset of a
stored set is implicitly a colluding set as well.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .errors import BadParams, EmptySet, OutOfRangeIndex, TooLarge, UncoveredServer

ENUMERATION_CAP = 20


def to_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def from_mask(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class CollusionPattern:
    """N servers and the M maximal colluding sets.

    Sets are stored sorted and in canonical (lexicographic) order, so two
    patterns built from the same sets in a different order compare equal.
    """

    n_servers: int
    sets: tuple[tuple[int, ...], ...]
    dropped_nonmaximal: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.n_servers < 1:
            raise BadParams("n_servers must be at least 1")
        canon = []
        for s in self.sets:
            members = tuple(sorted(set(s)))
            if not members:
                raise EmptySet("colluding sets must be non-empty")
            for i in members:
                if not 0 <= i < self.n_servers:
                    raise OutOfRangeIndex(f"server index {i} not in [0, {self.n_servers - 1}]")
            canon.append(members)
        canon = sorted(set(canon))
        masks = [to_mask(s) for s in canon]
        for a in range(len(masks)):
            for b in range(len(masks)):
                if a != b and masks[a] & ~masks[b] == 0:
                    raise BadParams(f"set {canon[a]} is contained in {canon[b]}; sets must be maximal")
        covered = 0
        for m in masks:
            covered |= m
        if covered != (1 << self.n_servers) - 1:
            missing = from_mask(((1 << self.n_servers) - 1) & ~covered)
            raise UncoveredServer(f"servers {list(missing)} appear in no colluding set")
        object.__setattr__(self, "sets", tuple(canon))

    @property
    def n_sets(self) -> int:
        return len(self.sets)

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(to_mask(s) for s in self.sets)

    def to_json(self) -> dict:
        return {"n": self.n_servers, "sets": [list(s) for s in self.sets]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def make_pattern(
    n_servers: int,
    sets: Sequence[Sequence[int]],
    enumeration_cap: int | None = ENUMERATION_CAP,
) -> CollusionPattern:
    """Build a pattern, dropping duplicate and non-maximal sets.

    ``enumeration_cap`` bounds N for the 2^N scans done downstream; pass
    ``None`` to lift it.
    """
    if n_servers < 1:
        raise BadParams("n_servers must be at least 1")
    if enumeration_cap is not None and n_servers > enumeration_cap:
        raise TooLarge(f"N={n_servers} exceeds enumeration cap {enumeration_cap}")
    cleaned = set()
    for s in sets:
        members = tuple(sorted(set(s)))
        if not members:
            raise EmptySet("colluding sets must be non-empty")
        for i in members:
            if not 0 <= i < n_servers:
                raise OutOfRangeIndex(f"server index {i} not in [0, {n_servers - 1}]")
        cleaned.add(members)
    masks = {s: to_mask(s) for s in cleaned}
    maximal = [
        s for s in cleaned
        if not any(t != s and masks[s] & ~masks[t] == 0 for t in cleaned)
    ]
    return CollusionPattern(n_servers, tuple(maximal), dropped_nonmaximal=len(maximal) < len(cleaned))


def pattern_from_json(obj: dict | str, enumeration_cap: int | None = ENUMERATION_CAP) -> CollusionPattern:
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        n, sets = obj["n"], obj["sets"]
    except (KeyError, TypeError) as exc:
        raise BadParams(f"pattern JSON needs 'n' and 'sets': {exc}") from None
    return make_pattern(int(n), [[int(i) for i in s] for s in sets], enumeration_cap)


def normalize(p: CollusionPattern) -> tuple[CollusionPattern, dict[int, int]]:
    """Merge servers that belong to exactly the same colluding sets.

    New indices follow the order of each class's smallest old index.
    """
    profiles = []
    for n in range(p.n_servers):
        profiles.append(frozenset(m for m, s in enumerate(p.sets) if n in s))
    new_index: dict[frozenset, int] = {}
    merge_map = {}
    for n, prof in enumerate(profiles):
        if prof not in new_index:
            new_index[prof] = len(new_index)
        merge_map[n] = new_index[prof]
    if len(new_index) == p.n_servers:
        return p, merge_map
    new_sets = [sorted({merge_map[i] for i in s}) for s in p.sets]
    return CollusionPattern(len(new_index), tuple(tuple(s) for s in new_sets)), merge_map


def _check_threshold(n: int, t: int):
    if not (isinstance(n, int) and isinstance(t, int)) or not 1 <= t <= n:
        raise BadParams(f"need 1 <= T <= N, got N={n}, T={t}")


def gen_t_collusion(n: int, t: int) -> CollusionPattern:
    """Any T of the N servers may collude."""
    _check_threshold(n, t)
    return make_pattern(n, list(combinations(range(n), t)), enumeration_cap=None)


def _cyclic_windows(servers: Sequence[int], t: int) -> list[tuple[int, ...]]:
    size = len(servers)
    return [tuple(servers[(i + j) % size] for j in range(t)) for i in range(size)]


def gen_cyclic_contiguous(n: int, t: int) -> CollusionPattern:
    """The N cyclic windows of T consecutive servers (one set when T = N)."""
    _check_threshold(n, t)
    return make_pattern(n, _cyclic_windows(list(range(n)), t), enumeration_cap=None)


def group_ranges(group_sizes: Sequence[int]) -> list[list[int]]:
    groups, start = [], 0
    for size in group_sizes:
        groups.append(list(range(start, start + size)))
        start += size
    return groups


def gen_disjoint(
    group_sizes: Sequence[int], thresholds: Sequence[int], kind: str = "full"
) -> CollusionPattern:
    """Disjoint server groups with T_i-collusion (``full``) or cyclic T_i-windows (``cyclic``) inside each."""
    if len(group_sizes) != len(thresholds) or not group_sizes:
        raise BadParams("group_sizes and thresholds must be non-empty and of equal length")
    if kind not in ("full", "cyclic"):
        raise BadParams(f"kind must be 'full' or 'cyclic', got {kind!r}")
    for n, t in zip(group_sizes, thresholds):
        _check_threshold(n, t)
    sets = []
    for servers, t in zip(group_ranges(group_sizes), thresholds):
        if kind == "full":
            sets.extend(combinations(servers, t))
        else:
            sets.extend(_cyclic_windows(servers, t))
    return make_pattern(sum(group_sizes), sets, enumeration_cap=None)


def incidence_matrix(p: CollusionPattern) -> tuple[tuple[int, ...], ...]:
    """N x M 0/1 matrix; entry (n, m) is 1 iff server n is in the m-th set."""
    return tuple(
        tuple(1 if n in s else 0 for s in p.sets) for n in range(p.n_servers)
    )
