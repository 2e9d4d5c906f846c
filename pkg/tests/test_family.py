from fractions import Fraction as F
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from collusion_pir.errors import BadParams, IncommensurableAlphabets, OutOfRangeIndex, TooLarge
from collusion_pir.family import (
    SetFamily,
    alpha_of,
    build_minimal_family,
    closed_form_bound,
    contains_two_disjoint,
    cyclic_family_characterization,
    family_membership,
    hitting_number,
    is_hitting_set,
    log2_exact,
    message_size_lower_bound,
    no_smaller_hitting_set,
)
from collusion_pir.pattern import (
    gen_cyclic_contiguous,
    gen_disjoint,
    gen_t_collusion,
    group_ranges,
    make_pattern,
    to_mask,
)

from test_pattern import IVC, patterns

IVC_MINIMAL = ((0, 3, 4), (1, 3, 4), (2, 3, 4), (0, 1, 2, 3), (0, 1, 2, 4))


def test_membership_examples():
    p = make_pattern(5, IVC)
    assert family_membership(p, {0, 3, 4})
    assert family_membership(p, to_mask([0, 3, 4]))
    t = gen_t_collusion(5, 2)
    assert not any(family_membership(t, s) for s in combinations(range(5), 2))
    assert all(family_membership(t, s) for s in combinations(range(5), 3))
    assert not family_membership(p, [])
    with pytest.raises(OutOfRangeIndex):
        family_membership(p, [5])
    with pytest.raises(OutOfRangeIndex):
        family_membership(p, 1 << 5)


def test_ivc_minimal_family_and_alpha():
    fam = build_minimal_family(make_pattern(5, IVC))
    assert set(fam.minimal_sets) == set(IVC_MINIMAL)
    hit = hitting_number(fam)
    assert hit.alpha == 2
    assert is_hitting_set(fam, hit.witness)
    assert is_hitting_set(fam, [1, 4])
    assert no_smaller_hitting_set(fam, 2)


def test_minimal_family_examples():
    fam = build_minimal_family(gen_t_collusion(4, 2))
    assert fam.minimal_sets == tuple(combinations(range(4), 3))
    assert build_minimal_family(gen_cyclic_contiguous(4, 2)).minimal_sets == ((0, 1, 2, 3),)


def test_set_family_container():
    fam = SetFamily(4, ((0, 1), (2, 3)))
    assert {0, 1, 3} in fam and {0, 2} not in fam
    assert fam.to_json() == {"n": 4, "minimal_sets": [[0, 1], [2, 3]]}


def test_enumeration_cap():
    p = gen_t_collusion(6, 1)
    with pytest.raises(TooLarge):
        build_minimal_family(p, cap=5)


def test_hitting_edge_cases():
    assert hitting_number(SetFamily(3, ())).alpha == 0
    assert hitting_number(SetFamily(3, ())).witness == ()
    with pytest.raises(BadParams):
        hitting_number(SetFamily(3, ((),)))
    assert no_smaller_hitting_set(SetFamily(3, ()), 0)


def test_closed_forms():
    assert closed_form_bound("t_collusion", 7, 3) == 4
    assert closed_form_bound("disjoint_full", [3, 3], [1, 2]) == 4
    assert closed_form_bound("disjoint_cyclic", [4, 2], [2, 1]) == 3
    assert closed_form_bound("cyclic", 7, 3) == 2
    for bad in (("t_collusion", 2, 3), ("cyclic", 3), ("disjoint_full", [2], [1, 1]), ("nope", 1, 1)):
        with pytest.raises(BadParams):
            closed_form_bound(*bad)


def test_message_size_bound():
    assert message_size_lower_bound(make_pattern(5, IVC), 2) == 2
    assert message_size_lower_bound(gen_cyclic_contiguous(6, 2), 4) == 4
    assert message_size_lower_bound(gen_t_collusion(3, 1), 2) == 2
    assert isinstance(message_size_lower_bound(gen_t_collusion(3, 1), 8), F)
    with pytest.raises(IncommensurableAlphabets):
        message_size_lower_bound(gen_t_collusion(3, 1), 3)
    with pytest.raises(BadParams):
        message_size_lower_bound(gen_t_collusion(3, 1), 1)
    assert log2_exact(16) == 4


def test_cyclic_characterization_examples():
    p = gen_cyclic_contiguous(6, 2)
    assert cyclic_family_characterization(p, {0, 1, 3, 4})
    assert not cyclic_family_characterization(p, {0, 1, 2})
    assert not cyclic_family_characterization(p, set())
    with pytest.raises(BadParams):
        cyclic_family_characterization(gen_cyclic_contiguous(5, 3), {0})
    with pytest.raises(BadParams):
        cyclic_family_characterization(gen_t_collusion(4, 2), {0})


def test_t_collusion_minimal_family_grid():
    for n in range(2, 9):
        for t in range(1, n):
            fam = build_minimal_family(gen_t_collusion(n, t))
            assert fam.minimal_sets == tuple(combinations(range(n), t + 1))


def _type_sets(ns, ts):
    groups = group_ranges(ns)
    out = set()
    for g, t in zip(groups, ts):
        if t < len(g):
            out.update(combinations(g, t + 1))
    for i, j in combinations(range(len(ns)), 2):
        for a in combinations(groups[i], ts[i]):
            for b in combinations(groups[j], ts[j]):
                out.add(tuple(sorted(a + b)))
    masks = {s: to_mask(s) for s in out}
    return {s for s in out if not any(u != s and masks[u] & ~masks[s] == 0 for u in out)}


def _disjoint_configs(max_total, groups=(2, 3)):
    def rec(m, remaining):
        if m == 0:
            yield []
            return
        for n in range(1, remaining - m + 2):
            for rest in rec(m - 1, remaining - n):
                yield [n] + rest

    for m in groups:
        for ns in rec(m, max_total):
            for ts in _threshold_choices(ns):
                yield ns, ts


def _threshold_choices(ns):
    if not ns:
        yield []
        return
    for t in range(1, ns[0] + 1):
        for rest in _threshold_choices(ns[1:]):
            yield [t] + rest


def test_disjoint_full_type_structure():
    count = 0
    for ns, ts in _disjoint_configs(8):
        fam = build_minimal_family(gen_disjoint(ns, ts, "full"))
        assert set(fam.minimal_sets) == _type_sets(ns, ts), (ns, ts)
        count += 1
    assert count > 100


@settings(max_examples=100, deadline=None)
@given(patterns(max_n=7))
def test_upward_closure_and_witness(p):
    fam = build_minimal_family(p)
    n = p.n_servers
    member = [family_membership(p, s) for s in range(1 << n)]
    for s in range(1 << n):
        assert member[s] == (s in fam)
        if member[s]:
            assert all(member[s | (1 << i)] for i in range(n))
    hit = hitting_number(fam)
    assert len(hit.witness) == hit.alpha and is_hitting_set(fam, hit.witness)
    assert no_smaller_hitting_set(fam, hit.alpha)


@settings(max_examples=100, deadline=None)
@given(patterns(max_n=6))
def test_alpha_on_full_family_equals_minimal(p):
    n = p.n_servers
    full = SetFamily(n, tuple(tuple(i for i in range(n) if s >> i & 1) for s in range(1, 1 << n) if family_membership(p, s)))
    assert hitting_number(full).alpha == alpha_of(p)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sets(st.integers(0, 7), min_size=1, max_size=4), max_size=8))
def test_branch_and_bound_matches_brute_force(sets):
    fam = SetFamily(8, tuple(tuple(sorted(s)) for s in sets))
    hit = hitting_number(fam)
    brute = next(k for k in range(9) if any(is_hitting_set(fam, c) for c in combinations(range(8), k)))
    assert hit.alpha == brute


def test_contains_two_disjoint():
    p = gen_cyclic_contiguous(6, 2)
    assert contains_two_disjoint(p, [0, 1, 2, 3])
    assert not contains_two_disjoint(p, [0, 1, 2])
