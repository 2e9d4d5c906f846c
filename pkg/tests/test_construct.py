import pytest

from collusion_pir.construct import (
    SubsetSelection,
    construct_cyclic,
    direct_download,
    is_noncolluding,
    lift_scheme,
    optimal_message_size,
    prior_message_size,
    search_scheme,
    select_noncolluding,
    sigma_2x2,
)
from collusion_pir.errors import BadParams, BudgetExhausted, NotDivisible, SizeMismatch
from collusion_pir.family import alpha_of, closed_form_bound
from collusion_pir.lp import capacity
from collusion_pir.pattern import gen_cyclic_contiguous, gen_disjoint
from collusion_pir.scheme import NULL, expected_download, message_size_in_symbols, rate
from collusion_pir.verify import check_correctness, check_privacy, verify_capacity_achieving

from corpus import CYCLIC_4_2, NO_COLLUSION_2


def test_select_examples():
    assert select_noncolluding("cyclic", 4, 2).active == (0, 2)
    assert select_noncolluding("cyclic", 6, 3).active == (0, 3)
    assert select_noncolluding("disjoint_cyclic", [4, 2], [2, 1]).active == (0, 2, 4, 5)
    with pytest.raises(NotDivisible):
        select_noncolluding("cyclic", 5, 2)
    with pytest.raises(NotDivisible):
        select_noncolluding("disjoint_cyclic", [4, 3], [2, 2])
    with pytest.raises(BadParams):
        select_noncolluding("t_collusion", 4, 2)


def test_selection_always_noncolluding():
    for n in range(1, 13):
        for t in range(1, n + 1):
            if n % t == 0:
                sel = select_noncolluding("cyclic", n, t)
                assert is_noncolluding(gen_cyclic_contiguous(n, t), sel.active)
                assert len(sel.active) == n // t


def test_lift_sigma():
    lifted = lift_scheme(sigma_2x2(), select_noncolluding("cyclic", 4, 2), 4)
    assert lifted.n_servers == 4
    assert all(k.queries[j][n] == NULL for k in lifted.keys for j in range(2) for n in (1, 3))
    assert expected_download(lifted, 0) == expected_download(sigma_2x2(), 0)
    assert check_privacy(lifted, CYCLIC_4_2) and check_correctness(lifted)


def test_identity_lift():
    s = sigma_2x2()
    lifted = lift_scheme(s, SubsetSelection((0, 1)), 2)
    assert lifted == s


def test_lift_size_mismatch():
    with pytest.raises(SizeMismatch):
        lift_scheme(sigma_2x2(), SubsetSelection((0,)), 4)
    with pytest.raises(SizeMismatch):
        lift_scheme(sigma_2x2(), SubsetSelection((0, 5)), 4)


def test_direct_download():
    s = direct_download(3, L=2)
    assert rate(s) == 1
    assert verify_capacity_achieving(s, gen_cyclic_contiguous(3, 1)).all_passed


def test_search_finds_two_server_scheme():
    s = search_scheme(2, 2, 1, 2)
    r = verify_capacity_achieving(s, NO_COLLUSION_2)
    assert r.all_passed and r.rate == r.capacity


def test_search_single_server():
    s = search_scheme(1, 1, 1, 2)
    assert rate(s) == 1


def test_search_budget():
    with pytest.raises(BudgetExhausted):
        search_scheme(2, 2, 1, 2, budget=1)


def test_search_exhausts_to_none():
    # One key value cannot have expected download 3/2, so the bounded space runs dry.
    assert search_scheme(2, 2, 1, 2, max_keys=1) is None
    # A single server must download everything; the search finds exactly that.
    assert rate(search_scheme(1, 2, 1, 2, max_keys=2)) == capacity(1, 2)


def test_search_bad_params():
    with pytest.raises(BadParams):
        search_scheme(0, 1, 1, 2)


@pytest.mark.parametrize("n,t", [(4, 2), (6, 3), (2, 1)])
def test_construct_cyclic_reaches_optimum(n, t):
    scheme, p = construct_cyclic("cyclic", n, t)
    r = verify_capacity_achieving(scheme, p)
    assert r.all_passed
    assert r.rate == capacity(n // t, 2)
    assert message_size_in_symbols(scheme) == optimal_message_size("cyclic", n, t) == alpha_of(p)


def test_construct_disjoint_budget_reported():
    with pytest.raises(BudgetExhausted):
        construct_cyclic("disjoint_cyclic", [4, 2], [2, 1], budget=2000)


def test_prior_sizes():
    assert prior_message_size("cyclic", 4, 2, 2) == 16
    assert prior_message_size("disjoint_cyclic", [4, 2], [2, 1], 2) == 64
    assert prior_message_size("cyclic", 7, 3, 1) == 7
    with pytest.raises(BadParams):
        prior_message_size("cyclic", 2, 3, 2)
    with pytest.raises(BadParams):
        prior_message_size("other", 1)


def test_optimal_sizes():
    assert optimal_message_size("cyclic", 4, 2) == 1
    assert optimal_message_size("disjoint_cyclic", [4, 2], [2, 1]) == 3
    assert optimal_message_size("disjoint_cyclic", [4, 2], [2, 1]) == closed_form_bound("disjoint_cyclic", [4, 2], [2, 1])
    with pytest.raises(NotDivisible):
        optimal_message_size("cyclic", 5, 2)


def test_prior_to_optimal_ratio_grows():
    ratios = [prior_message_size("cyclic", n, 2, 2) / optimal_message_size("cyclic", n, 2) for n in (4, 6, 8, 10)]
    assert ratios[0] == 16
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


def test_disjoint_selection_matches_alpha():
    p = gen_disjoint([4, 2], [2, 1], "cyclic")
    sel = select_noncolluding("disjoint_cyclic", [4, 2], [2, 1])
    assert len(sel.active) - 1 == alpha_of(p)
