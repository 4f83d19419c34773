import itertools
from fractions import Fraction as F

import pytest

from mbcr.bounds import (
    SystemParams,
    cut_coefficients,
    enumerate_cut_types,
    file_size_bound,
    gamma,
    mbcr_lower_bound,
    mbcr_point,
    optimal_tradeoff_lp,
    render,
    single_loss_bound,
    special_constraints,
    staged_cut_terms,
)
from mbcr.errors import UnsupportedRegimeError


def brute_compositions(k, r):
    out = []
    for s in range(1, k + 1):
        for parts in itertools.product(range(1, r + 1), repeat=s):
            if sum(parts) == k:
                out.append(parts)
    return sorted(out)


def test_gamma():
    assert gamma(3, 2, 2, 1) == 7
    assert gamma(2, 2, 2, 1) == 5
    assert gamma(4, 1, F(3, 2), 100) == 6


def test_lower_bound_worked_values():
    assert mbcr_lower_bound(SystemParams(8, 2, 2, 2)) == 5
    assert mbcr_lower_bound(SystemParams(15, 3, 3, 2)) == 7


def test_single_loss_worked_value():
    v = single_loss_bound(8, 2, 2)
    assert v == F(16, 3)
    assert render(v) == "16/3 (~5.333)"


def test_single_loss_k1():
    for d in range(1, 6):
        assert single_loss_bound(10, 1, d) == 10


def test_point_values():
    assert mbcr_point(SystemParams(15, 3, 3, 2)) == (2, 1)
    assert mbcr_point(SystemParams(8, 2, 2, 2)) == (2, 1)


def test_regime_errors():
    with pytest.raises(UnsupportedRegimeError):
        SystemParams(8, 3, 2, 2)
    with pytest.raises(UnsupportedRegimeError):
        single_loss_bound(8, 3, 2)
    with pytest.raises(UnsupportedRegimeError):
        special_constraints(3, 2, 2)


def test_identities_over_grid():
    for k in range(1, 6):
        for d in range(k, 9):
            for r in range(1, 6):
                for B in (1, 7, F(5, 3), k * (2 * d + r - k)):
                    p = SystemParams(B, k, d, r)
                    assert gamma(d, r, *mbcr_point(p)) == mbcr_lower_bound(p)
                    b1, b2 = mbcr_point(p)
                    assert b1 == 2 * b2
                if r == 1:
                    assert mbcr_lower_bound(SystemParams(B, k, d, 1)) == single_loss_bound(B, k, d)


def test_monotone_in_d():
    for k in range(1, 5):
        for r in range(1, 5):
            vals = [mbcr_lower_bound(SystemParams(100, k, d, r)) for d in range(k, k + 8)]
            if k == 1:
                # B(2d+r-1)/(2d+r-1): the whole file, whatever d is
                assert set(vals) == {100}
            else:
                assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("k,r", [(3, 2), (2, 2), (4, 1), (5, 3), (6, 6), (1, 4)])
def test_enumerate_matches_brute_force(k, r):
    got = enumerate_cut_types(k, r)
    assert sorted(got) == brute_compositions(k, r)
    assert got == sorted(got)


def test_enumerate_examples():
    assert set(enumerate_cut_types(3, 2)) == {(1, 1, 1), (1, 2), (2, 1)}
    assert set(enumerate_cut_types(2, 2)) == {(1, 1), (2,)}
    assert enumerate_cut_types(4, 1) == [(1, 1, 1, 1)]


def test_file_size_bound_examples():
    assert file_size_bound((1, 1, 1), 3, 2, 2, 1) == 15
    assert file_size_bound((2,), 2, 2, 2, 1) == 8
    k, d, r = 2, 2, 2
    assert file_size_bound((2,), d, r, 2, 1) == d * k * 2 + (r - k) * k * 1


def test_file_size_bound_all_ones_specialisation():
    for k in range(1, 7):
        for d in range(k, k + 3):
            for r in range(1, 5):
                b1, b2 = F(3, 2), F(7, 5)
                expected = (d * k - F(k * (k - 1), 2)) * b1 + (r * k - k) * b2
                assert file_size_bound((1,) * k, d, r, b1, b2) == expected


def test_staged_sum_equals_closed_form():
    """Stage-by-stage sum equals the collapsed algebraic bound for every type, k, r <= 6."""
    for k in range(1, 7):
        for r in range(1, 7):
            for d in (k, k + 2):
                for b1, b2 in ((F(2), F(1)), (F(3, 7), F(11, 4))):
                    for t in enumerate_cut_types(k, r):
                        assert sum(staged_cut_terms(t, d, r, b1, b2)) == file_size_bound(t, d, r, b1, b2)


def test_tightness_at_point():
    for k in range(1, 6):
        for d in range(k, 8):
            for r in range(1, 6):
                p = SystemParams(k * (2 * d + r - k), k, d, r)
                b1, b2 = mbcr_point(p)
                assert min(file_size_bound(t, d, r, b1, b2) for t in enumerate_cut_types(k, r)) == p.B


def test_special_constraints_examples():
    assert [(c.a, c.b) for c in special_constraints(2, 2, 2)] == [(3, 2), (4, 0)]
    cons = special_constraints(3, 3, 2)
    assert cons[1].cut_type == (2, 1)
    a, b = divmod(3, 2)
    assert (a, b) == (1, 1)
    # closed form coefficients for the (r,...,r,b) type
    k, d, r = 3, 3, 2
    assert (cons[1].a, cons[1].b) == (d * k - r * r * a * (a - 1) // 2 - a * b * r, r * k - a * r * r - b * b)


def test_special_constraints_subset_of_all():
    for k in range(1, 6):
        for r in range(1, 6):
            types = set(enumerate_cut_types(k, r))
            for c in special_constraints(k, k + 1, r):
                assert c.cut_type in types
                assert (c.a, c.b) == cut_coefficients(c.cut_type, k + 1, r)


def test_lp_examples():
    res = optimal_tradeoff_lp(SystemParams(15, 3, 3, 2))
    assert (res.beta1, res.beta2, res.gamma) == (2, 1, 7) and res.unique
    res = optimal_tradeoff_lp(SystemParams(8, 2, 2, 2))
    assert (res.point, res.gamma) == ((2, 1), 5) and res.unique


def test_lp_grid_against_closed_form():
    for k in range(1, 6):
        for d in range(k, 9):
            for r in range(1, 6):
                p = SystemParams(k * (2 * d + r - k), k, d, r)
                res = optimal_tradeoff_lp(p)
                assert res.gamma == mbcr_lower_bound(p)
                assert res.point == mbcr_point(p)
                # uniqueness fails exactly in the degenerate corners
                assert res.unique == (k > 1 and r > 1)


def test_lp_degenerate_faces():
    # k = 1: the single constraint is parallel to the objective
    res = optimal_tradeoff_lp(SystemParams(9, 1, 3, 3))
    assert not res.unique
    assert res.vertices == ((0, F(9, 2)), (3, 0))
    # r = 1: beta2 has no weight anywhere
    res = optimal_tradeoff_lp(SystemParams(10, 2, 2, 1))
    assert not res.unique and res.vertices == ((F(10, 3), 0),)
    assert res.point == (F(10, 3), F(5, 3))


def test_lp_against_float_solver():
    scipy_opt = pytest.importorskip("scipy.optimize")
    for k in range(1, 5):
        for d in range(k, k + 3):
            for r in range(1, 5):
                p = SystemParams(k * (2 * d + r - k) + 3, k, d, r)
                res = optimal_tradeoff_lp(p)
                cons = res.constraints
                out = scipy_opt.linprog(
                    c=[d, r - 1],
                    A_ub=[[-c.a, -c.b] for c in cons],
                    b_ub=[-float(p.B)] * len(cons),
                    bounds=[(0, None), (0, None)],
                    method="highs",
                )
                assert out.status == 0
                assert out.fun == pytest.approx(float(res.gamma), rel=1e-9)
