import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fareyflow.congruence import ResiduePairSet, den_congruent, from_residue_pairs, num_not_congruent
from fareyflow.est import (
    ESTConfig, Interval, IntervalUnion, build_est_union, detect_overlap_depth, est_convergence,
    est_lambda, est_limit_section_mc, measure, small_alpha_limit,
)
from fareyflow.farey import DomainError, totients

from oracles import depth_brute, est_brute

SMALL = 12 * 0.01 / math.pi**2 * math.log(2)


def test_build_union_examples():
    u = build_est_union(ESTConfig(1, F(1, 10), 2))
    assert u == IntervalUnion([Interval(0, F(1, 10)), Interval(F(19, 40), F(21, 40)), Interval(F(9, 10), 1)])
    assert measure(u) == F(1, 4)
    assert measure(build_est_union(ESTConfig(1, F(1, 2), 1))) == 1
    assert measure(build_est_union(ESTConfig(2, F(1, 100), 1))) == F(1, 200)


def test_measure_examples():
    assert measure(IntervalUnion()) == 0
    assert measure(IntervalUnion([Interval(0, F(1, 4)), Interval(F(1, 2), 1)])) == F(3, 4)


def test_union_normalises():
    u = IntervalUnion([Interval(F(1, 2), 1), Interval(0, F(1, 4)), Interval(F(1, 4), F(1, 3))])
    assert [(iv.lo, iv.hi) for iv in u] == [(0, F(1, 3)), (F(1, 2), 1)]
    assert u.union(u) == u
    with pytest.raises(ValueError):
        Interval(1, 0)


def test_config_validation():
    for bad in (dict(n=0, alpha=1, c=2), dict(n=3, alpha=0, c=2), dict(n=3, alpha=1, c=F(1, 2))):
        with pytest.raises(DomainError):
            ESTConfig(**bad)
    with pytest.raises(DomainError):
        ESTConfig(3, 1, 2, I=(F(1, 2), F(1, 3)))


configs = st.tuples(
    st.integers(1, 25),
    st.fractions(F(1, 1000), 2, max_denominator=1000),
    st.fractions(1, 3, max_denominator=12),
    st.sampled_from([1, 2, 3, 4]),
    st.fractions(0, 1, max_denominator=20),
    st.fractions(0, 1, max_denominator=20),
)


@given(configs)
def test_exact_measure_matches_brute(cfg):
    n, alpha, c, m, x, y = cfg
    lo, hi = min(x, y), max(x, y)
    M = den_congruent(m, 1)
    A = [(a, 1) for a in range(m)]
    want = est_brute(n, alpha, c, m, A, (lo, hi))
    c_ = ESTConfig(n, alpha, c, M, (lo, hi))
    assert est_lambda(c_) == want
    assert measure(build_est_union(c_)) == want
    assert want <= hi - lo


@given(configs)
def test_monotone_in_alpha_and_c(cfg):
    n, alpha, c, m, _, _ = cfg
    M = den_congruent(m, 1)
    base = est_lambda(ESTConfig(n, alpha, c, M))
    assert est_lambda(ESTConfig(n, alpha * 2, c, M)) >= base
    assert est_lambda(ESTConfig(n, alpha, c + F(1, 2), M)) >= base
    assert base <= 1


@given(configs, st.fractions(0, 1, max_denominator=50))
def test_additivity(cfg, cut):
    n, alpha, c, m, x, y = cfg
    lo, hi = min(x, y), max(x, y)
    mid = min(max(cut, lo), hi)
    M = num_not_congruent(m) if m > 1 else den_congruent(1, 0)
    whole = est_lambda(ESTConfig(n, alpha, c, M, (lo, hi)))
    parts = est_lambda(ESTConfig(n, alpha, c, M, (lo, mid))) + est_lambda(ESTConfig(n, alpha, c, M, (mid, hi)))
    assert whole == parts


def test_idempotent_union():
    u = build_est_union(ESTConfig(7, F(1, 3), 2, den_congruent(2, 1)))
    again = IntervalUnion(list(u) + list(u))
    assert again == u and measure(again) == measure(u)


def test_small_alpha_law():
    conv = est_convergence(F(1, 100), 2, None, None, [500, 1000, 2000])
    for _, lam in conv.table:
        assert abs(float(lam) / SMALL - 1) < 0.05
    assert conv.limit == conv.table[-1][1] and conv.delta == conv.table[-1][1] - conv.table[-2][1]
    # direct sum over n <= q <= 2n of 2 alpha phi(q)/q^2
    phi = totients(4000)
    q = np.arange(2000, 4001)
    direct = float(np.sum(2 * 0.01 * phi[q] / q.astype(float) ** 2))
    assert abs(float(conv.limit) / direct - 1) < 0.01


def test_thin_set_when_c_is_one():
    vals = [float(est_lambda(ESTConfig(n, F(1, 100), 1))) for n in (50, 200, 800)]
    for n, v in zip((50, 200, 800), vals):
        assert v <= 2 * 0.01 / n
    assert vals[0] > vals[1] > vals[2]


def test_half_interval_ratio():
    M = den_congruent(3, 1)
    full = est_lambda(ESTConfig(800, F(1, 20), 2, M))
    half = est_lambda(ESTConfig(800, F(1, 20), 2, M, (0, F(1, 2))))
    assert abs(float(half / full) - 0.5) < 0.03
    odd = num_not_congruent(3)
    full = est_lambda(ESTConfig(600, F(1, 20), 2, odd))
    part = est_lambda(ESTConfig(600, F(1, 20), 2, odd, (F(1, 5), F(7, 10))))
    assert abs(float(part / full) - 0.5) < 0.03


def test_overlap_depth_examples():
    assert detect_overlap_depth(F(1, 100), 2, None, 1000) == 0
    assert detect_overlap_depth(5, 2, None, 100) >= 1
    assert detect_overlap_depth(F(1, 2), 1, None, 30) >= 0


@given(st.integers(1, 30), st.fractions(F(1, 100), 3, max_denominator=100), st.fractions(1, 3, max_denominator=6),
       st.sampled_from([1, 2, 3]))
def test_overlap_depth_matches_brute(n, alpha, c, m):
    A = [(a, 1) for a in range(m)]
    assert detect_overlap_depth(alpha, c, den_congruent(m, 1), n) == depth_brute(n, alpha, c, m, A)


def test_section_mc_k0_closed_form():
    rng = np.random.default_rng(4)
    est, se = est_limit_section_mc(F(1, 100), 2, None, 0, 400_000, rng)
    assert abs(est - SMALL) < 3 * se
    M = den_congruent(3, 1)
    est, se = est_limit_section_mc(F(1, 100), 2, M, 0, 400_000, np.random.default_rng(5))
    assert abs(est - small_alpha_limit(0.01, 2, M)) < 3 * se
    assert small_alpha_limit(0.01, 2, M) == pytest.approx(0.375 * SMALL)


def test_section_mc_higher_k_consistent():
    # at small alpha the extra subset terms vanish, so K only adds zeros
    a = est_limit_section_mc(F(1, 100), 2, None, 0, 50_000, np.random.default_rng(1))
    b = est_limit_section_mc(F(1, 100), 2, None, 2, 50_000, np.random.default_rng(1))
    assert a == b


def test_section_mc_large_alpha_agrees_with_exact():
    alpha, c = F(1, 2), 2
    M = den_congruent(1, 0)
    K = detect_overlap_depth(alpha, c, M, 1500)
    assert K >= 1
    lam = float(est_lambda(ESTConfig(1500, alpha, c, M)))
    est, se = est_limit_section_mc(alpha, c, M, K, 300_000, np.random.default_rng(8))
    assert abs(est - lam) < max(0.05 * lam, 3 * se)


def test_section_mc_validation():
    with pytest.raises(ValueError):
        est_limit_section_mc(F(1, 100), 2, None, -1, 10, np.random.default_rng(0))
