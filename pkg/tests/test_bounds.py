import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsehw import bounds
from sparsehw.bounds import (
    BoundEvaluation,
    ErrorBounds,
    MeanVectors,
    SubGaussianParams,
    e1_e2_bounded_error,
    e1_e2_me_entry,
    e1_e2_missing_entry,
    e1_e2_noncentered,
    hoeffding_tail,
    hw_tail_bounded_error,
    hw_tail_centered,
    hw_tail_noncentered,
    threshold_complete,
    threshold_me,
    threshold_missing,
)
from sparsehw.errors import (
    DegenerateConditionError,
    DimensionError,
    DomainError,
    StructureError,
)
from sparsehw.norms import CoefficientMatrix, MaskMoments

import oracles

UNIT = SubGaussianParams(1.0, 1.0)


def _random_masks(rng, n):
    pi1, pi2 = rng.uniform(0.05, 1.0, n), rng.uniform(0.05, 1.0, n)
    lo, hi = np.maximum(0, pi1 + pi2 - 1), np.minimum(pi1, pi2)
    return pi1, pi2, lo + rng.random(n) * (hi - lo)


# ---------------------------------------------------------------- domain types


def test_subgaussian_params_must_be_positive():
    with pytest.raises(DomainError):
        SubGaussianParams(0.0, 1.0)


def test_error_bounds_must_be_positive():
    with pytest.raises(DomainError):
        ErrorBounds([1.0, 0.0], [1.0, 1.0])
    with pytest.raises(DimensionError):
        ErrorBounds([1.0], [1.0, 1.0])


def test_mean_vectors_must_be_finite():
    with pytest.raises(DomainError):
        MeanVectors([np.inf], [0.0])


# ---------------------------------------------------------------- centred tails


def test_centered_tail_at_zero_is_two_before_clamping():
    tb = hw_tail_centered(1e-12, UNIT, np.eye(3), MaskMoments.ones(3))
    assert tb.raw == pytest.approx(2.0)
    assert tb.value == 1.0


def test_centered_tail_hand_value():
    # ||A||_{F,pi} = ||A||_2 = 1 with K = c = 1 at t = 1
    A = np.array([[1.0]])
    tb = hw_tail_centered(1.0, UNIT, A, MaskMoments.ones(1), c=1.0)
    assert tb.raw == pytest.approx(2 * math.exp(-1), rel=1e-14)


def test_diagonal_structure_hand_value():
    tb = hw_tail_centered(2.0, UNIT, np.eye(2), MaskMoments.ones(2), c=1.0, structure="diagonal")
    assert tb.raw == pytest.approx(2 * math.exp(-2), rel=1e-14)


def test_structure_mismatch_raises():
    with pytest.raises(StructureError):
        hw_tail_centered(1.0, UNIT, np.ones((2, 2)), MaskMoments.ones(2), structure="diagonal")
    with pytest.raises(StructureError):
        hw_tail_centered(1.0, UNIT, np.eye(2), MaskMoments.ones(2), structure="off-diagonal")
    with pytest.raises(DomainError):
        hw_tail_centered(1.0, UNIT, np.eye(2), MaskMoments.ones(2), structure="banded")


def test_off_diagonal_structure_uses_marginal_products():
    A = np.array([[0.0, 2.0], [3.0, 0.0]])
    m = MaskMoments([0.5, 0.4], [0.3, 0.6], [0.2, 0.3])
    ev = bounds.centered_evaluation(UNIT, A, m, structure="off-diagonal")
    assert ev.terms["variance"] == pytest.approx(4 * 0.5 * 0.6 + 9 * 0.4 * 0.3)
    assert ev.E2 == pytest.approx(3.0, rel=1e-9)
    full = bounds.centered_evaluation(UNIT, A, m)
    assert full.E1 == pytest.approx(ev.E1)


def test_tail_rejects_negative_t():
    with pytest.raises(DomainError):
        hw_tail_centered(-1.0, UNIT, np.eye(2), MaskMoments.ones(2))


def test_tail_vectorised_over_grid():
    ev = BoundEvaluation(E1=1.0, E2=1.0, c=1.0, d=2.0)
    t = np.array([0.5, 1.0, 2.0])
    tb = ev.tail(t)
    np.testing.assert_allclose(tb.raw, 2 * np.exp(-np.minimum(t**2, t)))
    assert tb.value.shape == (3,)


# ---------------------------------------------------------------- evaluation shape


@settings(max_examples=60, deadline=None)
@given(E1=st.floats(1e-3, 1e3), E2=st.floats(1e-3, 1e3), c=st.floats(1e-3, 10), d=st.floats(1.01, 20))
def test_tail_nonincreasing_and_kink(E1, E2, c, d):
    ev = BoundEvaluation(E1, E2, c, d)
    grid = np.linspace(1e-6, 5 * ev.kink, 200)
    raw = ev.tail(grid).raw
    assert np.all(np.diff(raw) <= 1e-15)
    k = ev.kink
    below, above = 0.5 * k, 2.0 * k
    assert ev.exponent(below) == pytest.approx(below**2 / E1, rel=1e-12)
    assert ev.exponent(above) == pytest.approx(above / E2, rel=1e-12)
    assert ev.exponent(k) == pytest.approx(k**2 / E1, rel=1e-12)


def test_noncentered_tail_examples():
    ev = BoundEvaluation(1.0, 1.0, c=1.0, d=2.0)
    assert hw_tail_noncentered(1.0, ev).raw == pytest.approx(2 * math.exp(-1))
    assert hw_tail_noncentered(1e-12, ev).raw == pytest.approx(2.0)


# ---------------------------------------------------------------- non-centred E-values


def test_noncentered_zero_mean_collapse():
    rng = np.random.default_rng(0)
    n = 6
    A = rng.standard_normal((n, n))
    pi1, pi2, pi12 = _random_masks(rng, n)
    m = MaskMoments(pi1, pi2, pi12)
    sg = SubGaussianParams(1.3, 0.7)
    ev = e1_e2_noncentered(sg, A, MeanVectors.zeros(n), m)
    cen = bounds.centered_evaluation(sg, A, m)
    assert ev.E1 == pytest.approx(cen.E1, rel=1e-14)
    assert ev.E2 == pytest.approx(cen.E2, rel=1e-12)


def test_noncentered_degenerate_masks_kill_v_terms():
    n = 4
    A = np.random.default_rng(1).standard_normal((n, n))
    m = MaskMoments([1, 0, 1, 1], [1, 1, 0, 1], [1, 0, 0, 1])
    ev = e1_e2_noncentered(UNIT, A, MeanVectors(np.ones(n), np.ones(n)), m)
    for name, v in {**ev.terms1, **ev.terms2}.items():
        if name.startswith("V"):
            assert v == 0.0


def test_noncentered_identity_example():
    mu = MeanVectors([1.0, 1.0], [1.0, 1.0])
    ev = e1_e2_noncentered(UNIT, np.eye(2), mu, MaskMoments.ones(2))
    e1, e2 = oracles.noncentered_terms(np.eye(2), 1, 1, [1, 1], [1, 1], [1, 1], [1, 1], [1, 1])
    assert ev.E1 == pytest.approx(max(e1)) and ev.E1 == pytest.approx(2.0)
    assert ev.E2 == pytest.approx(max(e2)) and ev.E2 == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 8))
def test_noncentered_terms_match_brute_force(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    pi1, pi2, pi12 = _random_masks(rng, n)
    mu1, mu2 = rng.normal(0, 2, n), rng.normal(0, 2, n)
    K1, K2 = rng.uniform(0.2, 3, 2)
    ev = e1_e2_noncentered(SubGaussianParams(K1, K2), A, MeanVectors(mu1, mu2),
                           MaskMoments(pi1, pi2, pi12))
    e1, e2 = oracles.noncentered_terms(A, K1, K2, mu1, mu2, pi1, pi2, pi12)
    np.testing.assert_allclose(list(ev.terms1.values()), e1, rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(list(ev.terms2.values()), e2, rtol=1e-8, atol=1e-12)
    assert ev.E1 == pytest.approx(max(e1), rel=1e-12)


def test_noncentered_symmetric_under_label_swap():
    rng = np.random.default_rng(5)
    n = 7
    G = rng.standard_normal((n, n))
    A = G + G.T
    mu = rng.normal(size=n)
    pi = rng.uniform(0.2, 0.9, n)
    m = MaskMoments(pi, pi, pi)
    sg = SubGaussianParams(1.1, 1.1)
    ev = e1_e2_noncentered(sg, A, MeanVectors(mu, mu), m)
    t1 = list(ev.terms1.values())
    # swapping the blocks exchanges the paired terms
    for i, j in ((2, 3), (4, 5), (6, 7)):
        assert t1[i] == pytest.approx(t1[j], rel=1e-12)
    t2 = list(ev.terms2.values())
    assert t2[2] == pytest.approx(t2[3], rel=1e-8)


def test_noncentered_dimension_mismatch():
    with pytest.raises(DimensionError):
        e1_e2_noncentered(UNIT, np.eye(3), MeanVectors.zeros(2), MaskMoments.ones(3))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 12))
def test_noncentered_with_zero_mean_equals_centered_tail(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    pi1, pi2, pi12 = _random_masks(rng, n)
    m = MaskMoments(pi1, pi2, pi12)
    ev = bounds.noncentered_evaluation(UNIT, A, MeanVectors.zeros(n), m, c=0.3, d=2.0)
    t = np.linspace(0.01, 10, 30)
    np.testing.assert_allclose(
        hw_tail_noncentered(t, ev).raw, hw_tail_centered(t, UNIT, A, m, c=0.3).raw, rtol=1e-10
    )


# ---------------------------------------------------------------- bounded errors


def test_bounded_tail_unit_bounds_match_centered():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((5, 5))
    b = ErrorBounds(np.ones(5), np.ones(5))
    t = np.linspace(0.1, 8, 20)
    np.testing.assert_allclose(
        hw_tail_bounded_error(t, UNIT, A, b).raw,
        hw_tail_centered(t, UNIT, A, MaskMoments.ones(5)).raw,
        rtol=1e-12,
    )


def test_bounded_variance_scales_by_sixteen():
    one = bounds.bounded_error_evaluation(UNIT, np.eye(3), ErrorBounds(np.ones(3), np.ones(3)))
    two = bounds.bounded_error_evaluation(UNIT, np.eye(3), ErrorBounds(2 * np.ones(3), 2 * np.ones(3)))
    assert two.E1 == pytest.approx(16 * one.E1)
    assert hw_tail_bounded_error(1e6, UNIT, np.eye(3), ErrorBounds(np.ones(3), np.ones(3))).raw < 1e-100


def test_bounded_noncentered_zero_mean_collapse():
    rng = np.random.default_rng(3)
    n = 5
    A = rng.standard_normal((n, n))
    B1, B2 = rng.uniform(0.5, 2, n), rng.uniform(0.5, 2, n)
    ev = e1_e2_bounded_error(UNIT, A, MeanVectors.zeros(n), ErrorBounds(B1, B2),
                             MeanVectors(B1 / 2, B2 / 2))
    ref = bounds.bounded_error_evaluation(UNIT, A, ErrorBounds(B1, B2))
    assert ev.E1 == pytest.approx(ref.E1, rel=1e-13)
    assert ev.E2 == pytest.approx(ref.E2, rel=1e-12)


def test_bounded_identity_example():
    ev = e1_e2_bounded_error(UNIT, np.eye(2), MeanVectors(np.ones(2), np.ones(2)),
                             ErrorBounds(np.ones(2), np.ones(2)), MeanVectors(np.ones(2), np.ones(2)))
    assert ev.E2 == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 8))
def test_bounded_terms_match_brute_force(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    mu1, mu2 = rng.normal(0, 2, n), rng.normal(0, 2, n)
    B1, B2 = rng.uniform(0.2, 3, n), rng.uniform(0.2, 3, n)
    u1, u2 = B1 * rng.random(n), B2 * rng.random(n)
    K1, K2 = rng.uniform(0.2, 3, 2)
    ev = e1_e2_bounded_error(SubGaussianParams(K1, K2), A, MeanVectors(mu1, mu2),
                             ErrorBounds(B1, B2), MeanVectors(u1, u2))
    e1, e2 = oracles.bounded_terms(A, K1, K2, mu1, mu2, B1, B2, u1, u2)
    np.testing.assert_allclose(list(ev.terms1.values()), e1, rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(list(ev.terms2.values()), e2, rtol=1e-8, atol=1e-12)


def test_bounded_shares_terms_with_noncentered_at_unit_moments():
    # with pi = u = B = 1 the Bernoulli variance terms vanish and the rest coincide
    rng = np.random.default_rng(8)
    n = 5
    A = rng.standard_normal((n, n))
    mu1, mu2 = rng.normal(size=n), rng.normal(size=n)
    ones = np.ones(n)
    nc = e1_e2_noncentered(UNIT, A, MeanVectors(mu1, mu2), MaskMoments.ones(n))
    be = e1_e2_bounded_error(UNIT, A, MeanVectors(mu1, mu2), ErrorBounds(ones, ones),
                             MeanVectors(ones, ones))
    t_nc, t_be = list(nc.terms1.values()), list(be.terms1.values())
    assert t_be[0] == pytest.approx(t_nc[0])
    assert t_be[3] == pytest.approx(t_nc[4])
    assert t_be[4] == pytest.approx(t_nc[5])
    assert nc.terms2["K1 K2 |A|_2"] == pytest.approx(be.terms2["K1 K2 |A|_2"])


# ---------------------------------------------------------------- Hoeffding


def test_hoeffding_examples():
    assert hoeffding_tail(1e-12, 1.0, [1.0]).raw == pytest.approx(2.0)
    assert hoeffding_tail(1.0, 1.0, [1.0], c=1.0).raw == pytest.approx(2 * math.exp(-1))
    a = np.array([0.3, -0.4, 1.2])
    base = math.log(2 / hoeffding_tail(2.0, 1.0, a, c=1.0).raw)
    doubled = math.log(2 / hoeffding_tail(2.0, 1.0, 2 * a, c=1.0).raw)
    assert doubled == pytest.approx(base / 4)
    with pytest.raises(DomainError):
        hoeffding_tail(1.0, 1.0, [0.0, 0.0])


# ---------------------------------------------------------------- thresholds


def test_threshold_complete_example():
    plan = threshold_complete(101, 10, 10, 0.05, UNIT, C1=1.0)
    assert plan.cutoff == pytest.approx(math.sqrt(math.log(2000) / 100), rel=1e-14)
    assert plan.cutoff == pytest.approx(0.27570, abs=5e-6)
    quad = threshold_complete(401, 10, 10, 0.05, UNIT)
    assert quad.cutoff == pytest.approx(plan.cutoff / 2, rel=1e-14)


def test_threshold_complete_doubling_pq():
    a = threshold_complete(50, 4, 5, 0.1, UNIT)
    b = threshold_complete(50, 8, 5, 0.1, UNIT)
    ratio = math.sqrt(math.log(2 * 20 / 0.1) / math.log(20 / 0.1))
    assert b.cutoff / a.cutoff == pytest.approx(ratio, rel=1e-14)


def test_threshold_complete_alpha_at_one_over_pq():
    plan = threshold_complete(30, 5, 5, 1 / 25, UNIT)
    assert plan.cutoff == pytest.approx(math.sqrt(math.log(625) / 29))


@pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5, -0.1])
def test_threshold_rejects_bad_alpha(alpha):
    with pytest.raises(DomainError):
        threshold_complete(10, 2, 2, alpha, UNIT)


def test_threshold_rejects_n_below_two():
    with pytest.raises(DomainError):
        threshold_complete(1, 2, 2, 0.05, UNIT)


def test_threshold_monotonicity():
    c = [threshold_complete(n, 5, 5, 0.05, UNIT).cutoff for n in (10, 20, 40)]
    assert c[0] > c[1] > c[2]
    c = [threshold_complete(30, p, 5, 0.05, UNIT).cutoff for p in (1, 2, 4)]
    assert c[0] < c[1] < c[2]
    c = [threshold_complete(30, 5, 5, a, UNIT).cutoff for a in (0.01, 0.05, 0.2)]
    assert c[0] > c[1] > c[2]


def test_f2_g2_example():
    f2, g2 = bounds.f2_g2(2.0, 2.0, 1.0, 1.0)
    assert f2 == 4.0 and g2 == 0.25


def test_threshold_missing_reduces_at_full_observation():
    sg = SubGaussianParams(2.0, 2.0)
    plan = threshold_missing(101, 10, 10, 0.05, sg, (1.0, 1.0), (1.0, 1.0))
    comp = threshold_complete(101, 10, 10, 0.05, sg)
    assert plan.rate == pytest.approx(comp.rate)
    assert plan.scale == 4.0


def test_threshold_missing_min_factor():
    plan = threshold_missing(101, 10, 10, 0.05, UNIT, (1.0, 1.0), (0.5, 0.5))
    assert plan.details["pi_factor"] == 0.25


def test_threshold_missing_condition():
    sg = SubGaussianParams(2.0, 2.0)
    L = math.log(100 / 0.05)
    # (n-1)/L > d2 / (g2 * factor) with g2 = 0.25, factor = 1
    n_edge = int(math.floor(4 * L)) + 1
    assert threshold_missing(n_edge + 1, 10, 10, 0.05, sg, (1, 1), (1, 1)).condition_ok
    assert not threshold_missing(n_edge - 2, 10, 10, 0.05, sg, (1, 1), (1, 1)).condition_ok


def test_threshold_missing_degenerate_g2():
    with pytest.raises(DegenerateConditionError):
        threshold_missing(100, 5, 5, 0.05, UNIT, (0.0, 1.0), (0.5, 0.7))
    plan = threshold_missing(100, 5, 5, 0.05, UNIT, (0.0, 1.0), (0.5, 0.7), strict=False)
    assert plan.condition_ok is None and plan.cutoff > 0


def test_threshold_missing_rejects_zero_pi():
    with pytest.raises(DomainError):
        threshold_missing(100, 5, 5, 0.05, UNIT, (1, 1), (0.0, 0.5))


def test_threshold_me_unit_collapse():
    f3, g3 = bounds.f3_g3(1, 1, 1, 1, 1, 1, 1, 1)
    assert f3 == 1 and g3 == 1
    plan = threshold_me(101, 10, 10, 0.05, UNIT, (1, 1), (1, 1), (1, 1))
    assert plan.rate == pytest.approx(threshold_complete(101, 10, 10, 0.05, UNIT).rate)
    assert plan.scale == 1


def test_threshold_me_monotone_in_bx():
    vals = [bounds.f3_g3(1.0, 1.5, 0.7, 2.0, bx, 1.2)[0] for bx in (0.5, 1.0, 2.0)]
    assert vals[0] <= vals[1] <= vals[2]
    # every term but the last carries B_X, and the last is dominated at u_X = B_X
    assert bounds.f3_g3(1.0, 1.5, 0.7, 2.0, 2.0, 1.2)[0] == pytest.approx(
        2 * bounds.f3_g3(1.0, 1.5, 0.7, 2.0, 1.0, 1.2)[0]
    )


def test_threshold_me_rate_uses_squared_u():
    plan = threshold_me(101, 5, 5, 0.05, UNIT, (1, 1), (1, 1), (0.5, 0.6))
    L = math.log(25 / 0.05)
    assert plan.rate == pytest.approx(math.sqrt(L / (100 * min(0.25, 0.6**4))))


def test_threshold_me_zero_means_have_infinite_g_parts():
    _, g3 = bounds.f3_g3(1, 1, 0, 0, 2, 2)
    assert g3 == 1.0


def test_threshold_me_rejects_zero_u():
    with pytest.raises(DomainError):
        threshold_me(100, 5, 5, 0.05, UNIT, (1, 1), (1, 1), (0.0, 0.5))


# ---------------------------------------------------------------- entrywise E-values


def test_missing_entry_full_observation():
    n = 37
    sg = SubGaussianParams(1.4, 0.8)
    ev = e1_e2_missing_entry(n, sg, (0.0, 0.0), (1.0, 1.0, 1.0))
    assert ev.E1 == pytest.approx((1.4 * 0.8) ** 2 / (n - 1), rel=1e-14)
    assert ev.terms1["mask_mismatch"] == 0.0


def test_missing_entry_independent_masks_cancel():
    ev = e1_e2_missing_entry(20, UNIT, (1.0, 2.0), (0.42, 0.6, 0.7))
    assert ev.terms1["mask_mismatch"] == pytest.approx(0.0, abs=1e-15)


def test_missing_entry_rejects_zero_probability():
    with pytest.raises(DomainError):
        e1_e2_missing_entry(20, UNIT, (0, 0), (0.0, 0.5, 0.5))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 500))
def test_missing_entry_matches_formula(seed, n):
    rng = np.random.default_rng(seed)
    KX, KY = rng.uniform(0.1, 3, 2)
    mx, my = rng.normal(0, 2, 2)
    px, py = rng.uniform(0.05, 1, 2)
    pkl = rng.uniform(max(0, px + py - 1), min(px, py))
    if pkl <= 0:
        pkl = min(px, py)
    ev = e1_e2_missing_entry(n, SubGaussianParams(KX, KY), (mx, my), (pkl, px, py))
    e1, e2 = oracles.missing_entry(n, KX, KY, mx, my, pkl, px, py)
    assert ev.E1 == pytest.approx(e1, rel=1e-12)
    assert ev.E2 == pytest.approx(e2, rel=1e-12)


def test_me_entry_unit_collapse():
    n = 12
    ev = e1_e2_me_entry(n, UNIT, (1.0, 1.0), (1.0, 1.0, 1.0), (1.0, 1.0))
    assert ev.E1 == pytest.approx(1 / (n - 1))
    assert ev.terms1["error_mismatch"] == 0.0


def test_me_entry_zero_mean_keeps_leading_term():
    ev = e1_e2_me_entry(10, SubGaussianParams(1.5, 2.0), (0.0, 0.0), (0.3, 0.5, 0.6), (1.2, 0.9))
    w = 1 / (10 * 0.09) + 1 / (90 * 0.25 * 0.36)
    assert ev.E1 == pytest.approx((1.5 * 2.0 * 1.2 * 0.9) ** 2 * w)


def test_me_entry_cancels_at_product_moment():
    ev = e1_e2_me_entry(10, UNIT, (1.0, 1.0), (0.3, 0.5, 0.6), (1.0, 1.0))
    assert ev.terms1["error_mismatch"] == pytest.approx(0.0, abs=1e-15)


def test_me_entry_with_unit_errors_matches_missing_entry():
    for mu in [(0.0, 0.0), (0.3, -1.2), (2.0, 0.5)]:
        a = e1_e2_me_entry(25, SubGaussianParams(0.9, 1.3), mu, (0.5, 0.7, 0.8), (1.0, 1.0))
        b = e1_e2_missing_entry(25, SubGaussianParams(0.9, 1.3), mu, (0.5, 0.7, 0.8))
        # with unit bounds the leading E1 branch and E2 agree term for term
        assert a.terms1["leading"] == pytest.approx(b.terms1["leading"], rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 500))
def test_me_entry_matches_formula(seed, n):
    rng = np.random.default_rng(seed)
    KX, KY = rng.uniform(0.1, 3, 2)
    mx, my = rng.normal(0, 2, 2)
    bx, by = rng.uniform(0.2, 3, 2)
    ux, uy = bx * rng.uniform(0.05, 1), by * rng.uniform(0.05, 1)
    ukl = rng.uniform(0.01, bx * by)
    ev = e1_e2_me_entry(n, SubGaussianParams(KX, KY), (mx, my), (ukl, ux, uy), (bx, by))
    e1, e2 = oracles.me_entry(n, KX, KY, mx, my, ukl, ux, uy, bx, by)
    assert ev.E1 == pytest.approx(e1, rel=1e-12)
    assert ev.E2 == pytest.approx(e2, rel=1e-12)


def test_closed_form_matrix_accepted_everywhere():
    from sparsehw.norms import centering_coefficient_matrix

    A = centering_coefficient_matrix(30)
    ev = bounds.centered_evaluation(UNIT, A, MaskMoments.ones(30))
    assert ev.E1 == pytest.approx(1 / 29)
    assert ev.E2 == pytest.approx(1 / 29)
    ev2 = e1_e2_noncentered(UNIT, A, MeanVectors(np.ones(30), np.ones(30)), MaskMoments.ones(30))
    assert ev2.E1 == pytest.approx(1 / 29, rel=1e-12)
    assert isinstance(A, CoefficientMatrix)
