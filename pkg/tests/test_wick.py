import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import i0

from padicqft.green import green_apply
from padicqft.lattice import LatticeField, LatticeGeometry, ball_indicator, random_field
from padicqft.noise import InteractionH, sample_gaussian_white
from padicqft.wick import (
    ChaosVector,
    KondratievNormParams,
    bessel_i0,
    chaos_eval,
    hermite_he,
    kondratiev_norm,
    os1_bound_check,
    permanent,
    phi_h,
    phi_h_convolved,
    s_transform,
    schwinger_from_chaos,
    series_exp,
    t_series_chaos,
    t_series_closed_form,
    t_transform,
    t_transform_via_s,
    wick_analytic,
    wick_exp,
    wick_exponential_norm_ratio,
    wick_monomial_eval,
    wick_power,
    wick_product,
)

GEO = LatticeGeometry(3, 1, 1)


def _random_chaos(rng, order, nterms=2):
    v = ChaosVector(GEO, order)
    for n in range(order + 1):
        for _ in range(nterms if n else 1):
            v.add_term(complex(rng.normal(), rng.normal()), [random_field(GEO, rng) for _ in range(n)])
    return v


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.integers(0, 10**6))
def test_permanent_matches_permutation_sum(n, seed):
    a = np.random.default_rng(seed).normal(size=(n, n))
    brute = sum(np.prod([a[i, s[i]] for i in range(n)]) for s in itertools.permutations(range(n)))
    assert permanent(a) == pytest.approx(brute, abs=1e-10)


def test_hermite_table():
    x = np.array([-1.5, 0.0, 2.0])
    assert np.allclose(hermite_he(2, x), x**2 - 1)
    assert np.allclose(hermite_he(4, x), x**4 - 6 * x**2 + 3)


def test_series_exp_of_linear():
    assert np.allclose(series_exp([0, 2.0], 4), [2.0**n / math.factorial(n) for n in range(5)])


def test_bessel_i0_against_scipy():
    for x in (0.0, 0.25, 0.5, 1.0, 3.0):
        assert bessel_i0(x) == pytest.approx(float(i0(x)), rel=1e-14)


def test_s_transform_of_exponential(rng):
    g, f = random_field(GEO, rng), random_field(GEO, rng)
    e = ChaosVector.wick_exponential(g, 12)
    assert s_transform(e, f) == pytest.approx(np.exp(g.pairing(f)), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_s_is_a_wick_homomorphism(seed):
    rng = np.random.default_rng(seed)
    a, b = _random_chaos(rng, 2), _random_chaos(rng, 2)
    f = random_field(GEO, rng)
    lhs = s_transform(wick_product(a, b), f)
    assert abs(lhs - s_transform(a, f) * s_transform(b, f)) <= 1e-10 * (1 + abs(lhs))


def test_wick_product_is_commutative(rng):
    a, b = _random_chaos(rng, 2), _random_chaos(rng, 2)
    f = random_field(GEO, rng)
    assert s_transform(wick_product(a, b), f) == pytest.approx(s_transform(wick_product(b, a), f))


def test_t_routes_agree(rng):
    phi = _random_chaos(rng, 3)
    g = random_field(GEO, rng) * 0.3
    assert t_transform(phi, g) == pytest.approx(t_transform_via_s(phi, g), rel=1e-12)


def test_wick_square_is_hermite(rng):
    g = random_field(GEO, rng)
    W = sample_gaussian_white(GEO, seed=4, n_samples=300)
    sq = chaos_eval(wick_power(ChaosVector.first_order(g, 2), 2, 2), W)
    assert np.abs(sq - wick_monomial_eval(g, 2, W)).max() < 1e-10 * (1 + np.abs(sq).max())


def test_wick_product_of_two_pairings(rng):
    a, b = random_field(GEO, rng), random_field(GEO, rng)
    W = sample_gaussian_white(GEO, seed=8, n_samples=50)
    prod = chaos_eval(wick_product(ChaosVector.first_order(a, 2), ChaosVector.first_order(b, 2)), W)
    expected = W.pair(a) * W.pair(b) - a.pairing(b)
    assert np.allclose(prod, expected)


def test_wick_exp_matches_analytic_power_series(rng):
    phi = ChaosVector.first_order(random_field(GEO, rng), 4)
    coeffs = [1 / math.factorial(n) for n in range(5)]
    f = random_field(GEO, rng)
    assert s_transform(wick_exp(phi, 4), f) == pytest.approx(s_transform(wick_analytic(coeffs, 0, phi, 4), f))


def test_wick_exponential_norm_boundary():
    g = ball_indicator(GEO)
    params = KondratievNormParams(1, 2)
    ratio, div = wick_exponential_norm_ratio(g * 0.5, params)
    assert ratio == pytest.approx(1.0, rel=1e-12)
    assert div
    ratio, div = wick_exponential_norm_ratio(g * 0.49, params)
    assert ratio < 1 and not div


def test_norm_is_positive_and_homogeneous(rng):
    phi = _random_chaos(rng, 2)
    params = KondratievNormParams(1, 1)
    n1 = kondratiev_norm(phi, params)
    assert n1 > 0
    assert kondratiev_norm(phi.scale(3.0), params) == pytest.approx(3 * n1)


HS = [InteractionH((1.0,)), InteractionH((0.0, 0.5)), InteractionH((0.0, 0.0, 0.3))]


@pytest.mark.parametrize("h", HS, ids=["linear", "quadratic", "cubic"])
def test_white_noise_density_closed_form(h, rng):
    phi = phi_h(h, GEO, 4)
    g = random_field(GEO, rng) * 0.4
    a = t_series_chaos(phi, g, 4)
    b = t_series_closed_form(h, g, 4)
    assert np.allclose(a, b, rtol=1e-8, atol=1e-12)
    assert phi.expectation == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("h", HS, ids=["linear", "quadratic", "cubic"])
def test_convolved_density_closed_form(h, small_green, rng):
    phi = phi_h_convolved(h, small_green, GEO, 4)
    g = random_field(GEO, rng) * 0.4
    a = t_series_chaos(phi, g, 4)
    b = t_series_closed_form(h, g, 4, small_green)
    assert np.allclose(a, b, rtol=1e-8, atol=1e-12)
    assert phi.expectation == pytest.approx(1.0, abs=1e-14)


def test_free_two_point_function_from_chaos(small_green, rng):
    phi = phi_h_convolved(InteractionH(()), small_green, GEO, 2)
    f, g = random_field(GEO, rng), random_field(GEO, rng)
    expected = green_apply(small_green, f).pairing(green_apply(small_green, g))
    assert schwinger_from_chaos(phi, [f, g]) == pytest.approx(expected, rel=1e-12)


def test_os1_bound_holds(small_green, rng):
    phi = phi_h_convolved(InteractionH((0.0, 0.3)), small_green, GEO, 4)
    fs = [random_field(GEO, rng) for _ in range(4)]
    rep = os1_bound_check(phi, KondratievNormParams(1, 1), [fs[:n] for n in range(1, 5)])
    assert rep.holds
    assert rep.i0 < 1.3


def test_truncated_vector_refuses_higher_orders(small_green):
    phi = phi_h_convolved(InteractionH((0.0, 0.0, 0.0, 0.0, 1.0)), small_green, GEO, 4)
    assert phi.truncated and phi.exact_through == 4
    with pytest.raises(ValueError):
        schwinger_from_chaos(phi, [ball_indicator(GEO)] * 5)


def test_field_pairing_of_chaos_is_linear(rng):
    g = random_field(GEO, rng)
    phi = ChaosVector.first_order(g, 1)
    f = LatticeField(GEO, np.ones(GEO.shape))
    assert s_transform(phi, f) == pytest.approx(g.integral())
