import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poisson_interp.acceptance import parseval_oracle
from poisson_interp.exceptions import DomainError
from poisson_interp.extremes import (DELTA_BOUND, GAMMA_BOUND, PCase, Regime, dual_value,
                                     exact_p2, exact_p2_r1, fourier_class_p2, is_node,
                                     kn_main_term, lebesgue_type_bound, limit_ratio_check,
                                     monte_carlo_lower, regime_constants, sin_factor,
                                     theorem4_estimate, witness_p2)
from poisson_interp.kernels import KernelParams, threshold
from poisson_interp.specfun import cos_norm
from poisson_interp.trig import NodeGrid, rho_tilde, poisson_integral, PeriodicFn

SANDWICH_PARAMS = (KernelParams(1.0, 0.5, 0.0), KernelParams(1.5, 0.7, 0.7), KernelParams(0.8, 0.6, 1.5))
SANDWICH_XS = (0.3, 1.1, 2.05, 3.7, 5.5)


def test_node_detection():
    assert is_node(4, 2 * math.pi * 3 / 7) and not is_node(4, 1.0)
    assert sin_factor(4, 2 * math.pi / 7) == 0.0
    assert sin_factor(4, math.pi / 7) == pytest.approx(1.0)


@pytest.mark.parametrize("params", [KernelParams(1.0, 0.5, 0.2), KernelParams(1.0, 1.0, 0.0)])
def test_every_evaluator_vanishes_at_nodes(params):
    n = 5
    for x in list(NodeGrid(n).nodes) + [0.0, 2 * math.pi]:
        assert exact_p2(params, n, x).value == 0.0
        band = dual_value(params, n, x, 1.5)
        assert band.center == 0.0 and band.half_width == 0.0
        assert monte_carlo_lower(params, n, x, 2, trials=5) == 0.0
        if params.r == 1.0:
            assert exact_p2_r1(params.alpha, n, x) == 0.0
        else:
            band = theorem4_estimate(params, 2, n, x)
            assert band.center == 0.0 and band.half_width == 0.0


@pytest.mark.parametrize("alpha,r,beta,n,x", [
    (2.0, 0.5, 0.0, 8, 1.3), (1.0, 0.5, 0.3, 4, 0.4), (0.5, 0.8, 1.0, 10, 2.9),
    (1.0, 1.5, -0.5, 6, 5.0), (3.0, 0.3, 0.2, 3, 0.05),
])
def test_exact_p2_matches_deviation_kernel_oracle(alpha, r, beta, n, x):
    params = KernelParams(alpha, r, beta)
    value = exact_p2(params, n, x, scaled=True).value
    assert value == pytest.approx(parseval_oracle(params, n, x), rel=1e-9)


def test_exact_p2_scaling_and_error():
    params = KernelParams(1.0, 0.5)
    plain = exact_p2(params, 10, 0.7, tol=1e-14)
    scaled = exact_p2(params, 10, 0.7, scaled=True)
    assert plain.value == pytest.approx(scaled.value * math.exp(-math.sqrt(10)), rel=1e-13)
    assert plain.abs_err <= 1e-14
    with pytest.raises(DomainError):
        exact_p2(params, 10, 0.7, tol=0.0)


@pytest.mark.parametrize("alpha,n,x", [(1.0, 3, 0.4), (2.0, 5, 0.9), (0.3, 7, 2.2), (1.0, 4, math.pi / 7)])
def test_r1_closed_form_matches_series(alpha, n, x):
    series = exact_p2(KernelParams(alpha, 1.0, 0.4), n, x, scaled=True).value
    assert exact_p2_r1(alpha, n, x, scaled=True) == pytest.approx(series, rel=1e-12)
    assert exact_p2_r1(alpha, n, x) == pytest.approx(series * math.exp(-alpha * n), rel=1e-12)


def test_r1_closed_form_at_half_node():
    alpha, n = 1.0, 4
    N = 2 * n - 1
    q = math.exp(-2 * alpha * N)
    expected = 2 / math.sqrt(math.pi * (1 - math.exp(-2 * alpha))) * math.sqrt((1 + q) / (1 + q) ** 2)
    assert exact_p2_r1(alpha, n, math.pi / N, scaled=True) == pytest.approx(expected, rel=1e-14)


@given(st.floats(0.3, 3.0), st.integers(1, 12), st.floats(0.01, 6.2))
def test_r1_closed_form_property(alpha, n, x):
    if is_node(n, x, rtol=1e-6):
        return
    series = exact_p2(KernelParams(alpha, 1.0), n, x, scaled=True).value
    assert exact_p2_r1(alpha, n, x, scaled=True) == pytest.approx(series, rel=1e-11)


@pytest.mark.parametrize("params", [KernelParams(1.0, 0.5, 0.3), KernelParams(2.0, 1.0, 0.0),
                                    KernelParams(0.5, 1.7, 1.2)])
@pytest.mark.parametrize("n", [2, 6, 15])
def test_dual_band_contains_exact_p2(params, n):
    for x in (0.3, 1.1, 3.7):
        band = dual_value(params, n, x, 2, scaled=True)
        assert band.contains(exact_p2(params, n, x, scaled=True).value)


def test_dual_center_proportional_to_sin_at_p2():
    params = KernelParams(1.0, 0.5, 0.3)
    n = 8
    ratios = [dual_value(params, n, x, 2, scaled=True).center / sin_factor(n, x)
              for x in (0.1, 0.7, 1.9, 3.3, 5.9)]
    assert np.ptp(ratios) <= 1e-9 * ratios[0]


def test_dual_center_tracks_sup_norm_main_term():
    params = KernelParams(1.0, 0.5, 0.0)
    n = 64
    x = math.pi / (2 * n - 1)
    band = dual_value(params, n, x, "inf", scaled=True)
    main = 8 / math.pi ** 2 * math.log(n ** 0.5 / 0.5)
    assert abs(band.center / sin_factor(n, x) - main) <= DELTA_BOUND


def test_monte_carlo_is_deterministic():
    params = KernelParams(1.0, 0.5, 0.3)
    a = monte_carlo_lower(params, 6, 1.2, 1.5, trials=40, seed=7)
    b = monte_carlo_lower(params, 6, 1.2, 1.5, trials=40, seed=7)
    c = monte_carlo_lower(params, 6, 1.2, 1.5, trials=40, seed=8)
    assert a == b and a != c
    with pytest.raises(DomainError):
        monte_carlo_lower(params, 6, 1.2, 2, trials=0)


@pytest.mark.parametrize("n", [4, 8, 16])
def test_monte_carlo_p2_close_to_exact(n):
    params = KernelParams(1.0, 0.5, 0.0)
    mc = monte_carlo_lower(params, n, 1.3, 2, trials=500, seed=42, scaled=True)
    exact = exact_p2(params, n, 1.3, scaled=True).value
    assert 0.8 * exact <= mc <= exact * (1 + 1e-12)


def test_monte_carlo_sup_norm_below_dual_upper():
    params = KernelParams(1.0, 0.5, 0.0)
    for n in (4, 8):
        mc = monte_carlo_lower(params, n, 2.0, "inf", trials=200, seed=3, scaled=True)
        assert mc <= dual_value(params, n, 2.0, "inf", scaled=True).upper


@pytest.mark.parametrize("p", [1, 1.5, 2, 4, "inf"])
def test_sandwich(p):
    for params in SANDWICH_PARAMS:
        for n in (4, 8, 16, 32):
            for x in SANDWICH_XS:
                band = dual_value(params, n, x, p, tol=1e-6, scaled=True)
                mc = monte_carlo_lower(params, n, x, p, trials=40, seed=n, scaled=True)
                assert mc <= band.upper
                if p == 2:
                    exact = exact_p2(params, n, x, scaled=True).value
                    assert mc <= exact * (1 + 1e-12) and band.contains(exact)


def test_main_term_table_cells():
    a = KernelParams(1.0, 1.0)
    assert kn_main_term(a, "inf", 50) == pytest.approx(16 / math.pi ** 2 * float(mp.ellipk(mp.exp(-2))), rel=1e-13)
    assert kn_main_term(a, 1, 50) == pytest.approx(2 / (math.pi * (1 - math.exp(-1))), rel=1e-14)
    big = KernelParams(1.0, 1.5)
    assert kn_main_term(big, 1, 9) == pytest.approx(2 / math.pi)
    assert kn_main_term(big, "inf", 9) == pytest.approx(8 / math.pi)
    assert kn_main_term(big, 3, 9) == pytest.approx(2 * cos_norm(1.5).value / math.pi)
    small = KernelParams(3.0, 0.5)
    assert kn_main_term(small, 1, 400) == pytest.approx(20 * 2 / (math.pi * 1.5))
    assert kn_main_term(small, "inf", 400) == pytest.approx(8 / math.pi ** 2 * 0.5 * math.log(400))


def test_main_term_r1_p2_is_limit_of_closed_form():
    alpha = 0.7
    expected = 2 / math.sqrt(math.pi * (1 - math.exp(-2 * alpha)))
    assert kn_main_term(KernelParams(alpha, 1.0), 2, 10) == pytest.approx(expected, rel=1e-12)
    n = 40
    x = math.pi / (2 * n - 1) / 3
    ratio = exact_p2_r1(alpha, n, x, scaled=True) / sin_factor(n, x)
    assert ratio == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("p", [1.25, 1.5, 2, 3, 6])
def test_main_term_middle_column_r_lt_1(p):
    params = KernelParams(2.0, 0.4)
    q = p / (p - 1)
    # int_0^inf (1 + t^2)^(-q/2) dt in Beta form
    F = float(mp.sqrt(mp.pi) / 2 * mp.gamma((q - 1) / 2) / mp.gamma(q / 2))
    expected = 7 ** (0.6 / p) * 2 * cos_norm(q).value / (math.pi ** (1 + 1 / q) * 0.8 ** (1 / p)) * F ** (1 / q)
    assert kn_main_term(params, p, 7) == pytest.approx(expected, rel=1e-11)


def test_main_term_p2_ratio_to_exact_converges():
    # the main term carries the (alpha r)^(1/2) factor, unlike the literal ratio-test constant
    params = KernelParams(1.0, 0.5, 0.0)
    devs = []
    for n in (32, 64, 128, 256):
        x = math.pi / (2 * n - 1)
        ratio = exact_p2(params, n, x, scaled=True).value / (sin_factor(n, x) * kn_main_term(params, 2, n))
        devs.append(abs(ratio - 1))
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert devs[-1] <= 0.15


def test_regime_constants():
    rc = regime_constants(KernelParams(1.0, 0.5), 1.5)
    assert rc.regime is Regime.R_LT_1 and rc.pcase is PCase.P_IN_1_INF
    assert rc.remainder_coeff_bound == DELTA_BOUND
    assert regime_constants(KernelParams(1.0, 1.0), "inf").pcase is PCase.P_EQ_INF
    assert regime_constants(KernelParams(1.0, 2.0), 1).regime is Regime.R_GT_1
    assert rc.main_term(KernelParams(1.0, 0.5), 1.5, 10) == kn_main_term(KernelParams(1.0, 0.5), 1.5, 10)
    with pytest.raises(DomainError):
        kn_main_term(KernelParams(1.0, 0.5), 0.5, 10)


def test_theorem4_p1_arithmetic():
    params = KernelParams(3.0, 0.5)
    ratios = []
    for n in (10 ** 5, 4 * 10 ** 5):
        x = math.pi / (2 * (2 * n - 1))
        band = theorem4_estimate(params, 1, n, x, scaled=True)
        assert band.center == pytest.approx(math.sqrt(n) * math.sin(math.pi / 4) * 2 / (math.pi * 1.5), rel=1e-12)
        ratios.append(band.half_width / band.center * math.sqrt(n))
        assert band.applicable == (n >= threshold(params, 1))
    assert ratios[0] == pytest.approx(ratios[1], rel=1e-12)


def test_theorem4_domain_and_applicability():
    with pytest.raises(DomainError):
        theorem4_estimate(KernelParams(1.0, 1.0), 2, 10, 0.3)
    with pytest.raises(DomainError):
        theorem4_estimate(KernelParams(1.0, 1.2), 2, 10, 0.3)
    assert not theorem4_estimate(KernelParams(3.0, 0.5), 2, 100, 0.3).applicable


@pytest.mark.parametrize("alpha,r", [(3.0, 0.5), (0.8, 0.6)])
def test_theorem4_p2_band_contains_exact_past_threshold(alpha, r):
    params = KernelParams(alpha, r)
    n = threshold(params, 2)
    for x in (math.pi / (2 * n - 1), 0.5 * math.pi / (2 * n - 1), 1.0):
        band = theorem4_estimate(params, 2, n, x, scaled=True, n_star=n)
        assert band.applicable and band.contains(exact_p2(params, n, x, scaled=True).value)


def test_lebesgue_bound_arithmetic():
    params = KernelParams(1.0, 0.5)
    n, x = 50, 0.77
    assert lebesgue_type_bound(params, 2, n, x, 0.0).value == 0.0
    En = 0.3
    b = lebesgue_type_bound(params, "inf", n, x, En, scaled=True)
    expected = 4 / math.pi ** 2 * math.log(n ** 0.5 / 0.5) + GAMMA_BOUND
    assert b.value / (2 * sin_factor(n, x) * En) == pytest.approx(expected, rel=1e-14)
    assert not b.certified
    with pytest.raises(DomainError):
        lebesgue_type_bound(params, 2, n, x, -1.0)
    with pytest.raises(DomainError):
        lebesgue_type_bound(KernelParams(1.0, 1.0), 2, n, x, 1.0)


@pytest.mark.parametrize("p", [1, 2, "inf"])
def test_lebesgue_bound_on_grid(p):
    from poisson_interp.approx import best_approx
    from poisson_interp.trig import TrigPoly
    params = KernelParams(1.0, 0.5, 0.4)
    rng = np.random.default_rng(11)
    n = 6
    phi = TrigPoly(0.0, rng.standard_normal(20) / np.arange(1, 21), rng.standard_normal(20) / np.arange(1, 21))
    f = PeriodicFn.from_trigpoly(poisson_integral(params, phi))
    En = best_approx(PeriodicFn.from_trigpoly(phi), n, p).value
    xs = 2 * math.pi * (np.arange(1000) + 0.5) / 1000
    dev = np.abs(rho_tilde(f, n, xs))
    n_star = threshold(params, p)
    bound = np.array([lebesgue_type_bound(params, p, n, x, En, n_star=n_star).value for x in xs])
    assert np.all(dev <= bound)


@pytest.mark.parametrize("params,n,x", [(KernelParams(1.0, 0.5, 0.0), 6, 0.7),
                                        (KernelParams(1.0, 1.0, 0.3), 4, 1.2),
                                        (KernelParams(2.0, 0.3, 1.0), 5, 2.5)])
def test_witness_attains_p2_supremum(params, n, x):
    w = witness_p2(params, n, x)
    coeffs = w.coefficients()
    assert coeffs.a0 == 0.0 and math.pi * coeffs.energy() == pytest.approx(1.0, rel=1e-13)
    achieved = abs(rho_tilde(PeriodicFn.from_trigpoly(poisson_integral(params, coeffs)), n, x))
    exact = (exact_p2_r1(params.alpha, n, x) if params.r == 1.0 else exact_p2(params, n, x).value)
    assert 1 - 1e-6 <= achieved / exact <= 1 + 1e-9


def test_witness_at_node_is_zero():
    w = witness_p2(KernelParams(1.0, 0.5), 4, 2 * math.pi / 7)
    assert w.coefficients().energy() == 0.0


def test_fourier_class_p2():
    alpha, n = 0.7, 5
    closed = math.sqrt(math.exp(-2 * alpha * n) / (math.pi * (1 - math.exp(-2 * alpha))))
    assert fourier_class_p2(KernelParams(alpha, 1.0), n).value == pytest.approx(closed, rel=1e-13)
    lead = fourier_class_p2(KernelParams(10.0, 0.5), 4, scaled=True).value * math.sqrt(math.pi)
    # first term dominates; the next one is exp(-20 (sqrt 5 - 2))
    second = math.exp(-20 * (math.sqrt(5) - 2))
    assert second < lead ** 2 - 1 < 1.02 * second
    vals = [fourier_class_p2(KernelParams(1.0, 0.5), n).value for n in range(1, 60)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_limit_ratio():
    n = 20
    ratio = limit_ratio_check(KernelParams(2.0, 1.0), [n], math.pi / (2 * n - 1))
    assert 1.9 <= ratio[0] <= 2.1
    one = limit_ratio_check(KernelParams(1.0, 0.5), [1], 1.0)
    assert np.isfinite(one[0]) and one[0] > 0
    x = math.pi / 255
    ratios = limit_ratio_check(KernelParams(1.0, 0.5), [16, 32, 64, 128], x)
    assert abs(ratios[-1] - 2) < 0.05
    with pytest.raises(DomainError):
        limit_ratio_check(KernelParams(1.0, 0.5), [4], 1.0, p=3)
    with pytest.raises(DomainError):
        limit_ratio_check(KernelParams(1.0, 0.5), [4], 2 * math.pi / 7)
