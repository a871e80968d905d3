import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poisson_interp._quad import midpoint_grid, trig_eval_grid
from poisson_interp.approx import (Certificate, best_approx, inf_shift, lp_norm, sup_norm)
from poisson_interp.exceptions import ConvergenceError, DomainError
from poisson_interp.kernels import KernelParams, TailSeries
from poisson_interp.trig import PeriodicFn, TrigPoly, fourier_partial_sum

P_VALUES = [1, 1.5, 2, 3, "inf"]


def cos_n(n):
    a = np.zeros(n)
    a[n - 1] = 1.0
    return PeriodicFn.from_trigpoly(TrigPoly(0.0, a, np.zeros(n)))


def smooth_fn():
    return PeriodicFn.from_callable(lambda t: np.exp(np.cos(t)) + 0.3 * np.sin(3 * t) / (1.5 + np.cos(t)))


def normalized(value, p):
    return value if p == "inf" else value / (2 * math.pi) ** (1 / p)


@pytest.mark.parametrize("p", P_VALUES)
def test_lp_norm_of_zero(p):
    assert lp_norm(PeriodicFn.from_trigpoly(TrigPoly.zero(3)), p).value == 0.0
    assert lp_norm(PeriodicFn.from_callable(lambda t: 0.0 * t), p).value == 0.0


def test_lp_norm_examples():
    cos_t = PeriodicFn.from_callable(np.cos)
    assert lp_norm(cos_t, 1).value == pytest.approx(4.0, abs=1e-10)
    assert lp_norm(cos_t, 2).value == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    assert lp_norm(cos_t, "inf").value == pytest.approx(1.0, abs=1e-12)
    assert lp_norm(cos_n(1), 2).value == pytest.approx(math.sqrt(math.pi), abs=1e-14)
    assert lp_norm(cos_t, 4).value == pytest.approx((3 * math.pi / 4) ** 0.25, abs=1e-10)


@pytest.mark.parametrize("p", [1, 1.3, 2, 3.7])
def test_lp_norm_matches_fine_grid(p):
    f = PeriodicFn.from_callable(lambda t: np.sin(t) + 0.4 * np.cos(3 * t) - 0.1)
    v = f(midpoint_grid(1 << 18))
    ref = (2 * math.pi * np.mean(np.abs(v) ** p)) ** (1 / p)
    cv = lp_norm(f, p, tol=1e-12)
    assert cv.value == pytest.approx(ref, abs=1e-8)


def test_lp_norm_rejects_bad_tol():
    with pytest.raises(DomainError):
        lp_norm(cos_n(1), 2, tol=0.0)


def test_sup_norm_locates_extrema():
    f = PeriodicFn.from_callable(lambda t: np.cos(t - 0.3))
    hi, t_hi, lo, t_lo = sup_norm(f)
    assert hi == pytest.approx(1.0, abs=1e-13) and t_hi == pytest.approx(0.3, abs=1e-6)
    assert lo == pytest.approx(-1.0, abs=1e-13) and t_lo == pytest.approx(0.3 + math.pi, abs=1e-6)


@pytest.mark.parametrize("p", P_VALUES)
def test_polynomial_in_space_is_reproduced(p):
    g = TrigPoly(0.4, [1.0, -0.5, 0.25], [0.2, 0.0, -0.3])
    res = best_approx(PeriodicFn.from_trigpoly(g), 4, p)
    assert res.value <= 1e-12
    assert np.allclose(res.minimizer.padded(3).as_vector(), g.as_vector(), atol=1e-12)


@pytest.mark.parametrize("n", [1, 3, 6])
@pytest.mark.parametrize("p,expected", [(1, 4.0), (2, math.sqrt(math.pi)), (3, None), ("inf", 1.0)])
def test_cos_nt_best_approximation_is_zero_poly(n, p, expected):
    f = cos_n(n)
    res = best_approx(f, n, p, tol=1e-10)
    norm = lp_norm(f, p, tol=1e-12).value
    if expected is not None:
        assert norm == pytest.approx(expected, abs=1e-9)
    assert res.value == pytest.approx(norm, rel=1e-8)
    assert res.minimizer.max_abs_coeff() <= 1e-6


def test_p2_certificates():
    f = smooth_fn()
    for n in (2, 5):
        res = best_approx(f, n, 2, tol=1e-12)
        assert res.certificate is Certificate.PARSEVAL_EXACT
        resid = f.minus(res.minimizer)
        t = midpoint_grid(4096)
        e = resid(t)
        w = 2 * math.pi / t.size
        inner = [abs(np.sum(w * e))] + [abs(np.sum(w * e * np.cos(k * t))) for k in range(1, n)] \
            + [abs(np.sum(w * e * np.sin(k * t))) for k in range(1, n)]
        assert max(inner) <= 1e-9
        # Parseval budget
        total = lp_norm(f, 2, tol=1e-13).value ** 2
        kept = math.pi * res.minimizer.energy()
        assert res.value ** 2 + kept == pytest.approx(total, abs=1e-9)


def test_p2_from_known_tail_coefficients():
    series = TailSeries.build(KernelParams(1.0, 0.5), 1, 0.3, tol=1e-16)
    f = PeriodicFn.from_series(series)
    res = best_approx(f, 4, 2)
    w = series.weights[3:]
    assert res.value == pytest.approx(math.sqrt(math.pi * np.dot(w, w)), rel=1e-13)


def test_remez_equioscillation():
    f = smooth_fn()
    n = 4
    res = best_approx(f, n, "inf", tol=1e-10)
    assert res.certificate is Certificate.EQUIOSCILLATION
    assert res.alternations >= 2 * n
    assert 0.0 <= res.residual <= 1e-10 * 3
    e = f.minus(res.minimizer)
    v = e(midpoint_grid(1 << 16))
    assert np.max(np.abs(v)) <= res.value + 1e-12
    # signs alternate across the extremal set
    peaks = np.nonzero(np.abs(v) >= res.value - 1e-6)[0]
    signs = np.sign(v[peaks])
    assert np.count_nonzero(np.diff(signs)) + 1 >= 2 * n


def test_remez_beats_random_perturbations():
    f = smooth_fn()
    n = 3
    res = best_approx(f, n, "inf", tol=1e-11)
    rng = np.random.default_rng(0)
    base = res.minimizer.as_vector()
    t = midpoint_grid(1 << 14)
    fv = f(t)
    for _ in range(200):
        c = base + 1e-3 * rng.standard_normal(base.size)
        other = TrigPoly.from_vector(c)
        assert np.max(np.abs(fv - other(t))) >= res.value - res.residual - 1e-12


@pytest.mark.parametrize("p", [1, 1.5, 3, 6])
def test_kkt_solvers_beat_perturbations(p):
    f = smooth_fn()
    n = 3
    res = best_approx(f, n, p, tol=1e-10)
    assert res.certificate is Certificate.KKT_RESIDUAL and res.residual <= 1e-10
    rng = np.random.default_rng(1)
    base = res.minimizer.as_vector()
    for _ in range(20):
        other = TrigPoly.from_vector(base + 1e-3 * rng.standard_normal(base.size))
        assert lp_norm(f.minus(other), p, tol=1e-12).value >= res.value - 1e-9


@pytest.mark.parametrize("p", P_VALUES)
def test_monotone_in_n(p):
    f = smooth_fn()
    values = [best_approx(f, n, p, tol=1e-10).value for n in range(1, 7)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("n", [2, 4])
def test_monotone_in_normalized_p(n):
    f = smooth_fn()
    values = [normalized(best_approx(f, n, p, tol=1e-11).value, p) for p in P_VALUES]
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))


def test_best_approx_iteration_cap():
    with pytest.raises(ConvergenceError):
        best_approx(smooth_fn(), 4, 3, tol=1e-14, max_iter=1)
    with pytest.raises(ConvergenceError):
        best_approx(smooth_fn(), 4, "inf", tol=1e-14, max_iter=1)


def test_best_approx_validation():
    with pytest.raises(DomainError):
        best_approx(smooth_fn(), 0, 2)
    with pytest.raises(DomainError):
        best_approx(smooth_fn(), 2, 0.5)
    with pytest.raises(DomainError):
        best_approx(smooth_fn(), 2, 2, tol=-1.0)


@settings(max_examples=10)
@given(st.integers(1, 5), st.integers(0, 10 ** 6))
def test_best_approx_below_partial_sum(n, seed):
    rng = np.random.default_rng(seed)
    g = TrigPoly(rng.standard_normal(), rng.standard_normal(n + 3), rng.standard_normal(n + 3))
    f = PeriodicFn.from_trigpoly(g)
    fourier = fourier_partial_sum(f, n)
    for p in (1, 3, "inf"):
        res = best_approx(f, n, p, tol=1e-9)
        assert res.value <= lp_norm(f.minus(fourier), p, tol=1e-12).value + 1e-9


def test_inf_shift_examples():
    cos_t = PeriodicFn.from_callable(np.cos)
    res = inf_shift(cos_t, 2)
    assert abs(res.lam) <= 1e-12 and res.value == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    res = inf_shift(PeriodicFn.from_callable(lambda t: 1 + np.cos(t)), "inf")
    assert res.lam == pytest.approx(1.0, abs=1e-12) and res.value == pytest.approx(1.0, abs=1e-12)
    skew = PeriodicFn.from_callable(lambda t: np.exp(np.sin(t)))
    res = inf_shift(skew, 1, tol=1e-12)
    # the L1 minimiser is the median of the values
    assert res.lam == pytest.approx(1.0, abs=1e-6)
    assert res.lam == pytest.approx(float(np.median(skew(midpoint_grid(1 << 18)))), abs=1e-4)


def test_inf_shift_matches_grid_search():
    series = TailSeries.build(KernelParams(1.0, 0.5), 4, 0.3, tol=1e-16)
    g = PeriodicFn.from_series(series)
    res = inf_shift(g, 1.5, tol=1e-10)
    a, b = series.coefficients()
    v = trig_eval_grid(0.0, a, b, 4096)
    bound = float(np.max(np.abs(v)))
    lams = np.arange(-bound, bound, 1e-4)
    best = math.inf
    for chunk in np.array_split(lams, 40):
        vals = (2 * math.pi / v.size * np.sum(np.abs(v[None, :] - chunk[:, None]) ** 1.5, axis=1)) ** (1 / 1.5)
        best = min(best, float(vals.min()))
    assert res.value == pytest.approx(best, abs=1e-3)
    assert res.value <= best + 1e-9


@pytest.mark.parametrize("q", [1, 1.5, 2, 4, "inf"])
def test_inf_shift_never_exceeds_norm(q):
    for g in (smooth_fn(), PeriodicFn.from_callable(np.cos),
              PeriodicFn.from_callable(lambda t: 2 + np.sin(t) ** 3)):
        res = inf_shift(g, q)
        assert res.value <= lp_norm(g, q, tol=1e-12).value + 1e-9
