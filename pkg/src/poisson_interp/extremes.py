"""Class suprema of the interpolation deviation on generalized Poisson classes.

``E~_n(C; x) = sup |f(x) - S_{n-1}(f; x)|`` over the class of Poisson integrals
of the zero-mean unit ball of ``L_p``.  This module provides

* the exact ``p = 2`` value as a block series, plus its ``r = 1`` closed form;
* a duality evaluation for every ``p`` (best constant shift of the kernel tail,
  widened by the bound on the remainder ``r_n``);
* a seeded Monte-Carlo lower bound;
* the asymptotic main terms ``A_n`` for all nine ``(r, p)`` regimes and the
  certified bands around them.

Values that can underflow accept ``scaled=True``, which multiplies the result
by ``exp(alpha n^r)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from ._quad import trig_eval_grid
from .approx import inf_shift, lp_norm
from .exceptions import ConvergenceError, DomainError
from .kernels import (KernelParams, TailSeries, gamma_n, log_weights,
                      remainder_double_sum, threshold, truncation_index, weights)
from .specfun import (CertifiedValue, LpExponent, Provenance, as_exponent, cos_norm,
                      elliptic_K, hyp2f1)
from .trig import NodeGrid, PeriodicFn, TrigPoly, interp_weights

_EPS = np.finfo(float).eps
_SQRT_PI = math.sqrt(math.pi)
MAX_TERMS = 200_000_000
DELTA_BOUND = 40.0 * math.pi ** 4
GAMMA_BOUND = 20.0 * math.pi ** 4
XI_BOUND = 2.0


class Regime(str, enum.Enum):
    R_LT_1 = "r_lt_1"
    R_EQ_1 = "r_eq_1"
    R_GT_1 = "r_gt_1"


class PCase(str, enum.Enum):
    P_EQ_1 = "p_eq_1"
    P_IN_1_INF = "p_in_1_inf"
    P_EQ_INF = "p_eq_inf"


def regime_of(r: float) -> Regime:
    if r < 1.0:
        return Regime.R_LT_1
    if r == 1.0:
        return Regime.R_EQ_1
    return Regime.R_GT_1


def pcase_of(p: LpExponent) -> PCase:
    if p.p == 1.0:
        return PCase.P_EQ_1
    if p.is_inf:
        return PCase.P_EQ_INF
    return PCase.P_IN_1_INF


@dataclass(frozen=True)
class RegimeConstants:
    """One cell of the main-term table and the bound on its remainder coefficient."""

    regime: Regime
    pcase: PCase
    remainder_coeff_bound: Optional[float]

    def main_term(self, params: KernelParams, p, n: int) -> float:
        return kn_main_term(params, p, n)


def regime_constants(params: KernelParams, p) -> RegimeConstants:
    p = as_exponent(p)
    regime = regime_of(params.r)
    bound = DELTA_BOUND if regime is Regime.R_LT_1 else None
    return RegimeConstants(regime, pcase_of(p), bound)


@dataclass(frozen=True)
class EstimateBand:
    """``center +- half_width``, in units of ``exp(log_scale)``.

    ``applicable`` is ``False`` when the band's premises (typically
    ``n >= n_*``) do not hold; such a band makes no claim.
    """

    center: float
    half_width: float
    n_used: int
    applicable: bool
    log_scale: float = 0.0

    def __post_init__(self):
        if not self.half_width >= 0.0:
            raise ValueError("half_width must be nonnegative")

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def unscaled(self) -> "EstimateBand":
        f = math.exp(self.log_scale)
        return EstimateBand(self.center * f, self.half_width * f, self.n_used, self.applicable, 0.0)


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    return int(n)


def is_node(n: int, x: float, rtol: float = 1e-12) -> bool:
    """Whether ``x`` is (numerically) one of the nodes ``2 k pi / (2n - 1)``."""
    u = float(x) * (2 * n - 1) / (2.0 * math.pi)
    return abs(u - round(u)) <= rtol * max(1.0, abs(u))


def sin_factor(n: int, x: float) -> float:
    """``|sin((2n - 1) x / 2)|``, exactly zero at the nodes."""
    if is_node(n, x):
        return 0.0
    return abs(math.sin(0.5 * (2 * n - 1) * x))


def _scale_back(value, err, log_scale, scaled):
    if scaled:
        return value, err
    f = math.exp(log_scale)
    return value * f, err * f


# ---------------------------------------------------------------------------
# p = 2


def _block_sum(alpha2, r, n, x, delta, ref):
    """``sum_{k>=n} exp(-alpha2 k^r) sin^2((2n-1) m(k) x / 2)`` with its certified tail."""
    N = 2 * n - 1
    K, tail = truncation_index(alpha2, r, n, delta, ref=ref)
    if K - n > MAX_TERMS:
        raise ConvergenceError("block series needs too many terms", {"terms": K - n})
    total = 0.0
    chunk = 1 << 20
    for lo in range(n, K + 1, chunk):
        k = np.arange(lo, min(K, lo + chunk - 1) + 1)
        m = (k + n - 1) // N
        w = np.exp(log_weights(alpha2, r, k.astype(float), ref))
        total += float(np.sum(w * np.sin(0.5 * N * m * x) ** 2))
    return total, tail, K


def exact_p2(params: KernelParams, n: int, x: float, tol: float = 1e-12,
             scaled: bool = False) -> CertifiedValue:
    """``E~_n`` for ``p = 2`` from the block series.

    ``(2/sqrt(pi)) (sum_m sin^2((2n-1) m x / 2) sum_{|k - m(2n-1)| < n} exp(-2 alpha k^r))^{1/2}``.
    The blocks tile ``k >= n``, so the double sum is evaluated as one sum over
    ``k`` whose dropped part is certified below the level implied by ``tol``.
    """
    n = _check_n(n)
    if not tol > 0:
        raise DomainError("tol must be positive")
    log_scale = -params.alpha * n ** params.r
    if is_node(n, x):
        return CertifiedValue(0.0, 0.0, Provenance.EXACT)
    tol_s = tol if scaled else tol * math.exp(min(-log_scale, 700.0))
    delta = min((0.5 * _SQRT_PI * tol_s) ** 2, 1e-30)
    S, tail, K = _block_sum(2.0 * params.alpha, params.r, n, float(x), delta, ref=n)
    value = 2.0 / _SQRT_PI * math.sqrt(S)
    # error of sqrt under an additive change tail >= 0
    err = 2.0 / _SQRT_PI * (min(math.sqrt(tail), tail / (2.0 * math.sqrt(S))) if S > 0 else math.sqrt(tail))
    err += 8 * _EPS * value * math.log2(max(2, K - n + 1))
    value, err = _scale_back(value, err, log_scale, scaled)
    return CertifiedValue(value, err, Provenance.SERIES_TRUNCATION)


def exact_p2_r1(alpha: float, n: int, x: float, scaled: bool = False) -> float:
    """Closed form of the ``p = 2`` supremum for ``r = 1``."""
    n = _check_n(n)
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if is_node(n, x):
        return 0.0
    N = 2 * n - 1
    q = math.exp(-2.0 * alpha * N)
    ratio = (1.0 + q) / (1.0 - 2.0 * q * math.cos(N * x) + q * q)
    value = sin_factor(n, x) * 2.0 / math.sqrt(-math.pi * math.expm1(-2.0 * alpha)) * math.sqrt(ratio)
    return value if scaled else value * math.exp(-alpha * n)


def fourier_class_p2(params: KernelParams, n: int, tol: float = 1e-15,
                     scaled: bool = False) -> CertifiedValue:
    """``(sum_{k>=n} exp(-2 alpha k^r) / pi)^{1/2}``, the ``p = 2`` Fourier-sum class value."""
    n = _check_n(n)
    alpha2 = 2.0 * params.alpha
    K, tail = truncation_index(alpha2, params.r, n, min(tol * tol, 1e-30), ref=n)
    if K - n > MAX_TERMS:
        raise ConvergenceError("tail sum needs too many terms", {"terms": K - n})
    total = 0.0
    chunk = 1 << 20
    for lo in range(n, K + 1, chunk):
        k = np.arange(lo, min(K, lo + chunk - 1) + 1, dtype=float)
        total += float(np.sum(np.exp(log_weights(alpha2, params.r, k, n))))
    value = math.sqrt(total / math.pi)
    err = math.sqrt(total + tail) / _SQRT_PI - value + 8 * _EPS * value
    value, err = _scale_back(value, err, -params.alpha * n ** params.r, scaled)
    return CertifiedValue(value, err, Provenance.SERIES_TRUNCATION)


def limit_ratio_check(params: KernelParams, n_list: Iterable[int], x: float, p=2) -> np.ndarray:
    """``E~_n / (|sin((2n-1)x/2)| E_n)`` for each ``n``, with ``E_n`` the Fourier-sum value."""
    p = as_exponent(p)
    if p.p != 2.0:
        raise DomainError("the ratio is computable exactly only for p = 2")
    out = []
    for n in n_list:
        s = sin_factor(n, x)
        if s == 0.0:
            raise DomainError(f"x is a node for n={n}")
        num = exact_p2(params, n, x, scaled=True).value
        den = s * fourier_class_p2(params, n, scaled=True).value
        out.append(num / den)
    return np.array(out)


# ---------------------------------------------------------------------------
# deviation functional


def deviation_coefficients(params: KernelParams, n: int, x: float, kmax: int,
                           scaled: bool = True):
    """Deviation at ``x`` of the Poisson integrals of ``cos kt`` and ``sin kt``, ``k = n..kmax``.

    ``rho(J cos k.; x) = psi_k (cos(kx - th) - sum_j l_j(x) cos(k x_j - th))`` and likewise
    with ``sin``, where ``l_j`` are the interpolation weights.  Lower orders are
    reproduced by the interpolant and contribute nothing.
    """
    n = _check_n(n)
    k = np.arange(n, kmax + 1, dtype=float)
    theta = 0.5 * math.pi * params.beta
    ell = interp_weights(n, x)[0]
    nodes = NodeGrid(n).nodes
    psi = weights(params.alpha, params.r, k, n if scaled else 0.0)
    arg_x = k * x - theta
    arg_nodes = np.outer(k, nodes) - theta
    gc = psi * (np.cos(arg_x) - np.cos(arg_nodes) @ ell)
    gs = psi * (np.sin(arg_x) - np.sin(arg_nodes) @ ell)
    return k.astype(int), gc, gs


def witness_p2(params: KernelParams, n: int, x: float, rel_tol: float = 1e-14) -> PeriodicFn:
    """Zero-mean ``phi`` with ``||phi||_2 = 1`` whose Poisson integral nearly attains ``E~_n`` at ``x``.

    ``phi`` is the normalised representer of the (linear) deviation functional,
    truncated where the dropped energy is below ``rel_tol`` of the leading term.
    """
    n = _check_n(n)
    if is_node(n, x):
        return PeriodicFn.from_trigpoly(TrigPoly.zero(0), name="witness")
    K, _ = truncation_index(2.0 * params.alpha, params.r, n, rel_tol, ref=n)
    k, gc, gs = deviation_coefficients(params, n, x, K, scaled=True)
    norm = math.sqrt(math.pi * float(gc @ gc + gs @ gs))
    a = np.zeros(K)
    b = np.zeros(K)
    a[k - 1] = gc / norm
    b[k - 1] = gs / norm
    return PeriodicFn.from_trigpoly(TrigPoly(0.0, a, b), name="witness")


# ---------------------------------------------------------------------------
# duality


def dual_value(params: KernelParams, n: int, x: float, p, tol: float = 1e-10,
               scaled: bool = False) -> EstimateBand:
    """Band containing ``E~_n`` for any ``p``.

    ``E~_n = 2|sin((2n-1)x/2)| ((1/pi) min_lam ||T - lam||_{p'} + xi ||r_n||_C)``
    with ``T(t) = sum_{k>=n} exp(-alpha k^r) cos(kt + gamma_n)`` and ``|xi| <= 2``.
    The centre drops the ``r_n`` term; the half-width covers it together with
    the truncation of ``T``.
    """
    n = _check_n(n)
    p = as_exponent(p)
    log_scale = -params.alpha * n ** params.r
    out_scale = 0.0 if scaled else log_scale
    s = sin_factor(n, x)
    if s == 0.0:
        return EstimateBand(0.0, 0.0, n, True, out_scale)
    q = p.conjugate()
    series = TailSeries.build(params, n, gamma_n(params.beta, x, n), tol=1e-17, scaled=True)
    shift = inf_shift(PeriodicFn.from_series(series), q, tol=tol)
    center = 2.0 * s / math.pi * shift.value
    two_pi_q = 1.0 if q.is_inf else (2.0 * math.pi) ** (1.0 / q.p)
    ds = remainder_double_sum(params.alpha, params.r, n)
    rn_scaled = math.exp(ds.log_upper - log_scale)
    half = 2.0 * s * XI_BOUND * rn_scaled
    half += 2.0 * s / math.pi * two_pi_q * series.tail_bound
    half += 2.0 * s / math.pi * tol * max(1.0, shift.value) + 16 * _EPS * center
    if not scaled:
        f = math.exp(log_scale)
        center, half = center * f, half * f
    return EstimateBand(center, half, n, True, 0.0)


def _random_phi_norm(c, d, p: LpExponent, size, kmax):
    """Upper estimate of ``||phi||_p`` for ``phi = sum c_k cos kt + d_k sin kt``."""
    if p.p == 2.0:
        return math.sqrt(math.pi * float(c @ c + d @ d))
    vals = trig_eval_grid(0.0, c, d, size)
    if p.is_inf:
        # max over the grid loses at most a factor cos(kmax h / 2) for a polynomial of order kmax
        return float(np.max(np.abs(vals))) / math.cos(math.pi * kmax / size)
    return float((2.0 * math.pi / size * np.sum(np.abs(vals) ** p.p)) ** (1.0 / p.p))


def monte_carlo_lower(params: KernelParams, n: int, x: float, p, trials: int = 500,
                      seed: int = 0, scaled: bool = False, kmax: Optional[int] = None) -> float:
    """Seeded stochastic lower bound for ``E~_n``.

    Candidates are zero-mean trigonometric polynomials of orders ``n..4n``
    (lower orders are reproduced by the interpolant and cannot help), with
    Gaussian coefficients under the envelope ``exp(-alpha (k^r - n^r))``.
    Half of the trials are independent draws; the rest refine the best draw by a
    (1+1) evolution strategy.  Every candidate is feasible after normalisation,
    so the result is a lower bound up to the accuracy of the final norm.
    """
    n = _check_n(n)
    p = as_exponent(p)
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if sin_factor(n, x) == 0.0:
        return 0.0
    kmax = kmax or 4 * n
    k, gc, gs = deviation_coefficients(params, n, x, kmax, scaled=True)
    env = weights(params.alpha, params.r, k.astype(float), n)
    rng = np.random.default_rng(seed)
    size = 1 << max(10, math.ceil(math.log2(64 * kmax)))
    pad = np.zeros(n - 1)

    def score(c, d):
        norm = _random_phi_norm(np.concatenate((pad, c)), np.concatenate((pad, d)), p, size, kmax)
        return abs(float(gc @ c + gs @ d)) / norm if norm > 0 else 0.0

    n_rand = max(1, trials // 2)
    best_c = best_d = None
    best = -1.0
    for _ in range(n_rand):
        c = rng.standard_normal(k.size) * env
        d = rng.standard_normal(k.size) * env
        val = score(c, d)
        if val > best:
            best, best_c, best_d = val, c, d
    sigma = 0.3
    for _ in range(trials - n_rand):
        c = best_c + sigma * env * rng.standard_normal(k.size)
        d = best_d + sigma * env * rng.standard_normal(k.size)
        val = score(c, d)
        if val > best:
            best, best_c, best_d = val, c, d
            sigma *= 1.5
        else:
            sigma *= 0.9
    if not p.is_inf and p.p != 2.0:
        a = np.concatenate((pad, best_c))
        b = np.concatenate((pad, best_d))
        phi = PeriodicFn.from_trigpoly(TrigPoly(0.0, a, b))
        rough = _random_phi_norm(a, b, p, size, kmax)
        norm = lp_norm(phi, p, tol=1e-10 * rough)
        best = abs(float(gc @ best_c + gs @ best_d)) / norm.upper
    return best if scaled else best * math.exp(-params.alpha * n ** params.r)


# ---------------------------------------------------------------------------
# main terms and bands


def _hyp_main_factor(pp: LpExponent) -> float:
    """``F^{1/p'}(1/2, (3-p')/2; 3/2; 1)`` for ``1 < p < inf``."""
    q = pp.conjugate().p
    return hyp2f1(0.5, 0.5 * (3.0 - q), 1.5, 1.0).value ** (1.0 / q)


def kn_main_term(params: KernelParams, p, n: int) -> float:
    """Main term ``A_n`` of ``E~_n / (exp(-alpha n^r) |sin((2n-1)x/2)|)``."""
    p = as_exponent(p)
    n = _check_n(n)
    alpha, r = params.alpha, params.r
    regime = regime_of(r)
    case = pcase_of(p)
    if regime is Regime.R_LT_1:
        ar = alpha * r
        if case is PCase.P_EQ_INF:
            return 8.0 / math.pi ** 2 * (1.0 - r) * math.log(n)
        if case is PCase.P_EQ_1:
            return n ** (1.0 - r) * 2.0 / (math.pi * ar)
        q = p.conjugate().p
        const = 2.0 * cos_norm(q).value / (math.pi ** (1.0 + 1.0 / q) * ar ** (1.0 / p.p))
        return n ** ((1.0 - r) / p.p) * const * _hyp_main_factor(p)
    if regime is Regime.R_EQ_1:
        if case is PCase.P_EQ_INF:
            return 16.0 / math.pi ** 2 * elliptic_K(math.exp(-alpha)).value
        if case is PCase.P_EQ_1:
            return 2.0 / (-math.pi * math.expm1(-alpha))
        q = p.conjugate().p
        F = hyp2f1(0.5 * q, 0.5 * q, 1.0, math.exp(-2.0 * alpha)).value
        return 2.0 * cos_norm(q).value / math.pi * F ** (1.0 / q)
    if case is PCase.P_EQ_INF:
        return 8.0 / math.pi
    if case is PCase.P_EQ_1:
        return 2.0 / math.pi
    return 2.0 * cos_norm(p.conjugate()).value / math.pi


def _theorem_terms(params: KernelParams, p: LpExponent, n: int):
    """``(n-power, main constant, remainder bracket)`` of the ``r < 1`` asymptotics."""
    alpha, r = params.alpha, params.r
    ar = alpha * r
    if p.p == 1.0:
        return (n ** (1.0 - r), 2.0 / (math.pi * ar),
                1.0 / n ** (1.0 - r) + 1.0 / (ar ** 2 * n ** r))
    if p.is_inf:
        return 1.0, 8.0 / math.pi ** 2 * math.log(n ** (1.0 - r) / ar), 1.0
    q = p.conjugate().p
    const = 2.0 * cos_norm(q).value / (math.pi ** (1.0 + 1.0 / q) * ar ** (1.0 / p.p)) * _hyp_main_factor(p)
    bracket = ((1.0 + ar ** ((q - 1.0) / p.p) / (q - 1.0)) / n ** ((1.0 - r) / p.p)
               + p.p ** (1.0 / q) / (ar ** (1.0 + 1.0 / p.p) * n ** r))
    return n ** ((1.0 - r) / p.p), const, bracket


def theorem4_estimate(params: KernelParams, p, n: int, x: float, scaled: bool = False,
                      n_star: Optional[int] = None) -> EstimateBand:
    """Band ``exp(-alpha n^r) n^s |sin| (C +- 40 pi^4 bracket)`` for ``r`` in ``(0, 1)``.

    ``applicable`` records whether ``n >= n_*(alpha, r, p)``; the band makes no
    claim otherwise.  ``n_star`` may be passed to skip recomputing the threshold.
    """
    if not 0.0 < params.r < 1.0:
        raise DomainError("the estimate is stated for r in (0, 1)")
    p = as_exponent(p)
    n = _check_n(n)
    s = sin_factor(n, x)
    if n_star is None:
        n_star = threshold(params, p, "n_star")
    applicable = n >= n_star
    npow, const, bracket = _theorem_terms(params, p, n)
    center = npow * s * const
    half = npow * s * DELTA_BOUND * bracket
    if not scaled:
        f = math.exp(-params.alpha * n ** params.r)
        center, half = center * f, half * f
    return EstimateBand(center, half, n, applicable, 0.0)


@dataclass(frozen=True)
class LebesgueBound:
    value: float
    certified: bool


def lebesgue_type_bound(params: KernelParams, p, n: int, x: float, En_value: float,
                        scaled: bool = False, n_star: Optional[int] = None) -> LebesgueBound:
    """Upper bound for ``|f(x) - S_{n-1}(f; x)|`` in terms of ``E_n`` of the generalized derivative.

    Every unknown bounded coefficient is replaced by its worst case ``20 pi^4``.
    ``certified`` is ``True`` only when ``n >= n_*``.
    """
    if not 0.0 < params.r < 1.0:
        raise DomainError("the bound is stated for r in (0, 1)")
    if En_value < 0:
        raise DomainError("En_value must be nonnegative")
    p = as_exponent(p)
    n = _check_n(n)
    if n_star is None:
        n_star = threshold(params, p, "n_star")
    s = sin_factor(n, x)
    npow, const, bracket = _theorem_terms(params, p, n)
    # the inequalities carry half of the main constant of the estimate
    value = 2.0 * npow * s * (0.5 * const + GAMMA_BOUND * bracket) * En_value
    if not scaled:
        value *= math.exp(-params.alpha * n ** params.r)
    return LebesgueBound(value, n >= n_star)
