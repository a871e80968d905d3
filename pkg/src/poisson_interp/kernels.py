"""Generalized Poisson kernels and the tail machinery around them.

The kernel is ``P(t) = sum_{k>=1} exp(-alpha k^r) cos(k t - beta pi / 2)``.
Every infinite sum here is truncated at an index chosen so that a rigorous
bound on what was dropped stays below the requested tolerance.  The bound
uses ``sum_{j>=m} g(j) < g(m) + int_m^inf g`` for decreasing ``g`` together
with the closed-form estimate of ``int_m^inf exp(-alpha t^r) t^delta dt``.

Most routines accept ``scaled=True``.  Scaled quantities are multiplied by
``exp(alpha n^r)``, where ``n`` is the first index of the series involved, so
that results stay representable when ``exp(-alpha n^r)`` underflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import ConvergenceError, DomainError, ThresholdOverflowError
from .specfun import CertifiedValue, LpExponent, Provenance, as_exponent

_EPS = np.finfo(float).eps
_THETA_MAX = 14.0 / 13.0
MAX_INDEX = 2 ** 62
MAX_SERIES_TERMS = 50_000_000


@dataclass(frozen=True)
class KernelParams:
    """Decay coefficient ``alpha``, decay exponent ``r`` and phase ``beta``."""

    alpha: float
    r: float
    beta: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "r", "beta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.alpha <= 0.0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if self.r <= 0.0:
            raise DomainError(f"r must be positive, got {self.r}")

    @property
    def alpha_r(self) -> float:
        return self.alpha * self.r


def pow_diff(k, n, r):
    """``k**r - n**r`` without cancellation for ``k`` close to ``n``."""
    k = np.asarray(k, dtype=float)
    n = float(n)
    if n == 0.0:
        return k ** r
    return n ** r * np.expm1(r * np.log1p((k - n) / n))


def log_weights(alpha, r, k, ref=0):
    """``log exp(-alpha k^r)``, shifted by ``+alpha ref^r`` when ``ref > 0``."""
    return -alpha * pow_diff(k, ref, r)


def weights(alpha, r, k, ref=0):
    return np.exp(log_weights(alpha, r, k, ref))


# ---------------------------------------------------------------------------
# integral estimate and certified tails


def _admissible_start(alpha, r, delta):
    c = abs(delta + 1.0 - r)
    if c == 0.0:
        return 1.0
    return (14.0 * c / (alpha * r)) ** (1.0 / r)


def exp_power_integral(m: int, alpha: float, r: float, delta: float) -> CertifiedValue:
    """``int_m^inf exp(-alpha t^r) t^delta dt`` with a certified error band.

    The value is ``exp(-alpha m^r) m^(delta+1-r) / (alpha r)``; the true
    integral differs from it by a relative factor ``Theta |delta+1-r| / (alpha r m^r)``
    with ``|Theta| <= 14/13``.  The estimate is only certified for
    ``m >= (14 |delta+1-r| / (alpha r))^(1/r)``.
    """
    m = float(m)
    if m < 1:
        raise DomainError("m must be at least 1")
    if alpha <= 0 or r <= 0:
        raise DomainError("alpha and r must be positive")
    if m < _admissible_start(alpha, r, delta) * (1.0 - 1e-14):
        raise DomainError(
            f"m={m:g} is below the certified range m >= {_admissible_start(alpha, r, delta):.6g}"
        )
    c = abs(delta + 1.0 - r)
    main = math.exp(-alpha * m ** r) * m ** (delta + 1.0 - r) / (alpha * r)
    if c == 0.0:
        return CertifiedValue(main, 0.0, Provenance.EXACT)
    band = _THETA_MAX * c / (alpha * r * m ** r)
    return CertifiedValue(main, main * band, Provenance.SERIES_TRUNCATION)


def log_tail_bound(alpha, r, m, delta=0.0, ref=0.0):
    """Log of an upper bound for ``sum_{j>=m} j^delta exp(-alpha j^r)``.

    Shifted by ``+alpha ref^r``.  Returns ``+inf`` when ``m`` is too small for
    the bound to be certified (integrand not yet decreasing, or ``m`` below
    the range of the integral estimate).
    """
    m = float(m)
    if m < 1.0:
        return math.inf
    if delta > 0.0 and m < (delta / (alpha * r)) ** (1.0 / r):
        return math.inf
    if m < _admissible_start(alpha, r, delta):
        return math.inf
    c = abs(delta + 1.0 - r)
    band = 1.0 + _THETA_MAX * c / (alpha * r * m ** r)
    lead = -alpha * float(pow_diff(m, ref, r))
    # g(m) + int_m^inf g, both carrying exp(-alpha m^r)
    inner = m ** delta + m ** (delta + 1.0 - r) / (alpha * r) * band
    return lead + math.log(inner)


def _least_index(predicate, lo):
    """Least integer ``m >= lo`` with ``predicate(m)``, assuming monotonicity from ``lo`` on."""
    lo = int(lo)
    if predicate(lo):
        return lo
    step = 1
    hi = lo + step
    while not predicate(hi):
        lo = hi
        step *= 2
        hi = lo + step
        if hi > MAX_INDEX:
            raise ThresholdOverflowError("index search exceeded 2**62")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def truncation_index(alpha, r, start, tol, ref=0.0, delta=0.0):
    """Least ``M >= start`` whose certified tail from ``M + 1`` is at most ``tol``.

    Returns ``(M, bound)``.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    log_tol = math.log(tol)

    def ok(M):
        return log_tail_bound(alpha, r, M + 1, delta, ref) <= log_tol

    M = _least_index(ok, start)
    return M, math.exp(log_tail_bound(alpha, r, M + 1, delta, ref))


# ---------------------------------------------------------------------------
# kernel and tail series


@dataclass(frozen=True)
class TailSeries:
    """``sum_{k>=n} exp(-alpha k^r) cos(k t + phase)`` truncated at ``truncation_index``.

    ``tail_bound`` bounds the dropped terms in absolute value (in scaled units
    when ``scaled`` is set).
    """

    params: KernelParams
    start_index: int
    phase: float
    truncation_index: int
    tail_bound: float
    scaled: bool = False
    _w: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.start_index < 1:
            raise DomainError("start_index must be at least 1")
        if self.truncation_index < self.start_index:
            raise DomainError("truncation_index must be >= start_index")
        if self.tail_bound < 0:
            raise DomainError("tail_bound must be nonnegative")
        terms = self.truncation_index - self.start_index + 1
        if terms > MAX_SERIES_TERMS:
            raise ConvergenceError("tail series needs too many terms for the requested tolerance",
                                   {"terms": terms, "limit": MAX_SERIES_TERMS})
        if self._w is None:
            k = np.arange(self.start_index, self.truncation_index + 1, dtype=float)
            ref = self.start_index if self.scaled else 0.0
            object.__setattr__(self, "_w", weights(self.params.alpha, self.params.r, k, ref))

    @classmethod
    def build(cls, params: KernelParams, start_index: int, phase: float = 0.0,
              tol: float = 1e-15, scaled: bool = False) -> "TailSeries":
        ref = start_index if scaled else 0.0
        M, bound = truncation_index(params.alpha, params.r, start_index, tol, ref)
        return cls(params, int(start_index), float(phase), int(M), bound, scaled)

    @property
    def k(self) -> np.ndarray:
        return np.arange(self.start_index, self.truncation_index + 1)

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def log_scale(self) -> float:
        """Add this to the log of a scaled value to undo the scaling."""
        if not self.scaled:
            return 0.0
        return -self.params.alpha * self.start_index ** self.params.r

    def coefficients(self):
        """Cosine and sine coefficient arrays for orders ``1..truncation_index``."""
        size = self.truncation_index
        a = np.zeros(size)
        b = np.zeros(size)
        idx = self.k - 1
        a[idx] = self._w * math.cos(self.phase)
        b[idx] = -self._w * math.sin(self.phase)
        return a, b

    def energy(self) -> float:
        """``sum_k w_k^2`` over the retained terms."""
        return float(np.dot(self._w, self._w))

    def __call__(self, t):
        if np.ndim(t) == 0:
            return tail_cos_eval(self, t).value
        return tail_cos_values(self, t)


def _eval_cos_sum(k, w, t, phase):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t.shape)
    flat_t = t.ravel()
    flat = out.ravel()
    block = max(1, 4_000_000 // max(1, k.size))
    for i in range(0, flat_t.size, block):
        tt = flat_t[i:i + block]
        flat[i:i + block] = np.cos(np.outer(tt, k) + phase) @ w
    return out.reshape(t.shape)


def _rounding_bound(k, w, t, phase):
    """Floating-point error of ``sum w_k cos(k t + phase)``: argument rounding plus summation."""
    arg = np.abs(k * t + phase) + 1.0
    depth = math.ceil(math.log2(max(2, k.size))) + 3
    return _EPS * float(np.dot(w, 2.0 * arg + depth))


def tail_cos_eval(series: TailSeries, t) -> CertifiedValue:
    """Evaluate a :class:`TailSeries` at the scalar ``t``."""
    t = float(t)
    k = series.k.astype(float)
    value = float(_eval_cos_sum(k, series.weights, t, series.phase)[0])
    return CertifiedValue(value, series.tail_bound + _rounding_bound(k, series.weights, t, series.phase),
                          Provenance.SERIES_TRUNCATION)


def tail_cos_values(series: TailSeries, t) -> np.ndarray:
    """Vectorised evaluation of a tail series on an array of points."""
    return _eval_cos_sum(series.k.astype(float), series.weights, t, series.phase)


def kernel_series(params: KernelParams, tol: float = 1e-15) -> TailSeries:
    """The full kernel as a tail series starting at ``k = 1``."""
    return TailSeries.build(params, 1, -0.5 * math.pi * params.beta, tol=tol)


def kernel_eval(params: KernelParams, t: float, tol: float = 1e-14) -> CertifiedValue:
    """``P_{alpha,r,beta}(t)`` with absolute error at most ``tol``."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    series = TailSeries.build(params, 1, -0.5 * math.pi * params.beta, tol=0.25 * tol)
    return tail_cos_eval(series, t)


def gamma_n(beta: float, x: float, n: int) -> float:
    """Phase ``((2n - 1) x + pi (beta - 1)) / 2`` of the tail in the integral representation."""
    if n < 1:
        raise DomainError("n must be at least 1")
    return 0.5 * ((2 * n - 1) * x + math.pi * (beta - 1.0))


# ---------------------------------------------------------------------------
# interpolation remainder r_n


class RemainderSeries(NamedTuple):
    """``r_n`` as a trigonometric series in ``t``.

    ``a[j]``, ``b[j]`` are the cosine and sine coefficients of order ``j + 1``.
    """

    a: np.ndarray
    b: np.ndarray
    tail_bound: float
    log_scale: float


def _block_count(nu, n):
    """Number of blocks ``k >= 1`` with ``(2k+1) n - k <= nu``."""
    return np.maximum(0, (np.asarray(nu) - n) // (2 * n - 1))


def remainder_series(params: KernelParams, x: float, n: int, tol: float = 1e-15,
                     scaled: bool = False) -> RemainderSeries:
    """Coefficients of ``r_n(t)`` for the interpolation point ``x``.

    ``r_n(t) = sum_{k>=1} sum_{nu >= (2k+1)n-k} w_nu sin(nu t + (k + 1/2)(2n-1)x + beta pi/2)``.
    The inner sums are regrouped by ``nu``; frequencies beyond the truncation
    point contribute at most ``tail_bound`` in absolute value.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    alpha, r = params.alpha, params.r
    N = 2 * n - 1
    ref = n if scaled else 0.0
    nu0 = 3 * n - 1
    # sum_{nu>V} K(nu) w_nu <= (1/N) sum_{nu>=V+1} nu w_nu
    V, bound = truncation_index(alpha, r, nu0, tol * N, ref, delta=1.0)
    bound /= N
    nu = np.arange(nu0, V + 1)
    kmax = int(_block_count(V, n))
    kk = np.arange(1, kmax + 1, dtype=float)
    theta = (kk + 0.5) * N * x + 0.5 * math.pi * params.beta
    cum = np.cumsum(np.exp(1j * theta))
    S = cum[_block_count(nu, n) - 1]
    w = weights(alpha, r, nu.astype(float), ref)
    a = np.zeros(V)
    b = np.zeros(V)
    # sin(nu t + th) = sin(nu t) cos th + cos(nu t) sin th
    a[nu - 1] = w * S.imag
    b[nu - 1] = w * S.real
    log_scale = -alpha * n ** r if scaled else 0.0
    return RemainderSeries(a, b, bound, log_scale)


def remainder_rn(params: KernelParams, x: float, n: int, t: float,
                 tol: float = 1e-15) -> CertifiedValue:
    """Value of the interpolation remainder ``r_n(t)`` at one point."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    series = remainder_series(params, x, n, tol)
    order = np.arange(1, series.a.size + 1, dtype=float)
    t = float(t)
    value = float(series.a @ np.cos(order * t) + series.b @ np.sin(order * t))
    rounding = 4 * _EPS * order.size * float(np.sum(np.abs(series.a) + np.abs(series.b)))
    return CertifiedValue(value, series.tail_bound + rounding, Provenance.SERIES_TRUNCATION)


# ---------------------------------------------------------------------------
# double sum of Lemma 1


DOUBLE_SUM_MAX_TERMS = 1 << 22


class DoubleSum(NamedTuple):
    """``sum_{k>=1} sum_{nu>=(2k+1)n-k} exp(-alpha nu^r)`` in log form."""

    log_value: float
    log_upper: float


def remainder_double_sum(alpha: float, r: float, n: int, rel_tol: float = 1e-15) -> DoubleSum:
    """Certified value of the double sum bounding ``sup_t |r_n(t)|``.

    Computed relative to ``exp(-alpha (3n - 1)^r)`` so that it stays finite for
    any ``n`` up to ``2**62``.  At most ``DOUBLE_SUM_MAX_TERMS`` frequencies are
    summed; anything beyond is covered by the certified tail in ``log_upper``,
    and ``log_value`` is then a lower bound.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    N = 2 * n - 1
    nu0 = 3 * n - 1
    # everything below is relative to exp(-alpha nu0^r)
    V, bound = truncation_index(alpha, r, nu0, rel_tol * N, ref=nu0, delta=1.0)
    if V - nu0 + 1 > DOUBLE_SUM_MAX_TERMS:
        # sum a fixed budget exactly and bound the rest analytically
        cut = nu0 + DOUBLE_SUM_MAX_TERMS
        log_rest = log_tail_bound(alpha, r, cut, 1.0, ref=nu0)
        if math.isfinite(log_rest):
            V, bound = cut - 1, math.exp(log_rest)
    bound /= N
    total = 0.0
    j0 = 0
    span = V - nu0 + 1
    chunk = 1 << 18
    while j0 < span:
        j = np.arange(j0, min(span, j0 + chunk), dtype=float)
        nu = nu0 + j
        counts = np.floor((nu - n) / N)
        total += float(np.sum(counts * np.exp(-alpha * pow_diff(nu, nu0, r))))
        j0 += chunk
    lead = -alpha * float(nu0) ** r
    log_value = lead + math.log(total)
    log_upper = lead + math.log(total * (1.0 + 4 * _EPS * span) + bound)
    return DoubleSum(log_value, log_upper)


def lemma1_condition(alpha: float, r: float, n: int) -> float:
    """Left side of the admissibility condition ``1/(alpha r n^r) + alpha r / n^(1-r)``."""
    ar = alpha * r
    return 1.0 / (ar * n ** r) + ar / n ** (1.0 - r)


@dataclass(frozen=True)
class Lemma1Result:
    lhs: CertifiedValue
    rhs: float
    holds: bool
    applicable: bool
    log_lhs_upper: float
    log_rhs: float


def lemma1_check(params: KernelParams, n: int) -> Lemma1Result:
    """Compare the certified double sum with ``(636/169) n^(1-r)/(alpha r) exp(-alpha (3n-1)^r)``.

    ``holds`` is decided in log space, so it stays meaningful when both sides
    underflow in double precision.  When the admissibility condition fails the
    result is marked not applicable and ``holds`` is ``False``.
    """
    alpha, r = params.alpha, params.r
    if not 0.0 < r < 1.0:
        raise DomainError("Lemma 1 concerns r in (0, 1)")
    applicable = lemma1_condition(alpha, r, n) <= 1.0 / 14.0
    ds = remainder_double_sum(alpha, r, n)
    value = math.exp(ds.log_value)
    upper = math.exp(ds.log_upper)
    lhs = CertifiedValue(value, max(0.0, upper - value), Provenance.SERIES_TRUNCATION)
    log_rhs = (math.log(636.0 / 169.0) + (1.0 - r) * math.log(n) - math.log(alpha * r)
               - alpha * float(3 * n - 1) ** r)
    holds = applicable and ds.log_upper < log_rhs
    return Lemma1Result(lhs, math.exp(log_rhs), holds, applicable, ds.log_upper, log_rhs)


def least_lemma1_n(params: KernelParams) -> int:
    """Least ``n`` satisfying the admissibility condition (it is monotone in ``n``)."""
    alpha, r = params.alpha, params.r
    if not 0.0 < r < 1.0:
        raise DomainError("r must lie in (0, 1)")
    return _least_index(lambda n: lemma1_condition(alpha, r, n) <= 1.0 / 14.0, 1)


# ---------------------------------------------------------------------------
# thresholds n_*, n_0, n_1

THRESHOLDS = ("n_star", "n_0", "n_1")


def _threshold_rhs(p: LpExponent) -> float:
    if p.p == 1.0:
        return 1.0 / 14.0
    base = 1.0 / (3.0 * math.pi) ** 3
    if p.is_inf:
        return base
    return base * (p.p - 1.0) / p.p


def threshold_criterion(params: KernelParams, p, which: str):
    """Return ``(lhs(n), rhs, strict)`` defining the threshold ``which``."""
    alpha, r = params.alpha, params.r
    ar = alpha * r
    p = as_exponent(p)
    if which == "n_star":
        chi = p.chi
        return (lambda n: math.log(math.pi * n) / (ar * n ** r) + ar * chi / n ** (1.0 - r),
                _threshold_rhs(p), False)
    if which == "n_0":
        chi = p.chi
        return (lambda n: 1.0 / (ar * n ** r) + ar * chi / n ** (1.0 - r),
                _threshold_rhs(p), False)
    if which == "n_1":
        return (lambda n: (1.0 + math.log(math.pi * n ** (1.0 - r) / ar)) / (ar * n ** r)
                + ar / n ** (1.0 - r),
                1.0 / (3.0 * math.pi) ** 3, True)
    raise DomainError(f"unknown threshold {which!r}; expected one of {THRESHOLDS}")


def _monotone_from(params, which):
    """An index beyond which the threshold criterion is nonincreasing in ``n``."""
    alpha, r = params.alpha, params.r
    ar = alpha * r
    if which == "n_0":
        return 1.0
    if which == "n_star":
        # log(pi n) / n^r decreases once log(pi n) >= 1/r
        return math.exp(1.0 / r) / math.pi
    # (1 + log(pi n^(1-r)/ar)) / n^r decreases once that log >= (1 - 2r)/r
    return (ar * math.exp((1.0 - 2.0 * r) / r) / math.pi) ** (1.0 / (1.0 - r))


def threshold(params: KernelParams, p, which: str = "n_star", scan_limit: int = 10_000_000) -> int:
    """Least ``n >= 1`` satisfying the threshold inequality ``which``.

    The criteria are sums of a term that eventually decreases and one that
    always does.  Below the point where the whole criterion is known to be
    decreasing the range is scanned directly; past it, exponential bracketing
    and bisection locate the first admissible index.
    """
    alpha, r = params.alpha, params.r
    if not 0.0 < r < 1.0:
        raise DomainError("thresholds are defined for r in (0, 1)")
    lhs, rhs, strict = threshold_criterion(params, p, which)

    def ok(n):
        value = lhs(float(n))
        return value < rhs if strict else value <= rhs

    ar = alpha * r
    chi = 1.0 if which == "n_1" else as_exponent(p).chi
    # the always-decreasing part alone must already fit under rhs
    n_lo = max(1, math.floor((ar * chi / rhs) ** (1.0 / (1.0 - r))))
    mono = _monotone_from(params, which)
    if n_lo < mono:
        stop = min(math.ceil(mono), n_lo + scan_limit)
        n = n_lo
        chunk = 1 << 16
        while n < stop:
            hi = min(stop, n + chunk)
            for m in range(n, hi):
                if ok(m):
                    return m
            n = hi
        if stop < math.ceil(mono):
            raise ThresholdOverflowError("threshold scan range exceeded scan_limit")
        start = stop
    else:
        start = n_lo
    if start > MAX_INDEX:
        raise ThresholdOverflowError("threshold exceeds 2**62")
    return _least_index(ok, start)
