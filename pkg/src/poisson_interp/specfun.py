"""Special functions behind the asymptotic constants.

Gamma, the complete elliptic integral of the first kind, the Gauss
hypergeometric function on ``[0, 1]``, Favard constants, the norms
``I_s(v) = || (1 + t^2)^{-1/2} ||_{L_s[0, v]}`` and ``|| cos t ||_q``.
Results that carry an error estimate are returned as :class:`CertifiedValue`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._quad import adaptive_quad
from .exceptions import ConvergenceError, DomainError

_EPS = np.finfo(float).eps


class Provenance(str, enum.Enum):
    EXACT = "exact"
    SERIES_TRUNCATION = "series_truncation"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class CertifiedValue:
    """A number together with an absolute error bound and where it came from."""

    value: float
    abs_err: float
    provenance: Provenance

    def __post_init__(self):
        if not (self.abs_err >= 0.0 and math.isfinite(self.abs_err)):
            raise ValueError(f"abs_err must be finite and nonnegative, got {self.abs_err}")
        if self.provenance == Provenance.EXACT and self.abs_err != 0.0:
            raise ValueError("exact values carry abs_err == 0")
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @property
    def lower(self) -> float:
        return self.value - self.abs_err

    @property
    def upper(self) -> float:
        return self.value + self.abs_err

    def __float__(self):
        return float(self.value)

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= x <= self.upper + slack


@dataclass(frozen=True)
class LpExponent:
    """Exponent ``p`` in ``[1, inf]``; ``math.inf`` stands for the sup norm."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p < 1.0:
            raise DomainError(f"p must lie in [1, inf], got {self.p}")
        object.__setattr__(self, "p", p)

    @classmethod
    def parse(cls, value) -> "LpExponent":
        if isinstance(value, LpExponent):
            return value
        if isinstance(value, str):
            text = value.strip().lower()
            if text in {"inf", "infinity", "oo", "∞"}:
                return cls(math.inf)
            return cls(float(text))
        return cls(float(value))

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.p)

    def conjugate(self) -> "LpExponent":
        if self.p == 1.0:
            return LpExponent(math.inf)
        if self.is_inf:
            return LpExponent(1.0)
        return LpExponent(self.p / (self.p - 1.0))

    @property
    def chi(self) -> float:
        """``p`` for finite ``p`` and ``1`` for ``p = inf``."""
        return 1.0 if self.is_inf else self.p

    def __float__(self):
        return self.p

    def __str__(self):
        return "inf" if self.is_inf else f"{self.p:g}"


def as_exponent(p) -> LpExponent:
    return LpExponent.parse(p)


def gamma_fn(x: float) -> float:
    """Euler's Gamma function for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"gamma_fn requires x > 0, got {x}")
    return math.gamma(x)


def _agm(a, b):
    for _ in range(64):
        if abs(a - b) <= 4 * _EPS * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def elliptic_K(q: float) -> CertifiedValue:
    """Complete elliptic integral of the first kind with modulus ``q``.

    ``K(q) = int_0^{pi/2} du / sqrt(1 - q^2 sin^2 u) = pi / (2 AGM(1, sqrt(1 - q^2)))``.
    """
    q = float(q)
    if not 0.0 <= q < 1.0:
        raise DomainError(f"elliptic_K requires 0 <= q < 1, got {q}")
    if q == 0.0:
        return CertifiedValue(math.pi / 2, 0.0, Provenance.EXACT)
    kp = math.sqrt((1.0 - q) * (1.0 + q))
    value = math.pi / (2.0 * _agm(1.0, kp))
    return CertifiedValue(value, 16 * _EPS * value, Provenance.SERIES_TRUNCATION)


def _is_nonpositive_int(v):
    return v <= 0 and float(v).is_integer()


def _gamma_sign(x):
    if x > 0:
        return 1.0
    return -1.0 if math.ceil(-x) % 2 else 1.0


def hyp2f1(a: float, b: float, c: float, z: float, tol: float = 1e-13,
           max_terms: int = 50_000_000) -> CertifiedValue:
    """Gauss hypergeometric function ``F(a, b; c; z)`` for ``z`` in ``[0, 1]``.

    ``z = 1`` uses Gauss's summation ``G(c)G(c-a-b) / (G(c-a)G(c-b))`` and
    requires ``c - a - b > 0``.  For ``z < 1`` the series is summed until a
    geometric bound on the remaining terms drops below ``tol``.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpositive_int(c):
        raise DomainError("c must not be a nonpositive integer")
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"hyp2f1 is implemented for z in [0, 1], got {z}")
    if z == 0.0 or a == 0.0 or b == 0.0:
        return CertifiedValue(1.0, 0.0, Provenance.EXACT)
    if z == 1.0:
        s = c - a - b
        if not s > 0.0:
            raise DomainError(f"F(a,b;c;1) diverges for c - a - b = {s} <= 0")
        if _is_nonpositive_int(c - a) or _is_nonpositive_int(c - b):
            return CertifiedValue(0.0, 0.0, Provenance.EXACT)
        log_mag = math.lgamma(c) + math.lgamma(s) - math.lgamma(c - a) - math.lgamma(c - b)
        sign = _gamma_sign(c) * _gamma_sign(c - a) * _gamma_sign(c - b)
        value = sign * math.exp(log_mag)
        return CertifiedValue(value, 64 * _EPS * abs(value), Provenance.SERIES_TRUNCATION)
    return _hyp2f1_series(a, b, c, z, tol, max_terms)


def _hyp2f1_series(a, b, c, z, tol, max_terms):
    A, B, C = abs(a), abs(b), abs(c)
    total = 1.0
    term = 1.0
    k0 = 0
    chunk = 4096
    while k0 < max_terms:
        k = np.arange(k0, k0 + chunk, dtype=float)
        ratios = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        terms = term * np.cumprod(ratios)
        total += float(np.sum(terms))
        term = float(terms[-1])
        k0 += chunk
        if term == 0.0:
            return CertifiedValue(total, 0.0 if k0 <= 1 else _EPS * abs(total), Provenance.SERIES_TRUNCATION)
        # sup_{j >= k0} |ratio_j| <= z * max(1, (k0+A)/(k0+1)) * (k0+B)/(k0-C)
        if k0 > C:
            rho = z * max(1.0, (k0 + A) / (k0 + 1.0)) * (k0 + B) / (k0 - C)
            if rho < 1.0:
                bound = abs(term) * rho / (1.0 - rho)
                if bound <= tol:
                    err = bound + 4 * _EPS * k0 * max(1.0, abs(total))
                    return CertifiedValue(total, err, Provenance.SERIES_TRUNCATION)
        chunk = min(2 * chunk, 1 << 20)
    raise ConvergenceError("hypergeometric series did not converge", {"a": a, "b": b, "c": c, "z": z})


def favard(r: int, tol: float = 1e-13) -> CertifiedValue:
    """Favard constant ``K_r = (4/pi) sum_v (-1)^{v(r+1)} / (2v+1)^{r+1}``."""
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise DomainError(f"favard requires a positive integer r, got {r}")
    r = int(r)
    s = r + 1
    if r % 2 == 1:
        # positive terms: partial sum plus Euler-Maclaurin tail
        n_terms = 2000
        v = np.arange(n_terms, dtype=float)
        partial = float(np.sum((2 * v + 1) ** (-float(s))))
        x = 2.0 * n_terms + 1.0
        # sum_{v>=N} g(v), g(v) = (2v+1)^{-s}
        integral = x ** (1 - s) / (2.0 * (s - 1))
        g0 = x ** (-s)
        g1 = -2.0 * s * x ** (-s - 1)
        tail = integral + 0.5 * g0 - g1 / 12.0
        g3 = 8.0 * s * (s + 1) * (s + 2) * x ** (-s - 3)
        err_series = g3 / 720.0
        value = 4.0 / math.pi * (partial + tail)
        err = 4.0 / math.pi * err_series + 8 * _EPS * value
        return CertifiedValue(value, err, Provenance.SERIES_TRUNCATION)
    # alternating terms: error below the first omitted term
    n_terms = max(2, int(math.ceil(0.5 * ((4.0 / (math.pi * tol)) ** (1.0 / s)))) + 1)
    v = np.arange(n_terms, dtype=float)
    terms = (-1.0) ** v * (2 * v + 1) ** (-float(s))
    partial = float(np.sum(terms[::-1]))
    first_omitted = (2.0 * n_terms + 1.0) ** (-s)
    value = 4.0 / math.pi * partial
    err = 4.0 / math.pi * first_omitted + 8 * _EPS * value
    return CertifiedValue(value, err, Provenance.SERIES_TRUNCATION)


def I_s(s, v: float, tol: float = 1e-12) -> CertifiedValue:
    """``|| (1 + t^2)^{-1/2} ||_{L_s[0, v]}``; ``s`` may be ``inf``."""
    s = as_exponent(s)
    v = float(v)
    if v < 0.0:
        raise DomainError(f"I_s requires v >= 0, got {v}")
    if s.is_inf:
        return CertifiedValue(1.0, 0.0, Provenance.EXACT)
    if v == 0.0:
        return CertifiedValue(0.0, 0.0, Provenance.EXACT)
    sp = s.p
    integral, err = adaptive_quad(lambda t: (1.0 + t * t) ** (-0.5 * sp), 0.0, v, tol=tol)
    value = integral ** (1.0 / sp)
    # d(J^{1/s}) = J^{1/s - 1} / s dJ
    err = value / (sp * integral) * err + 4 * _EPS * value
    return CertifiedValue(value, err, Provenance.QUADRATURE)


def cos_norm(q, tol: float = 1e-13) -> CertifiedValue:
    """``|| cos t ||_q`` over one period."""
    q = as_exponent(q)
    if q.is_inf:
        return CertifiedValue(1.0, 0.0, Provenance.EXACT)
    if q.p == 1.0:
        return CertifiedValue(4.0, 0.0, Provenance.EXACT)
    qp = q.p
    half, err = adaptive_quad(lambda t: np.cos(t) ** qp, 0.0, 0.5 * math.pi, tol=tol / 4)
    integral = 4.0 * half
    value = integral ** (1.0 / qp)
    err = value / (qp * integral) * 4.0 * err + 4 * _EPS * value
    return CertifiedValue(value, err, Provenance.QUADRATURE)
