"""Trigonometric polynomials and interpolation on ``2n - 1`` equidistant nodes.

Polynomials use the convention ``a0/2 + sum_k (a_k cos kt + b_k sin kt)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .exceptions import ConvergenceError, DomainError
from .kernels import KernelParams, TailSeries, tail_cos_values, weights

_SING_GUARD = 1e-8


@dataclass(frozen=True)
class TrigPoly:
    """``a0/2 + sum_{k=1}^{m} a_k cos kt + b_k sin kt``."""

    a0: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float)).copy()
        b = np.atleast_1d(np.asarray(self.b, dtype=float)).copy()
        if a.ndim != 1 or a.shape != b.shape:
            raise DomainError("cosine and sine coefficient arrays must have equal length")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def zero(cls, order: int = 0) -> "TrigPoly":
        return cls(0.0, np.zeros(order), np.zeros(order))

    @classmethod
    def from_vector(cls, c: np.ndarray) -> "TrigPoly":
        """Inverse of :meth:`as_vector`."""
        c = np.asarray(c, dtype=float)
        m = (c.size - 1) // 2
        return cls(2.0 * c[0], c[1:m + 1], c[m + 1:])

    @property
    def order(self) -> int:
        return int(self.a.size)

    def as_vector(self) -> np.ndarray:
        """Coefficients on the basis ``(1, cos t, ..., cos mt, sin t, ..., sin mt)``."""
        return np.concatenate(([0.5 * self.a0], self.a, self.b))

    def padded(self, order: int) -> "TrigPoly":
        if order < self.order:
            return self.truncated(order)
        extra = order - self.order
        return TrigPoly(self.a0, np.pad(self.a, (0, extra)), np.pad(self.b, (0, extra)))

    def truncated(self, order: int) -> "TrigPoly":
        """Drop every harmonic above ``order``."""
        order = max(0, int(order))
        return TrigPoly(self.a0, self.a[:order], self.b[:order])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        k = np.arange(1, self.order + 1, dtype=float)
        out = np.full(tt.shape, 0.5 * self.a0)
        if self.order:
            block = max(1, 4_000_000 // self.order)
            flat = tt.ravel()
            res = out.ravel()
            for i in range(0, flat.size, block):
                arg = np.outer(flat[i:i + block], k)
                res[i:i + block] += np.cos(arg) @ self.a + np.sin(arg) @ self.b
            out = res.reshape(tt.shape)
        return float(out[0]) if scalar else out

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        m = max(self.order, other.order)
        x, y = self.padded(m), other.padded(m)
        return TrigPoly(x.a0 + y.a0, x.a + y.a, x.b + y.b)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "TrigPoly":
        return TrigPoly(c * self.a0, c * self.a, c * self.b)

    def energy(self) -> float:
        """``||.||_2^2 / pi``, i.e. ``a0^2/2 + sum (a_k^2 + b_k^2)``."""
        return 0.5 * self.a0 ** 2 + float(np.dot(self.a, self.a) + np.dot(self.b, self.b))

    def max_abs_coeff(self) -> float:
        vals = [abs(self.a0)]
        if self.order:
            vals += [float(np.max(np.abs(self.a))), float(np.max(np.abs(self.b)))]
        return max(vals)


Backing = Union[TrigPoly, TailSeries, None]


@dataclass(frozen=True)
class PeriodicFn:
    """A ``2 pi``-periodic function, optionally with known Fourier coefficients.

    ``evaluator`` must accept numpy arrays.  ``backing`` is either a
    :class:`TrigPoly` (the function *is* that polynomial) or a
    :class:`TailSeries` (the function is that series, truncation included).
    """

    evaluator: Callable
    backing: Backing = None
    name: str = field(default="f", compare=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return float(np.asarray(self.evaluator(np.atleast_1d(t)))[0])
        return np.asarray(self.evaluator(t), dtype=float)

    @classmethod
    def from_trigpoly(cls, poly: TrigPoly, name: str = "t") -> "PeriodicFn":
        return cls(poly, poly, name)

    @classmethod
    def from_series(cls, series: TailSeries, name: str = "tail") -> "PeriodicFn":
        return cls(lambda t: tail_cos_values(series, t), series, name)

    @classmethod
    def from_callable(cls, func: Callable, name: str = "f") -> "PeriodicFn":
        return cls(func, None, name)

    def coefficients(self) -> Optional[TrigPoly]:
        """Known coefficients as a :class:`TrigPoly`, or ``None`` for black boxes."""
        if isinstance(self.backing, TrigPoly):
            return self.backing
        if isinstance(self.backing, TailSeries):
            a, b = self.backing.coefficients()
            return TrigPoly(0.0, a, b)
        return None

    def bandwidth(self) -> Optional[int]:
        coeffs = self.coefficients()
        return None if coeffs is None else coeffs.order

    def shifted(self, lam: float) -> "PeriodicFn":
        """``f - lam``."""
        coeffs = self.coefficients()
        backing = None
        if coeffs is not None:
            backing = TrigPoly(coeffs.a0 - 2.0 * lam, coeffs.a, coeffs.b)
        return PeriodicFn(lambda t: self.evaluator(t) - lam, backing, self.name)

    def minus(self, poly: TrigPoly) -> "PeriodicFn":
        """``f - poly``."""
        coeffs = self.coefficients()
        backing = None if coeffs is None else coeffs - poly
        return PeriodicFn(lambda t: self.evaluator(t) - poly(t), backing, self.name)


@dataclass(frozen=True)
class NodeGrid:
    """Interpolation nodes ``x_k = 2 k pi / (2n - 1)``, ``k = 0..2n-2``."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def size(self) -> int:
        return 2 * self.n - 1

    @property
    def nodes(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.size) / self.size


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    return int(n)


def dirichlet(n: int, t):
    """``D_{n-1}(t) = 1/2 + sum_{k=1}^{n-1} cos kt = sin((n - 1/2) t) / (2 sin(t/2))``."""
    n = _check_n(n)
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    half = np.sin(0.5 * t)
    near = np.abs(half) < _SING_GUARD
    out = np.empty(t.shape)
    far = ~near
    out[far] = np.sin((n - 0.5) * t[far]) / (2.0 * half[far])
    if np.any(near):
        k = np.arange(1, n, dtype=float)
        out[near] = 0.5 + np.cos(np.outer(t[near], k)).sum(axis=1)
    return float(out[0]) if scalar else out


def node_samples(f: PeriodicFn, n: int) -> np.ndarray:
    return np.asarray(f(NodeGrid(n).nodes), dtype=float)


def lagrange_interp(f: PeriodicFn, n: int) -> TrigPoly:
    """The order ``n - 1`` polynomial matching ``f`` at the ``2n - 1`` nodes.

    Coefficients come from the discrete orthogonality of the node set, i.e. a
    real FFT of the samples.
    """
    n = _check_n(n)
    N = 2 * n - 1
    Y = np.fft.rfft(node_samples(f, n))
    a0 = 2.0 * Y[0].real / N
    a = 2.0 * Y[1:n].real / N
    b = -2.0 * Y[1:n].imag / N
    return TrigPoly(a0, a, b)


def interp_weights(n: int, x) -> np.ndarray:
    """``(2/(2n-1)) D_{n-1}(x - x_k)`` for each node; shape ``(len(x), 2n-1)``."""
    n = _check_n(n)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nodes = NodeGrid(n).nodes
    diff = x[:, None] - nodes[None, :]
    return (2.0 / (2 * n - 1)) * dirichlet(n, diff.ravel()).reshape(diff.shape)


def interp_eval(f: PeriodicFn, n: int, x):
    """``S_{n-1}(f; x)`` by direct summation against the Dirichlet kernel."""
    x_arr = np.asarray(x, dtype=float)
    vals = interp_weights(n, x_arr) @ node_samples(f, n)
    return float(vals[0]) if x_arr.ndim == 0 else vals.reshape(x_arr.shape)


def rho_tilde(f: PeriodicFn, n: int, x):
    """Pointwise deviation ``f(x) - S_{n-1}(f; x)``."""
    x_arr = np.asarray(x, dtype=float)
    vals = np.asarray(f(np.atleast_1d(x_arr)), dtype=float) - interp_weights(n, x_arr) @ node_samples(f, n)
    return float(vals[0]) if x_arr.ndim == 0 else vals.reshape(x_arr.shape)


def lebesgue_fn(n: int, x):
    """``(2/(2n-1)) sum_k |D_{n-1}(x - x_k)|``."""
    x_arr = np.asarray(x, dtype=float)
    vals = np.abs(interp_weights(n, x_arr)).sum(axis=1)
    return float(vals[0]) if x_arr.ndim == 0 else vals.reshape(x_arr.shape)


def lebesgue_main_term(n: int, x):
    """``(2/pi) |sin((2n-1)x/2)| ln n``."""
    n = _check_n(n)
    x = np.asarray(x, dtype=float)
    return 2.0 / math.pi * np.abs(np.sin(0.5 * (2 * n - 1) * x)) * math.log(n)


def fourier_partial_sum(f: PeriodicFn, n: int, quad_tol: float = 1e-12,
                        max_size: int = 1 << 22) -> TrigPoly:
    """Fourier partial sum ``S_{n-1}(f)``.

    Known coefficients are truncated directly.  Otherwise the coefficients are
    computed with the trapezoidal rule on ``2^m`` points (spectrally accurate
    for smooth periodic ``f``), doubling ``m`` until successive levels agree to
    ``quad_tol / 4``.
    """
    n = _check_n(n)
    if not quad_tol > 0:
        raise DomainError("quad_tol must be positive")
    coeffs = f.coefficients()
    if coeffs is not None:
        return coeffs.padded(n - 1)
    size = 1 << max(6, math.ceil(math.log2(4 * n)))
    prev = None
    while size <= max_size:
        t = 2.0 * math.pi * np.arange(size) / size
        Y = np.fft.rfft(f(t))
        cur = np.concatenate(([2.0 * Y[0].real], 2.0 * Y[1:n].real, -2.0 * Y[1:n].imag)) / size
        if prev is not None and np.max(np.abs(cur - prev)) <= 0.25 * quad_tol:
            return TrigPoly(cur[0], cur[1:n], cur[n:])
        prev = cur
        size *= 2
    raise ConvergenceError("Fourier coefficients did not settle", {"n": n, "size": size})


def poisson_integral(params: KernelParams, phi: TrigPoly, scale_ref: float = 0.0) -> TrigPoly:
    """Generalized Poisson integral of a trigonometric polynomial.

    Maps ``c_k cos kt + d_k sin kt`` to ``psi_k (c_k cos(kt - theta) + d_k sin(kt - theta))``
    with ``psi_k = exp(-alpha k^r)`` and ``theta = beta pi / 2``; the constant
    term is kept.  ``scale_ref > 0`` multiplies every ``psi_k`` by
    ``exp(alpha scale_ref^r)``.
    """
    k = np.arange(1, phi.order + 1, dtype=float)
    psi = weights(params.alpha, params.r, k, scale_ref)
    theta = 0.5 * math.pi * params.beta
    c, s = math.cos(theta), math.sin(theta)
    a = psi * (phi.a * c - phi.b * s)
    b = psi * (phi.a * s + phi.b * c)
    return TrigPoly(phi.a0, a, b)
