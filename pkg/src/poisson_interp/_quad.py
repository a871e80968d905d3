"""Quadrature and periodic-grid helpers shared by the numerical modules."""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ConvergenceError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _gl(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


def adaptive_quad(f, a, b, tol=1e-12, max_panels=200_000):
    """Integrate ``f`` over ``[a, b]`` by adaptive interval halving.

    Each panel is integrated with 15-point Gauss-Legendre and compared with the
    sum over its two halves; a panel is accepted once the two levels differ by
    at most its share of ``tol / 2``.

    Parameters
    ----------
    f : callable
        Vectorised integrand, ``f(ndarray) -> ndarray``.
    a, b : float
        Finite integration limits.
    tol : float
        Target absolute error.

    Returns
    -------
    value, err : float
        Integral estimate and the accumulated two-level difference.
    """
    if a == b:
        return 0.0, 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    length = b - a
    total = 0.0
    err = 0.0
    stack = [(a, b, _gl(f, a, b))]
    panels = 0
    while stack:
        lo, hi, coarse = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _gl(f, lo, mid)
        right = _gl(f, mid, hi)
        fine = left + right
        diff = abs(fine - coarse)
        share = 0.5 * tol * (hi - lo) / length
        panels += 1
        if diff <= share or (hi - lo) <= 1e-15 * max(1.0, abs(mid)):
            total += fine
            err += diff
            continue
        if panels > max_panels:
            raise ConvergenceError(
                "adaptive quadrature exceeded panel budget",
                {"a": a, "b": b, "tol": tol, "panels": panels},
            )
        stack.append((lo, mid, left))
        stack.append((mid, hi, right))
    return sign * total, err


def midpoint_grid(size):
    """Midpoints ``2*pi*(j + 1/2)/size`` of a uniform partition of ``[0, 2*pi)``."""
    return 2.0 * math.pi * (np.arange(size) + 0.5) / size


def trig_eval_grid(a0, a, b, size, shift=0.5):
    """Evaluate ``a0/2 + sum a_k cos kt + b_k sin kt`` at ``t_j = 2*pi*(j+shift)/size``.

    Coefficients above the grid's Nyquist range are folded onto their aliases,
    so the values are exact (up to rounding) for any order.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    order = a.size
    k = np.arange(1, order + 1)
    c = np.zeros(size, dtype=complex)
    c[0] += 0.5 * a0
    # a cos kt + b sin kt = Re[(a - i b) e^{ikt}]
    coef = (a - 1j * b) * np.exp(2j * math.pi * k * shift / size)
    np.add.at(c, k % size, coef)
    return np.real(np.fft.ifft(c) * size)
