"""L_p norms and best approximation by trigonometric polynomials of order ``n - 1``.

Solvers
-------
* ``p = 2``: truncation of the Fourier series (exact).
* ``p = inf``: Remez exchange on ``2n`` reference points.
* ``1 < p < inf``: damped Newton on the discretised ``||f - t||_p^p``.
* ``p = 1``: continuation through ``p = 1.25, 1.1, 1.01`` followed by an
  iteratively reweighted least-squares polish at ``p = 1``; optimality is
  certified by a bounded least-squares fit of the subgradient condition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq, lsq_linear, minimize_scalar

from ._quad import adaptive_quad, midpoint_grid, trig_eval_grid
from .exceptions import ConvergenceError, DomainError
from .kernels import TailSeries
from .specfun import CertifiedValue, LpExponent, Provenance, as_exponent
from .trig import PeriodicFn, TrigPoly, fourier_partial_sum

_EPS = np.finfo(float).eps
REMEZ_MAX_ITER = 200
DESCENT_MAX_ITER = 5000
P1_CONTINUATION = (1.25, 1.1, 1.01)
CONTINUATION_STAGE_ITER = 100


class Certificate(str, enum.Enum):
    PARSEVAL_EXACT = "parseval_exact"
    EQUIOSCILLATION = "equioscillation"
    KKT_RESIDUAL = "kkt_residual"


@dataclass(frozen=True)
class BestApproxResult:
    """Outcome of :func:`best_approx`.

    ``value`` is ``||f - minimizer||_p``, an upper bound for ``E_n(f)_p``.
    ``residual`` measures how far the certificate is from exact optimality:
    the Parseval rounding level for ``p = 2``, the gap ``max|e| - |h|`` between
    the achieved error and the reference level for Remez (so ``E_n`` lies in
    ``[value - residual, value]``), and a normalised KKT violation otherwise.
    """

    value: float
    minimizer: TrigPoly
    certificate: Certificate
    residual: float
    iterations: int = 0
    alternations: Optional[int] = None


class ShiftResult(NamedTuple):
    lam: float
    value: float


# ---------------------------------------------------------------------------
# sampling helpers


def _effective_bandwidth(f: PeriodicFn, default: int = 256) -> int:
    backing = f.backing
    if isinstance(backing, TrigPoly):
        return max(1, backing.order)
    if isinstance(backing, TailSeries):
        w = backing.weights
        keep = np.nonzero(w >= 1e-6 * w.max())[0]
        return int(backing.k[keep[-1]])
    return default


def grid_size_for(f: PeriodicFn, n: int = 1, factor: int = 16, minimum: int = 1024,
                  maximum: int = 1 << 20) -> int:
    bw = max(_effective_bandwidth(f), n)
    return int(min(maximum, max(minimum, 1 << math.ceil(math.log2(factor * bw)))))


def sample(f: PeriodicFn, size: int) -> np.ndarray:
    """``f`` on the midpoint grid of ``size`` points, via FFT when coefficients are known."""
    coeffs = f.coefficients()
    if coeffs is not None:
        return trig_eval_grid(coeffs.a0, coeffs.a, coeffs.b, size)
    return np.asarray(f(midpoint_grid(size)), dtype=float)


def _grid_lp(values, p: float):
    if math.isinf(p):
        return float(np.max(np.abs(values)))
    return float((2.0 * math.pi / values.size * np.sum(np.abs(values) ** p)) ** (1.0 / p))


def _local_extrema(values):
    """Indices of cyclic local maxima of ``|values|``, reduced to one per sign run."""
    a = np.abs(values)
    left = np.roll(a, 1)
    right = np.roll(a, -1)
    idx = np.nonzero((a >= left) & (a >= right) & (a > 0))[0]
    if idx.size == 0:
        return idx
    signs = np.sign(values[idx])
    # rotate so the list starts at a sign change
    change = np.nonzero(signs != np.roll(signs, 1))[0]
    if change.size == 0:
        return idx[[int(np.argmax(a[idx]))]]
    idx = np.roll(idx, -change[0])
    signs = np.roll(signs, -change[0])
    keep = []
    start = 0
    for j in range(1, idx.size + 1):
        if j == idx.size or signs[j] != signs[start]:
            run = idx[start:j]
            keep.append(run[int(np.argmax(a[run]))])
            start = j
    return np.array(sorted(keep))


def _refine_extremum(func, t0, h, sign):
    res = minimize_scalar(lambda t: -sign * func(t), bounds=(t0 - h, t0 + h),
                          method="bounded", options={"xatol": 1e-12})
    t = float(res.x)
    if -res.fun >= sign * func(t0):
        return t % (2 * math.pi), float(-res.fun) * sign
    return t0 % (2 * math.pi), func(t0)


def sup_norm(f: PeriodicFn, size: Optional[int] = None, top: int = 32):
    """``(max f, argmax, min f, argmin)`` by dense sampling plus local refinement."""
    size = size or grid_size_for(f)
    t = midpoint_grid(size)
    v = sample(f, size)
    h = 2.0 * math.pi / size
    scalar = lambda s: float(f(np.array([s]))[0])
    out = []
    for sign in (1.0, -1.0):
        order = np.argsort(-sign * v)[:top]
        best_t, best_v = float(t[order[0]]), float(v[order[0]])
        for j in order:
            tj, vj = _refine_extremum(scalar, float(t[j]), h, sign)
            if sign * vj > sign * best_v:
                best_t, best_v = tj, vj
        out.append((best_v, best_t))
    return out[0][0], out[0][1], out[1][0], out[1][1]


# ---------------------------------------------------------------------------
# norms


def lp_norm(f: PeriodicFn, p, tol: float = 1e-10) -> CertifiedValue:
    """``(int_0^{2 pi} |f|^p)^{1/p}``, or the sup norm for ``p = inf``.

    Finite ``p`` integrates ``|f|^p`` adaptively between consecutive sign
    changes of ``f`` (where ``|f|^p`` has kinks).  ``p = 2`` with known
    coefficients uses Parseval's identity.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    p = as_exponent(p)
    coeffs = f.coefficients()
    if coeffs is not None and coeffs.energy() == 0.0:
        return CertifiedValue(0.0, 0.0, Provenance.EXACT)
    if p.p == 2.0 and coeffs is not None:
        value = math.sqrt(math.pi * coeffs.energy())
        return CertifiedValue(value, 8 * _EPS * value * max(1, coeffs.order),
                              Provenance.SERIES_TRUNCATION)
    size = grid_size_for(f)
    if p.is_inf:
        hi, _, lo, _ = sup_norm(f, size)
        value = max(abs(hi), abs(lo))
        return CertifiedValue(value, min(tol, 1e-12 * max(1.0, value)), Provenance.QUADRATURE)
    t = midpoint_grid(size)
    v = sample(f, size)
    if not np.any(v):
        return CertifiedValue(0.0, 0.0, Provenance.QUADRATURE)
    sp = p.p
    estimate = _grid_lp(v, sp)
    breaks = [0.0]
    scalar = lambda s: float(f(np.array([s]))[0])
    for j in range(size - 1):
        if v[j] == 0.0:
            breaks.append(float(t[j]))
        elif v[j] * v[j + 1] < 0.0:
            fa, fb = scalar(t[j]), scalar(t[j + 1])
            if fa * fb < 0.0:
                breaks.append(brentq(scalar, t[j], t[j + 1], xtol=1e-15, rtol=4 * _EPS))
            else:
                breaks.append(float(t[j] if fa == 0.0 or fb != 0.0 else t[j + 1]))
    breaks.append(2.0 * math.pi)
    # asking for less than rounding allows only exhausts the panel budget
    tol = max(tol, 64 * _EPS * estimate)
    j_tol = 0.5 * tol * sp * estimate ** (sp - 1.0)
    total = 0.0
    err = 0.0
    integrand = lambda s: np.abs(f(s)) ** sp
    span = 2.0 * math.pi
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi <= lo:
            continue
        val, e = adaptive_quad(integrand, lo, hi, tol=max(j_tol * (hi - lo) / span, 1e-300))
        total += val
        err += e
    if total <= 0.0:
        return CertifiedValue(0.0, 0.0, Provenance.QUADRATURE)
    value = total ** (1.0 / sp)
    err = value / (sp * total) * err + 4 * _EPS * value * len(breaks)
    return CertifiedValue(value, err, Provenance.QUADRATURE)


# ---------------------------------------------------------------------------
# best approximation


def _basis(t, n):
    k = np.arange(1, n, dtype=float)
    arg = np.outer(t, k)
    return np.hstack([np.ones((t.size, 1)), np.cos(arg), np.sin(arg)])


def _poly(c, n):
    return TrigPoly(2.0 * c[0], c[1:n], c[n:])


def _l2_start(f, n, size, values, basis):
    coeffs = f.coefficients()
    if coeffs is not None:
        return coeffs.padded(n - 1).truncated(n - 1).as_vector()
    c, *_ = np.linalg.lstsq(basis, values, rcond=None)
    return c


def best_approx(f: PeriodicFn, n: int, p, tol: float = 1e-9, max_iter: Optional[int] = None,
                grid_size: Optional[int] = None) -> BestApproxResult:
    """Best approximation of ``f`` by trigonometric polynomials of order ``n - 1`` in ``L_p``.

    Raises :class:`ConvergenceError` when a solver hits its iteration cap
    without meeting ``tol``.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    n = int(n)
    if not tol > 0:
        raise DomainError("tol must be positive")
    p = as_exponent(p)
    if p.p == 2.0:
        return _best_l2(f, n, tol)
    size = grid_size or grid_size_for(f, n, factor=32)
    t = midpoint_grid(size)
    values = sample(f, size)
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        return BestApproxResult(0.0, TrigPoly.zero(n - 1), _certificate_for(p), 0.0)
    basis = _basis(t, n)
    c0 = _l2_start(f, n, size, values, basis)
    if np.max(np.abs(values - basis @ c0)) <= 64 * _EPS * scale * max(1, n):
        poly = _poly(c0, n)
        return BestApproxResult(lp_norm(f.minus(poly), p).value, poly, _certificate_for(p), 0.0)
    if p.is_inf:
        return _remez(f, n, tol, max_iter or REMEZ_MAX_ITER, size, c0)
    cap = max_iter or DESCENT_MAX_ITER
    F = values / scale
    c = c0 / scale
    its = 0
    if p.p == 1.0:
        for q in P1_CONTINUATION:
            c, k, _ = _newton_lp(F, basis, c, q, tol=1e-10, max_iter=min(cap, CONTINUATION_STAGE_ITER),
                                 strict=False)
            its += k
        c, k, resid = _irls_l1(F, basis, c, tol, cap)
        its += k
        c, k, resid = _sign_newton_l1(f, n, c * scale, size, resid, tol)
        c = c / scale
        its += k
    else:
        c, its, resid = _newton_lp(F, basis, c, p.p, tol, cap, strict=True)
    poly = _poly(c * scale, n)
    value = lp_norm(f.minus(poly), p, tol=max(1e-13, 1e-6 * tol) * scale).value
    return BestApproxResult(value, poly, Certificate.KKT_RESIDUAL, resid, its)


def _certificate_for(p: LpExponent) -> Certificate:
    if p.p == 2.0:
        return Certificate.PARSEVAL_EXACT
    if p.is_inf:
        return Certificate.EQUIOSCILLATION
    return Certificate.KKT_RESIDUAL


def _best_l2(f, n, tol):
    coeffs = f.coefficients()
    if coeffs is not None:
        minimizer = coeffs.padded(n - 1).truncated(n - 1)
        high = coeffs.order >= n
        energy = float(np.dot(coeffs.a[n - 1:], coeffs.a[n - 1:]) + np.dot(coeffs.b[n - 1:], coeffs.b[n - 1:])) if high else 0.0
        value = math.sqrt(math.pi * energy)
        return BestApproxResult(value, minimizer, Certificate.PARSEVAL_EXACT, 8 * _EPS * value)
    minimizer = fourier_partial_sum(f, n, quad_tol=max(tol, 1e-13))
    resid_fn = f.minus(minimizer)
    size = grid_size_for(f, n)
    resid = sample(resid_fn, size)
    if np.max(np.abs(resid)) <= 64 * _EPS * max(1.0, float(np.max(np.abs(sample(f, size))))):
        return BestApproxResult(_grid_lp(resid, 2.0), minimizer, Certificate.PARSEVAL_EXACT, 0.0)
    value = lp_norm(resid_fn, 2, tol=tol).value
    check = fourier_partial_sum(resid_fn, n, quad_tol=max(tol, 1e-13))
    return BestApproxResult(value, minimizer, Certificate.PARSEVAL_EXACT, check.max_abs_coeff())


def _kkt_lp(e, basis, p, w):
    """Normalised violation of ``int |e|^{p-1} sgn(e) phi_j = 0``."""
    g = basis.T @ (w * np.abs(e) ** (p - 1.0) * np.sign(e))
    norm = (np.sum(w * np.abs(e) ** p)) ** (1.0 / p)
    denom = norm ** (p - 1.0) * (2.0 * math.pi) ** (1.0 / p)
    return float(np.max(np.abs(g)) / denom) if denom > 0 else 0.0


def _newton_lp(F, basis, c, p, tol, max_iter, strict):
    w = 2.0 * math.pi / F.size
    ridge = 1e-14

    def objective(cv):
        return float(np.sum(w * np.abs(F - basis @ cv) ** p))

    e = F - basis @ c
    obj = objective(c)
    it = 0
    for it in range(1, max_iter + 1):
        resid = _kkt_lp(e, basis, p, w)
        if resid <= tol:
            return c, it - 1, resid
        ae = np.abs(e)
        floor = 1e-12 * max(float(ae.max()), 1e-300)
        grad = -p * basis.T @ (w * ae ** (p - 1.0) * np.sign(e))
        hw = p * (p - 1.0) * w * np.maximum(ae, floor) ** (p - 2.0)
        H = basis.T @ (hw[:, None] * basis)
        H[np.diag_indices_from(H)] += ridge * np.trace(H) / H.shape[0]
        step = np.linalg.solve(H, -grad)
        slope = float(grad @ step)
        lam = 1.0
        while True:
            trial = c + lam * step
            new = objective(trial)
            if new <= obj + 1e-4 * lam * slope or lam < 1e-12:
                break
            lam *= 0.5
        if new > obj:
            break
        c = trial
        e = F - basis @ c
        if obj - new <= 1e-16 * obj and lam < 1e-12:
            break
        obj = new
    resid = _kkt_lp(e, basis, p, w)
    if strict and resid > tol:
        raise ConvergenceError("L_p descent stopped before meeting the KKT tolerance",
                               {"p": p, "kkt_residual": resid, "tol": tol, "iterations": it})
    return c, it, resid


def _kkt_l1(e, basis, w, zero_tol):
    """Least violation of the L_1 subgradient condition over the near-zero set."""
    zero = np.abs(e) <= zero_tol
    g = basis[~zero].T @ (w * np.sign(e[~zero]))
    if not np.any(zero):
        return float(np.max(np.abs(g)) / (2.0 * math.pi))
    A = (w * basis[zero]).T
    sol = lsq_linear(A, -g, bounds=(-1.0, 1.0), method="bvls")
    return float(np.max(np.abs(A @ sol.x + g)) / (2.0 * math.pi))


def _irls_l1(F, basis, c, tol, max_iter):
    w = 2.0 * math.pi / F.size
    e = F - basis @ c
    delta = max(1e-3 * float(np.mean(np.abs(e))), 1e-15)
    best_c, best_obj = c, float(np.sum(np.abs(e)))
    it = 0
    for it in range(1, max_iter + 1):
        weights = 1.0 / np.maximum(np.abs(e), delta)
        A = basis * np.sqrt(weights)[:, None]
        c, *_ = np.linalg.lstsq(A, F * np.sqrt(weights), rcond=None)
        e = F - basis @ c
        obj = float(np.sum(np.abs(e)))
        if obj < best_obj:
            best_c, best_obj = c, obj
        delta = max(0.5 * delta, 1e-15)
        if delta <= 1e-14:
            break
    e = F - basis @ best_c
    zero_tol = max(1e-9 * float(np.max(np.abs(e))), 1e-15)
    resid = _kkt_l1(e, basis, w, zero_tol)
    return best_c, it, resid


def _sign_changes(func, t, v):
    """Roots of ``func`` bracketed by sign changes of the samples ``v`` on the cyclic grid ``t``."""
    roots = []
    size = t.size
    for j in range(size):
        a, b = t[j], t[(j + 1) % size] + (2.0 * math.pi if j == size - 1 else 0.0)
        va, vb = v[j], v[(j + 1) % size]
        if va * vb < 0.0:
            fa, fb = func(a), func(b)
            if fa * fb < 0.0:
                roots.append(brentq(func, a, b, xtol=1e-15, rtol=4 * _EPS) % (2.0 * math.pi))
            else:
                roots.append(float(a if abs(fa) <= abs(fb) else b) % (2.0 * math.pi))
    return np.array(sorted(roots))


def _arc_moments(z, n):
    """``int`` of the basis functions over the arcs ``[z_i, z_{i+1}]`` (cyclic)."""
    z_next = np.roll(z, -1)
    z_next[-1] += 2.0 * math.pi
    k = np.arange(1, n, dtype=float)
    ca = (np.sin(np.outer(z_next, k)) - np.sin(np.outer(z, k))) / k
    sa = -(np.cos(np.outer(z_next, k)) - np.cos(np.outer(z, k))) / k
    return np.hstack([(z_next - z)[:, None], ca, sa])


def _sign_newton_l1(f, n, c, size, resid, tol, max_iter=50):
    """Polish an L_1 solution on the continuum.

    With ``e = f - t`` changing sign at ``z_1 < ... < z_m``, optimality is
    ``sum_i s_i int_{z_i}^{z_{i+1}} phi_j = 0`` for every basis function.
    These moments are exact given the zeros, and Newton's method on them uses
    ``d g_j / d c_l = -2 sum_i phi_j(z_i) phi_l(z_i) / |e'(z_i)|``.
    Returns the best coefficients seen and their (continuous) KKT residual.
    """
    t = midpoint_grid(size)
    fv = sample(f, size)
    basis = _basis(t, n)

    def state(cv):
        err = lambda s: float(f(np.array([s]))[0] - _basis(np.array([s]), n)[0] @ cv)
        v = fv - basis @ cv
        z = _sign_changes(err, t, v)
        if z.size < 2:
            return None
        mid = 0.5 * (z + np.roll(z, -1) + np.where(np.arange(z.size) == z.size - 1, 2 * math.pi, 0.0))
        signs = np.sign([err(s % (2 * math.pi)) for s in mid])
        g = signs @ _arc_moments(z, n)
        return err, z, signs, g

    st = state(c)
    if st is None:
        return c, 0, resid
    best_c = c
    best = float(np.max(np.abs(st[3]))) / (2.0 * math.pi)
    it = 0
    for it in range(1, max_iter + 1):
        if best <= tol:
            break
        err, z, signs, g = st
        h = 1e-6
        slope = np.array([abs(err(s + h) - err(s - h)) / (2 * h) for s in z])
        B = _basis(z, n)
        J = -2.0 * B.T @ (B / np.maximum(slope, 1e-12)[:, None])
        step, *_ = np.linalg.lstsq(J, -g, rcond=None)
        lam = 1.0
        improved = False
        while lam >= 1.0 / 64:
            trial = best_c + lam * step
            st_new = state(trial)
            if st_new is not None:
                r_new = float(np.max(np.abs(st_new[3]))) / (2.0 * math.pi)
                if r_new < best:
                    best_c, best, st = trial, r_new, st_new
                    improved = True
                    break
            lam *= 0.5
        if not improved:
            break
    return best_c, it, best


def _remez(f, n, tol, max_iter, size, c0):
    t_grid = midpoint_grid(size)
    F = sample(f, size)
    basis = _basis(t_grid, n)
    h_grid = 2.0 * math.pi / size
    m = 2 * n
    scale = float(np.max(np.abs(F)))

    def err_at(c, s):
        s = np.atleast_1d(s)
        return f(s) - _basis(s, n) @ c

    def extrema(c):
        e = F - basis @ c
        idx = _local_extrema(e)
        scalar = lambda s: float(err_at(c, s)[0])
        pts = []
        for j in idx:
            sign = 1.0 if e[j] > 0 else -1.0
            pts.append(_refine_extremum(scalar, float(t_grid[j]), h_grid, sign))
        pts.sort()
        return pts

    def reduce(pts):
        pts = list(pts)
        while len(pts) > m:
            i = int(np.argmin([abs(v) for _, v in pts]))
            pts.pop(i)
            size_ = len(pts)
            a, b = (i - 1) % size_, i % size_
            drop = a if abs(pts[a][1]) < abs(pts[b][1]) else b
            pts.pop(drop)
        return pts

    pts = extrema(c0)
    if len(pts) >= m:
        ref = np.array([s for s, _ in reduce(pts)])
    else:
        ref = (np.arange(m) + 0.5) * (2.0 * math.pi / m)
    c = c0
    level = 0.0
    for it in range(1, max_iter + 1):
        A = np.hstack([_basis(ref, n), ((-1.0) ** np.arange(m))[:, None]])
        sol = np.linalg.solve(A, f(ref))
        c, level = sol[:-1], abs(sol[-1])
        pts = extrema(c)
        emax = max(abs(v) for _, v in pts) if pts else 0.0
        emax = max(emax, float(np.max(np.abs(F - basis @ c))))
        defect = emax - level
        if defect <= tol * max(1.0, scale) and len(pts) >= m:
            poly = _poly(c, n)
            return BestApproxResult(emax, poly, Certificate.EQUIOSCILLATION, max(defect, 0.0),
                                    it, alternations=len(pts))
        if len(pts) < m:
            raise ConvergenceError("Remez lost alternation", {"iteration": it, "points": len(pts)})
        ref = np.array([s for s, _ in reduce(pts)])
    raise ConvergenceError("Remez exchange hit its iteration cap",
                           {"iterations": max_iter, "defect": defect, "tol": tol})


# ---------------------------------------------------------------------------
# best constant


def inf_shift(g: PeriodicFn, q, tol: float = 1e-10) -> ShiftResult:
    """Minimising constant ``lam`` and ``min_lam ||g - lam||_q``."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    q = as_exponent(q)
    coeffs = g.coefficients()
    if q.p == 2.0:
        if coeffs is not None:
            lam = 0.5 * coeffs.a0
            return ShiftResult(lam, math.sqrt(math.pi * max(coeffs.energy() - 0.5 * coeffs.a0 ** 2, 0.0)))
        lam = 0.5 * fourier_partial_sum(g, 1, quad_tol=tol).a0
        return ShiftResult(lam, lp_norm(g.shifted(lam), 2, tol).value)
    size = grid_size_for(g, factor=64)
    hi, _, lo, _ = sup_norm(g, size)
    if q.is_inf:
        return ShiftResult(0.5 * (hi + lo), 0.5 * (hi - lo))
    if hi == lo:
        return ShiftResult(hi, 0.0)
    v = sample(g, size)
    width = hi - lo
    if q.p == 1.0:
        # subgradient meas{g < lam} - meas{g > lam} is nondecreasing in lam
        a, b = lo, hi
        while b - a > tol * width:
            mid = 0.5 * (a + b)
            if _measure_below(v, mid) < 0.5:
                a = mid
            else:
                b = mid
        lam = 0.5 * (a + b)
    else:
        qq = q.p
        res = minimize_scalar(lambda s: float(np.sum(np.abs(v - s) ** qq)), bounds=(lo, hi),
                              method="bounded", options={"xatol": tol * width})
        lam = float(res.x)
    value = lp_norm(g.shifted(lam), q, tol=tol * max(width, 1e-300)).value
    return ShiftResult(lam, value)


def _measure_below(v, lam):
    """Fraction of the period where the piecewise-linear interpolant of ``v`` lies below ``lam``."""
    a = v
    b = np.roll(v, -1)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    span = hi - lo
    frac = np.where(span > 0, (lam - lo) / np.where(span > 0, span, 1.0), (lo < lam).astype(float))
    return float(np.mean(np.clip(frac, 0.0, 1.0)))
