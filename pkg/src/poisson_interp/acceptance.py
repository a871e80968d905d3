"""Acceptance checks shared by the test suite and ``poisson-interp verify``.

Each check returns a :class:`CriterionResult`; none of them raise on a failed
comparison, so a full run always reports every criterion.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from .approx import best_approx
from .extremes import (dual_value, exact_p2, exact_p2_r1, lebesgue_type_bound,
                       limit_ratio_check, monte_carlo_lower)
from .kernels import (KernelParams, least_lemma1_n, lemma1_check, pow_diff, threshold,
                      truncation_index)
from .specfun import I_s, cos_norm, elliptic_K, hyp2f1
from .trig import (NodeGrid, PeriodicFn, TrigPoly, dirichlet, lagrange_interp, lebesgue_fn,
                   lebesgue_main_term, poisson_integral, rho_tilde)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.title}: {self.detail} ({self.seconds:.2f}s)"


P2_PARAMS = ((1.0, 0.5), (2.0, 0.3), (1.0, 1.0), (0.5, 2.0))
P2_NS = (2, 4, 8, 16, 32)
P2_XS = (0.3, 1.1, 2.05, 3.7, 5.5)
P2_BETA = 0.3


def parseval_oracle(params: KernelParams, n: int, x: float) -> float:
    """Scaled ``p = 2`` supremum from the coefficients of the deviation kernel.

    ``Psi_x(t) = P(x - t) - sum_j l_j(x) P(x_j - t)`` has coefficient vector
    ``psi_k v_k`` with ``v_k = u_k(x) - sum_j l_j(x) u_k(x_j)`` and
    ``u_k(y) = (cos(ky - th), sin(ky - th))``; the supremum over the zero-mean
    unit ball of ``L_2`` is ``||Psi_x - mean||_2 / pi``.  Orders below ``n`` are
    checked to vanish rather than summed.  Result is multiplied by ``exp(alpha n^r)``.
    """
    N = 2 * n - 1
    nodes = 2.0 * math.pi * np.arange(N) / N
    ell = np.array([2.0 / N * dirichlet(n, x - xj) for xj in nodes])
    th = 0.5 * math.pi * params.beta
    low = np.arange(1, n, dtype=float)
    if low.size:
        lc = np.cos(low * x - th) - np.cos(np.outer(low, nodes) - th) @ ell
        ls = np.sin(low * x - th) - np.sin(np.outer(low, nodes) - th) @ ell
        if max(np.max(np.abs(lc)), np.max(np.abs(ls))) > 1e-10:
            raise AssertionError("interpolation failed to reproduce low orders")
    K, _ = truncation_index(2.0 * params.alpha, params.r, n, 1e-34, ref=n)
    total = 0.0
    for lo in range(n, K + 1, 4096):
        k = np.arange(lo, min(K, lo + 4095) + 1, dtype=float)
        psi2 = np.exp(-2.0 * params.alpha * pow_diff(k, n, params.r))
        vc = np.cos(k * x - th) - np.cos(np.outer(k, nodes) - th) @ ell
        vs = np.sin(k * x - th) - np.sin(np.outer(k, nodes) - th) @ ell
        total += float(np.sum(psi2 * (vc * vc + vs * vs)))
    return math.sqrt(total / math.pi)


def criterion_1(**_) -> CriterionResult:
    worst = 0.0
    for alpha, r in P2_PARAMS:
        params = KernelParams(alpha, r, P2_BETA)
        for n in P2_NS:
            for x in P2_XS:
                value = exact_p2(params, n, x, scaled=True).value
                ref = parseval_oracle(params, n, x)
                worst = max(worst, abs(value - ref) / ref)
    return CriterionResult(1, "exact p=2 series vs deviation-kernel oracle", worst <= 1e-8,
                           f"max rel err {worst:.2e} (limit 1e-8)")


def criterion_2(**_) -> CriterionResult:
    worst = 0.0
    for alpha, r in P2_PARAMS:
        if r != 1.0:
            continue
        params = KernelParams(alpha, 1.0, P2_BETA)
        for n in P2_NS:
            for x in P2_XS:
                a = exact_p2(params, n, x, scaled=True).value
                b = exact_p2_r1(alpha, n, x, scaled=True)
                worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    return CriterionResult(2, "r=1 closed form vs series", worst <= 1e-12,
                           f"max err {worst:.2e} (limit 1e-12)")


def criterion_3(**_) -> CriterionResult:
    cases = [(KernelParams(3.0, 0.5), n) for n in (921, 1500, 3000)]
    params = KernelParams(1.0, 0.9)
    n_min = least_lemma1_n(params)
    cases += [(params, n_min), (params, 2 * n_min)]
    margins = []
    ok = least_lemma1_n(KernelParams(3.0, 0.5)) == 921
    for prm, n in cases:
        res = lemma1_check(prm, n)
        ok = ok and res.applicable and res.holds
        margins.append(res.log_rhs - res.log_lhs_upper)
    return CriterionResult(3, "double-sum bound", ok,
                           f"least admissible n for (1,0.9) = {n_min}; min log-margin {min(margins):.3f}")


def criterion_4(**_) -> CriterionResult:
    x = 2.0 * math.pi * np.arange(2000) / 2000
    worst = 0.0
    for n in (8, 16, 32, 64, 128):
        worst = max(worst, float(np.max(np.abs(lebesgue_fn(n, x) - lebesgue_main_term(n, x)))))
    return CriterionResult(4, "Lebesgue function asymptotics", worst <= 3.0,
                           f"max deviation {worst:.4f} (limit 3.0)")


def criterion_5(seed: int = 42, **_) -> CriterionResult:
    rng = np.random.default_rng(seed)
    params_list = (KernelParams(1.0, 0.5, 0.0), KernelParams(2.0, 0.3, 0.7), KernelParams(0.8, 0.6, 1.5))
    ps = (1.0, 1.5, 2.0, 4.0, math.inf)
    xs = 2.0 * math.pi * (np.arange(1000) + 0.5) / 1000
    worst = 0.0
    ok = True
    cases = 0
    for i in range(20):
        params = params_list[i % len(params_list)]
        n = (8, 16, 32)[i % 3]
        p = ps[i % len(ps)]
        order = 3 * n
        phi = TrigPoly(0.0, rng.standard_normal(order) / np.arange(1, order + 1),
                       rng.standard_normal(order) / np.arange(1, order + 1))
        f = PeriodicFn.from_trigpoly(poisson_integral(params, phi))
        En = best_approx(PeriodicFn.from_trigpoly(phi), n, p, tol=1e-8).value
        dev = np.abs(rho_tilde(f, n, xs))
        n_star = threshold(params, p, "n_star")
        bound = np.array([lebesgue_type_bound(params, p, n, x, En, n_star=n_star).value for x in xs])
        ratio = float(np.max(dev / np.maximum(bound, 1e-300)))
        worst = max(worst, ratio)
        ok = ok and bool(np.all(dev <= bound))
        cases += 1
    return CriterionResult(5, "Lebesgue-type inequality on random Poisson integrals", ok,
                           f"{cases} functions, max |rho|/bound {worst:.3e}")


def criterion_6(**_) -> CriterionResult:
    params = KernelParams(1.0, 0.5, 0.0)
    const = 2.0 * math.sqrt(math.pi) / math.pi ** 1.5 * math.sqrt(math.pi / 2.0)
    devs = []
    for n in (32, 64, 128, 256):
        x = math.pi / (2 * n - 1)
        value = exact_p2(params, n, x, scaled=True).value
        ratio = value / (n ** 0.25 * abs(math.sin(0.5 * (2 * n - 1) * x)) * const)
        devs.append(abs(ratio - 1.0))
    decreasing = all(b < a for a, b in zip(devs, devs[1:]))
    ok = devs[-1] <= 0.15 and decreasing
    return CriterionResult(6, "p=2 main constant as stated for the ratio test", ok,
                           f"|ratio-1| = {', '.join(f'{d:.4f}' for d in devs)} (limit 0.15 at n=256)")


def criterion_7(**_) -> CriterionResult:
    parts = []
    ok = True
    for alpha, r in ((1.0, 0.5), (2.0, 1.0)):
        params = KernelParams(alpha, r, 0.0)
        x = math.pi / (2 * 128 - 1)
        ratios = limit_ratio_check(params, [16, 32, 64, 128], x)
        err = abs(ratios[-1] - 2.0)
        ok = ok and err < 0.05
        parts.append(f"({alpha:g},{r:g}) ratio at n=128 {ratios[-1]:.6f}")
    return CriterionResult(7, "limit relation at p=2", ok, "; ".join(parts))


def criterion_8(seed: int = 42, tol: float = 1e-10, **_) -> CriterionResult:
    params = KernelParams(1.0, 0.5, 0.0)
    x = 1.3
    ok = True
    worst_gap = math.inf
    worst_frac = math.inf
    for p in (1.0, 1.5, 2.0, 4.0, math.inf):
        for n in (4, 8, 16):
            band = dual_value(params, n, x, p, tol=tol, scaled=True)
            mc = monte_carlo_lower(params, n, x, p, trials=500, seed=seed, scaled=True)
            ok = ok and mc <= band.upper
            worst_gap = min(worst_gap, band.upper - mc)
            if p == 2.0:
                frac = mc / exact_p2(params, n, x, scaled=True).value
                worst_frac = min(worst_frac, frac)
                ok = ok and frac >= 0.8
    return CriterionResult(8, "duality sandwich", ok,
                           f"min(upper - mc) {worst_gap:.3e}; min mc/exact at p=2 {worst_frac:.4f}")


def criterion_9(**_) -> CriterionResult:
    errs = []
    for q in np.linspace(0.0, 0.9, 10):
        lhs = 2.0 / math.pi * elliptic_K(q).value
        rhs = hyp2f1(0.5, 0.5, 1.0, q * q).value
        errs.append(abs(lhs - rhs))
    errs.append(abs(hyp2f1(0.5, 0.5, 1.5, 1.0).value - math.pi / 2))
    for v in (0.1, 1.0, 3.0, 10.0):
        errs.append(abs(I_s(1, v).value - math.log(v + math.sqrt(1 + v * v))))
    e_cos = abs(cos_norm(1).value - 4.0)
    ok = max(errs) <= 1e-10 and e_cos <= 1e-12
    return CriterionResult(9, "special-function identities", ok,
                           f"max err {max(errs):.2e}; |cos|_1 err {e_cos:.1e}")


def criterion_10(seed: int = 42, **_) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst_inf = worst_2 = worst_0 = 0.0
    for n in (1, 2, 3, 5, 8):
        f = PeriodicFn.from_callable(lambda t, n=n: np.cos(n * t))
        worst_inf = max(worst_inf, abs(best_approx(f, n, math.inf, tol=1e-9).value - 1.0))
        worst_2 = max(worst_2, abs(best_approx(f, n, 2, tol=1e-12).value - math.sqrt(math.pi)))
        if n > 1:
            poly = TrigPoly(rng.standard_normal(), rng.standard_normal(n - 1), rng.standard_normal(n - 1))
            g = PeriodicFn.from_callable(poly)
            for p in (1.0, 1.5, 2.0, 4.0, math.inf):
                worst_0 = max(worst_0, best_approx(g, n, p, tol=1e-9).value)
    ok = worst_inf <= 1e-6 and worst_2 <= 1e-10 and worst_0 <= 1e-9
    return CriterionResult(10, "best approximation units", ok,
                           f"sup err {worst_inf:.1e}; L2 err {worst_2:.1e}; E_n(t) max {worst_0:.1e}")


def criterion_11(seed: int = 42, **_) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst_c = worst_r = 0.0
    for n in (1, 2, 3, 5, 8, 13, 21, 34, 55, 64):
        poly = TrigPoly(rng.standard_normal(), rng.standard_normal(n - 1), rng.standard_normal(n - 1))
        out = lagrange_interp(PeriodicFn.from_callable(poly), n)
        worst_c = max(worst_c, float(np.max(np.abs(out.as_vector() - poly.as_vector()))))
        nodes = NodeGrid(n).nodes
        worst_r = max(worst_r, float(np.max(np.abs(out(nodes) - poly(nodes)))))
    ok = worst_c <= 1e-11 and worst_r <= 1e-11
    return CriterionResult(11, "interpolation exactness", ok,
                           f"coefficient err {worst_c:.1e}; node residual {worst_r:.1e}")


CRITERIA: Dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11,
}


def run_criterion(number: int, **kwargs) -> CriterionResult:
    start = time.perf_counter()
    try:
        result = CRITERIA[number](**kwargs)
    except Exception as exc:  # report, never hide
        result = CriterionResult(number, "error", False, f"{type(exc).__name__}: {exc}")
    result.seconds = time.perf_counter() - start
    return result


def run_all(seed: int = 42, tol: float = 1e-10) -> List[CriterionResult]:
    return [run_criterion(k, seed=seed, tol=tol) for k in sorted(CRITERIA)]
