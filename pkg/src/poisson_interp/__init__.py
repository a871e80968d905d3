"""Lagrange interpolation on classes of generalized Poisson integrals.

Submodules
----------
specfun   special functions and certified values
kernels   kernels, certified tails, the remainder r_n and thresholds
trig      trigonometric polynomials, interpolation, Lebesgue function
approx    L_p norms and best approximation
extremes  class suprema, main terms and estimate bands
cli       command-line front end
"""

__version__ = "0.1.0"

from .exceptions import ConvergenceError, DomainError, ThresholdOverflowError
from .specfun import CertifiedValue, LpExponent, Provenance
from .kernels import KernelParams, TailSeries, kernel_eval
from .trig import NodeGrid, PeriodicFn, TrigPoly, lagrange_interp
from .approx import BestApproxResult, best_approx, lp_norm
from .extremes import EstimateBand, dual_value, exact_p2, kn_main_term

__all__ = [
    "BestApproxResult", "CertifiedValue", "ConvergenceError", "DomainError", "EstimateBand",
    "KernelParams", "LpExponent", "NodeGrid", "PeriodicFn", "Provenance", "TailSeries",
    "ThresholdOverflowError", "TrigPoly", "best_approx", "dual_value", "exact_p2",
    "kernel_eval", "kn_main_term", "lagrange_interp", "lp_norm",
]
