"""Optimization of the reciprocal-approximation constants.

The two-multiply reciprocal estimate ``y = 4*(k2 - x*(k1 - x))*(k1 - x)``
has a relative error ``rerr(x) = x*y(x) - 1`` (the exact reciprocal cancels
into a plain polynomial). The quality functional is the integral of the
squared relative error over the divisor interval [1/2, 1]:

    e2(k1, k2) = integral_{1/2}^{1} rerr(x, k1, k2)^2 dx

``rerr`` is a degree-4 polynomial in x, so the integral has a closed form:
it is evaluated here exactly via the antiderivative (tighter than any
adaptive-quadrature tolerance and fully deterministic). For fixed k1 the
functional is quadratic in k2, giving a closed-form inner solution; the
outer one-dimensional minimization uses Brent search.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "relative_error_poly",
    "error_functional",
    "optimal_k2",
    "optimize_constants",
    "improvement_pct",
]

_LO, _HI = 0.5, 1.0


def relative_error_poly(k1: float, k2: float) -> np.ndarray:
    """Ascending coefficients of rerr(x) = x*y(x) - 1."""
    return np.array([-1.0, 4.0 * k1 * k2, -4.0 * (k1 * k1 + k2), 8.0 * k1, -4.0])


def _definite_integral(coeffs: np.ndarray, lo: float = _LO, hi: float = _HI) -> float:
    powers = np.arange(1, coeffs.size + 1)
    return float(np.sum(coeffs * (hi**powers - lo**powers) / powers))


def error_functional(k1: float, k2: float) -> float:
    """Exact integral of the squared relative error over [1/2, 1]."""
    c = relative_error_poly(k1, k2)
    return _definite_integral(np.convolve(c, c))


def optimal_k2(k1: float) -> float:
    """Closed-form minimizer of the functional in k2 for a fixed k1.

    rerr = A(x) + k2*B(x) with B = 4*k1*x - 4*x^2, so the optimum is
    -<A,B>/<B,B> under the interval inner product.
    """
    a = np.array([-1.0, 0.0, -4.0 * k1 * k1, 8.0 * k1, -4.0])
    b = np.array([0.0, 4.0 * k1, -4.0])
    return -_definite_integral(np.convolve(a, b)) / _definite_integral(np.convolve(b, b))


def optimize_constants(xtol: float = 1e-12):
    """Minimize the error functional; returns (k1, k2, e2_at_minimum).

    Deterministic: exact inner k2 solve plus Brent search on k1 bracketed
    around the plain Newton-Raphson seed 1.5.
    """
    res = minimize_scalar(
        lambda k1: error_functional(k1, optimal_k2(k1)),
        bracket=(1.2, 1.5, 1.8),
        method="brent",
        options={"xtol": xtol},
    )
    k1 = float(res.x)
    k2 = optimal_k2(k1)
    return k1, k2, error_functional(k1, k2)


def improvement_pct(e2_base: float, e2_opt: float) -> float:
    """Percent reduction of the error functional relative to a baseline."""
    return 100.0 * (e2_base - e2_opt) / e2_base
