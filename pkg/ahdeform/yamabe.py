"""
Yamabe problem for prescribed scalar curvature ``-n(n-1)``.

With ``u = 1 + v`` the equation
``-(4(n-1)/(n-2)) Laplacian(u) + R u + n(n-1) u^((n+2)/(n-2)) = 0`` becomes

    -Laplacian(v) + n v + Rh v = -Rh - F(v),

``Rh = (n-2)/(4(n-1)) (R + n(n-1))``. It is solved by Newton's method on the
collocation grid with a Robin condition ``t v_t = n v`` at the first node and
zero Neumann at the last.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .curvature import laplacian_matrix, scalar_curvature
from .errors import (
    DomainError,
    HypothesisError,
    NewtonDivergenceError,
    PositivityLossError,
    ProfileError,
)
from .fitting import DEFAULT_ATOL, DEFAULT_DRIFT, DEFAULT_WINDOW, FitResult, fit_leading
from .geometry import MetricProfile, RadialGrid, RadialMetric
from .report_types import YamabeDict
from .stencils import derivative_matrices

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 50
MAX_HALVINGS = 30


def nonlinearity_F(v: Any, n: int) -> Any:
    """
    Superlinear remainder ``n(n-2)/4 [(1+v)^((n+2)/(n-2)) - 1 - ((n+2)/(n-2)) v]``.

    Args:
        v: Scalar or array with ``v > -1``
        n: Dimension

    Returns:
        ``F(v)`` with the same shape as ``v``

    Raises:
        DomainError: If any ``v <= -1``

    Example:
        value = nonlinearity_F(-0.1, 4)  # 2 * 0.01 * 2.9
    """
    arr = np.asarray(v, dtype=float)
    if np.any(arr <= -1.0):
        raise DomainError("F(v) is only defined for v > -1")
    p = (n + 2.0) / (n - 2.0)
    out = n * (n - 2) / 4.0 * (np.expm1(p * np.log1p(arr)) - p * arr)
    return float(out) if np.ndim(v) == 0 else out


def nonlinearity_derivative(v: Any, n: int) -> Any:
    """``F'(v) = n(n+2)/4 [(1+v)^(4/(n-2)) - 1]``."""
    arr = np.asarray(v, dtype=float)
    if np.any(arr <= -1.0):
        raise DomainError("F'(v) is only defined for v > -1")
    out = n * (n + 2) / 4.0 * np.expm1(4.0 / (n - 2) * np.log1p(arr))
    return float(out) if np.ndim(v) == 0 else out


def rescaled_curvature(metric: RadialMetric) -> np.ndarray:
    """``Rh = (n-2)/(4(n-1)) (R + n(n-1))``."""
    n = metric.dim
    return (n - 2) / (4.0 * (n - 1)) * scalar_curvature(metric).plus


def yamabe_source(metric: RadialMetric, v: np.ndarray) -> np.ndarray:
    """
    Right-hand side ``f = -Rh (1 + v) - F(v)`` of ``-Laplacian(v) + n v = f``.

    Raises:
        ProfileError: If ``v`` does not live on the metric's grid
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (metric.grid.size,):
        raise ProfileError(f"Correction has {v.size} samples for a grid of {metric.grid.size} nodes")
    r_hat = rescaled_curvature(metric)
    return -r_hat * (1.0 + v) - nonlinearity_F(v, metric.dim)


def extract_decay(
    v: np.ndarray,
    grid: RadialGrid,
    n: int,
    window: tuple[float, float] = DEFAULT_WINDOW,
    max_drift: float = DEFAULT_DRIFT,
    atol: float = DEFAULT_ATOL,
) -> tuple[float, FitResult]:
    """
    Decay coefficient ``v_n`` in ``v = v_n t^n + O(t^(n+1))``.

    Returns:
        Tuple of ``v_n`` and the fit diagnostics

    Raises:
        FitUnstableError: If the half-window estimate drifts by more than ``max_drift``
    """
    fit = fit_leading(grid.nodes, v, n, window, max_drift, atol)
    return fit.coefficient, fit


@dataclass(frozen=True, eq=False)
class YamabeSolution:
    """Conformal correction ``v = u - 1`` and solver diagnostics."""

    dim: int
    grid: RadialGrid
    v: np.ndarray
    v_n: float
    residual_norm: float
    fit: FitResult
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)

    def factor(self, s: float) -> np.ndarray:
        """Conformal factor ``u_s = 1 + s v``."""
        return 1.0 + s * self.v

    @property
    def quadratic_constant(self) -> Optional[float]:
        """Largest ``r_(k+1) / r_k^2`` over the last three residuals."""
        tail = self.residual_history[-3:]
        ratios = [b / a**2 for a, b in zip(tail[:-1], tail[1:]) if a > 0.0]
        return max(ratios) if ratios else None

    def to_dict(self) -> YamabeDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "v_n": self.v_n,
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "residual_history": list(self.residual_history),
            "quadratic_constant": self.quadratic_constant,
            "v_min": float(self.v.min()),
            "v_max": float(self.v.max()),
            "fit": self.fit.to_dict(),
        }


class _System:
    """Discrete residual and Jacobian of the v-form equation."""

    def __init__(self, metric: MetricProfile, r_hat: np.ndarray):
        grid = metric.grid
        self.n = metric.dim
        self.r_hat = r_hat
        self.lap = laplacian_matrix(metric)
        d1, _ = derivative_matrices(grid.size, grid.spacing)
        self.first = d1.getrow(0).toarray().ravel()
        self.first[0] -= self.n
        self.last = d1.getrow(grid.size - 1).toarray().ravel()

    def residual(self, v: np.ndarray) -> np.ndarray:
        r = -(self.lap @ v) + (self.n + self.r_hat) * v + self.r_hat + nonlinearity_F(v, self.n)
        r[0] = self.first @ v
        r[-1] = self.last @ v
        return np.asarray(r)

    def jacobian(self, v: np.ndarray) -> sp.csr_matrix:
        diag = self.n + self.r_hat + nonlinearity_derivative(v, self.n)
        jac = (-self.lap + sp.diags(diag)).tolil()
        jac[0, :] = self.first
        jac[-1, :] = self.last
        return jac.tocsr()


def solve_yamabe(
    metric: MetricProfile,
    tol: float = 1e-10,
    *,
    curvature_tol: float = 1e-6,
    fit_window: tuple[float, float] = DEFAULT_WINDOW,
    max_drift: float = DEFAULT_DRIFT,
    fit_atol: float = DEFAULT_ATOL,
    max_iterations: int = MAX_ITERATIONS,
) -> YamabeSolution:
    """
    Solve for the conformal correction taking ``metric`` to curvature ``-n(n-1)``.

    Newton's method from ``v = 0`` with a halving line search that keeps
    ``1 + v > 0`` and requires the residual max-norm to decrease.

    Args:
        metric: Normal-form metric with ``R >= -n(n-1)``
        tol: Residual max-norm tolerance
        curvature_tol: Slack allowed below ``-n(n-1)`` before the hypothesis fails
        fit_window: Window for the ``v_n`` fit
        max_drift: Fit stability threshold
        fit_atol: Absolute floor of the fit stability check
        max_iterations: Newton iteration cap

    Returns:
        The solution with its decay coefficient

    Raises:
        HypothesisError: If ``R < -n(n-1) - curvature_tol`` somewhere
        NewtonDivergenceError: If the tolerance is not reached
        PositivityLossError: If no damped step keeps ``1 + v > 0``
    """
    n = metric.dim
    plus = scalar_curvature(metric).plus
    worst = int(np.argmin(plus))
    if plus[worst] < -curvature_tol:
        raise HypothesisError(
            f"Scalar curvature falls below -n(n-1) by {-plus[worst]:.3g} at t={metric.t[worst]:.6g}"
        )
    r_hat = (n - 2) / (4.0 * (n - 1)) * plus
    system = _System(metric, r_hat)

    v = np.zeros(metric.grid.size)
    res = system.residual(v)
    norm = float(np.max(np.abs(res)))
    history = [norm]
    iterations = 0
    while norm > tol:
        if iterations >= max_iterations:
            raise NewtonDivergenceError(
                f"Newton iteration did not reach {tol:g} in {max_iterations} iterations "
                f"(last residual {norm:.3e})",
                norm,
            )
        step = spsolve(system.jacobian(v), -res)
        damping = 1.0
        positive = False
        for _ in range(MAX_HALVINGS + 1):
            trial = v + damping * step
            if np.all(1.0 + trial > 0.0):
                positive = True
                trial_res = system.residual(trial)
                trial_norm = float(np.max(np.abs(trial_res)))
                if trial_norm < norm:
                    break
            damping *= 0.5
        else:
            if not positive:
                raise PositivityLossError(
                    f"No damped Newton step keeps 1 + v > 0 at iteration {iterations + 1}"
                )
            raise NewtonDivergenceError(
                f"Line search failed to reduce the residual below {norm:.3e}", norm
            )
        v, res, norm = trial, trial_res, trial_norm
        iterations += 1
        history.append(norm)
        logger.debug("Newton iteration %d: residual=%.3e damping=%g", iterations, norm, damping)

    v_n, fit = extract_decay(v, metric.grid, n, fit_window, max_drift, fit_atol)
    logger.info(
        "Yamabe solve converged in %d iterations (residual %.3e, v_n=%.10g)",
        iterations,
        norm,
        v_n,
    )
    return YamabeSolution(n, metric.grid, v, v_n, norm, fit, iterations, history)


__all__ = [
    "YamabeSolution",
    "extract_decay",
    "nonlinearity_F",
    "nonlinearity_derivative",
    "rescaled_curvature",
    "solve_yamabe",
    "yamabe_source",
]
