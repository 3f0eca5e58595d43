"""
Scalar curvature and Laplacian of radial metrics.

A radial metric ``p dt^2 + q h0`` is handled through its compactified
coefficients ``P = p sinh^2(t)`` and ``Q = q sinh^2(t)``, which stay bounded at
the conformal boundary. All ``sinh``/``cosh`` factors are evaluated in closed
form; only ``P`` and ``Q`` are differentiated numerically, on the uniform
``x = log(t)`` grid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import GridTooCoarseError, ProfileError
from .geometry import MetricProfile, RadialGrid, RadialMetric
from .report_types import CurvatureDict
from .stencils import derivative_matrices, stencil_orders

logger = logging.getLogger(__name__)

MIN_NODES = 5


@dataclass(frozen=True, eq=False)
class RadialCoefficients:
    """Compactified coefficients of a radial metric and their ``t``-derivatives."""

    dim: int
    grid: RadialGrid
    P: np.ndarray
    P_t: np.ndarray
    Q: np.ndarray
    Q_t: np.ndarray
    Q_tt: np.ndarray

    @cached_property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    @cached_property
    def sinh(self) -> np.ndarray:
        return np.sinh(self.t)

    @cached_property
    def cosh(self) -> np.ndarray:
        return np.cosh(self.t)

    @property
    def k(self) -> int:
        return self.dim - 1

    @cached_property
    def log_b_t(self) -> np.ndarray:
        """``b_t / b`` for ``b = sqrt(Q)``."""
        return self.Q_t / (2.0 * self.Q)

    @cached_property
    def b_tt_over_b(self) -> np.ndarray:
        return self.Q_tt / (2.0 * self.Q) - self.Q_t**2 / (4.0 * self.Q**2)

    @cached_property
    def drift(self) -> np.ndarray:
        """First-order coefficient ``B`` of ``Laplacian = (sinh^2/P)(d_tt + B d_t)``."""
        k = self.k
        return k * self.log_b_t - self.P_t / (2.0 * self.P) - (k - 1) * self.cosh / self.sinh


def _check_grid(grid: RadialGrid) -> None:
    if grid.size < MIN_NODES:
        raise GridTooCoarseError(f"Need at least {MIN_NODES} grid nodes, got {grid.size}")


def _t_derivatives(grid: RadialGrid, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d1, d2 = derivative_matrices(grid.size, grid.spacing)
    t = grid.nodes
    f_x = d1 @ values
    f_xx = d2 @ values
    return f_x / t, (f_xx - f_x) / t**2


def coefficients(metric: RadialMetric) -> RadialCoefficients:
    """
    Compactified coefficients of ``metric`` with derivatives.

    Raises:
        GridTooCoarseError: If the grid has fewer than 5 nodes
    """
    grid = metric.grid
    _check_grid(grid)
    big_p, big_q = metric.scaled()
    q_t, q_tt = _t_derivatives(grid, big_q)
    if isinstance(metric, MetricProfile):
        p_t = np.zeros_like(big_p)
    else:
        p_t, _ = _t_derivatives(grid, big_p)
    return RadialCoefficients(metric.dim, grid, big_p, p_t, big_q, q_t, q_tt)


@dataclass(frozen=True, eq=False)
class CurvatureField:
    """Sampled scalar curvature on a metric's grid."""

    dim: int
    grid: RadialGrid
    R: np.ndarray
    order: int
    edge_order: int

    @property
    def plus(self) -> np.ndarray:
        """``R + n(n-1)``: zero for hyperbolic space and every Einstein slice."""
        return self.R + self.dim * (self.dim - 1)

    def to_dict(self) -> CurvatureDict:
        """Convert to dictionary for JSON serialization."""
        plus = self.plus
        return {
            "level": self.grid.level,
            "min_plus": float(plus.min()),
            "max_plus": float(plus.max()),
            "edge_order": self.edge_order,
            "interior_order": self.order,
        }


def _field(dim: int, grid: RadialGrid, values: np.ndarray) -> CurvatureField:
    orders = stencil_orders(grid.size)
    return CurvatureField(
        dim, grid, values, orders["interior_second"], min(orders["edge_first"], orders["edge_second"])
    )


def scalar_curvature(metric: RadialMetric) -> CurvatureField:
    """
    Scalar curvature of a radial metric.

    Uses the warped-product formula for the compactified metric
    ``P dt^2 + Q h0`` and the conformal law for the factor ``sinh^-2(t)``.

    Args:
        metric: Normal-form or general radial metric

    Returns:
        Curvature field on the metric's grid

    Example:
        field = scalar_curvature(make_hyperbolic(4, grid))
        assert np.allclose(field.R, -12.0)
    """
    c = coefficients(metric)
    k = c.k
    bt, btt = c.log_b_t, c.b_tt_over_b
    s2 = c.sinh**2
    compact = -2.0 * k * (btt / c.P - bt * c.P_t / (2.0 * c.P**2)) + k * (k - 1) * (
        1.0 / c.Q - bt**2 / c.P
    )
    sc = c.sinh * c.cosh
    lap_w = (1.0 - k * bt * sc + c.P_t / (2.0 * c.P) * sc) / c.P
    R = s2 * compact - 2.0 * k * lap_w - k * (k - 1) * c.cosh**2 / c.P
    return _field(metric.dim, metric.grid, R)


def laplacian_matrix(metric: RadialMetric) -> sp.csr_matrix:
    """
    Sparse radial Laplace-Beltrami operator of ``metric``.

    In ``x = log(t)``: ``(sinh^2 / (P t^2)) (f_xx - f_x + t B f_x)``.
    """
    c = coefficients(metric)
    d1, d2 = derivative_matrices(c.grid.size, c.grid.spacing)
    t = c.t
    scale = sp.diags(c.sinh**2 / (c.P * t**2))
    first = sp.diags(t * c.drift - 1.0)
    return (scale @ (d2 + first @ d1)).tocsr()


def laplace_beltrami(metric: RadialMetric, f: np.ndarray) -> np.ndarray:
    """
    Apply the radial Laplace-Beltrami operator of ``metric`` to ``f``.

    Args:
        metric: Radial metric
        f: Samples on the metric's grid

    Returns:
        ``Laplacian(f)`` sampled on the same grid

    Raises:
        ProfileError: If ``f`` does not live on the metric's grid
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (metric.grid.size,):
        raise ProfileError(f"Function has {f.size} samples for a grid of {metric.grid.size} nodes")
    return np.asarray(laplacian_matrix(metric) @ f)


def conformal_scalar_curvature(metric: RadialMetric, u: np.ndarray) -> CurvatureField:
    """
    Scalar curvature of ``u^(4/(n-2)) g`` from the conformal transformation law.

    ``R_new = u^(-4/(n-2)) R - (4(n-1)/(n-2)) u^(-(n+2)/(n-2)) Laplacian(u)``

    Raises:
        ProfileError: If ``u`` is not positive on every node
    """
    u = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(u)) or np.any(u <= 0.0):
        raise ProfileError("Conformal factor must be positive at every node")
    n = metric.dim
    base = scalar_curvature(metric)
    lap = laplace_beltrami(metric, u)
    R = u ** (-4.0 / (n - 2)) * base.R - (4.0 * (n - 1) / (n - 2)) * u ** (
        -(n + 2.0) / (n - 2)
    ) * lap
    return _field(n, metric.grid, R)


__all__ = [
    "CurvatureField",
    "RadialCoefficients",
    "coefficients",
    "conformal_scalar_curvature",
    "laplace_beltrami",
    "laplacian_matrix",
    "scalar_curvature",
]
