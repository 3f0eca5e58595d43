"""
Finite-difference stencils on uniform grids.

All radial grids are uniform in x = log(t), so derivative matrices are built
once per (node count, spacing) and shared by every operator.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np
import scipy.sparse as sp

CENTERED_WIDTH = 5
EDGE_WIDTH = 8


def fd_weights(offsets: np.ndarray, derivative: int) -> np.ndarray:
    """
    Finite-difference weights for unit spacing.

    Args:
        offsets: Integer node offsets of the stencil relative to the target node
        derivative: Derivative order

    Returns:
        Weights ``w`` with ``f^(derivative)(0) ~= sum(w * f(offsets))``
    """
    offsets = np.asarray(offsets, dtype=float)
    m = offsets.size
    vander = np.array([offsets**j / factorial(j) for j in range(m)])
    rhs = np.zeros(m)
    rhs[derivative] = 1.0
    return np.linalg.solve(vander, rhs)


def _stencil_start(i: int, n_nodes: int) -> tuple[int, int]:
    if 2 <= i <= n_nodes - 3:
        return i - 2, CENTERED_WIDTH
    width = min(EDGE_WIDTH, n_nodes)
    start = min(max(i - width // 2, 0), n_nodes - width)
    return start, width


@lru_cache(maxsize=64)
def derivative_matrices(n_nodes: int, spacing: float) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """
    First and second derivative matrices on a uniform grid.

    Interior rows use the centered 5-point stencils (4th order); the two rows
    nearest each end use 8-point one-sided stencils (7th and 6th order).

    Args:
        n_nodes: Number of grid nodes (at least 5)
        spacing: Uniform node spacing

    Returns:
        Tuple ``(D1, D2)`` of sparse CSR matrices
    """
    rows: list[int] = []
    cols: list[int] = []
    v1: list[float] = []
    v2: list[float] = []
    for i in range(n_nodes):
        start, width = _stencil_start(i, n_nodes)
        idx = np.arange(start, start + width)
        w1 = fd_weights(idx - i, 1) / spacing
        w2 = fd_weights(idx - i, 2) / spacing**2
        rows.extend([i] * width)
        cols.extend(idx.tolist())
        v1.extend(w1.tolist())
        v2.extend(w2.tolist())
    shape = (n_nodes, n_nodes)
    d1 = sp.csr_matrix((v1, (rows, cols)), shape=shape)
    d2 = sp.csr_matrix((v2, (rows, cols)), shape=shape)
    return d1, d2


def stencil_orders(n_nodes: int) -> dict[str, int]:
    """Formal accuracy orders of the interior and edge stencils."""
    width = min(EDGE_WIDTH, n_nodes)
    return {
        "interior_first": CENTERED_WIDTH - 1,
        "interior_second": CENTERED_WIDTH - 1,
        "edge_first": width - 1,
        "edge_second": width - 2,
    }


def observed_order(errors: list[float], refinement: float = 2.0) -> list[float]:
    """
    Observed convergence orders from errors on successively refined grids.

    Args:
        errors: Error norms, coarsest first
        refinement: Spacing ratio between successive grids

    Returns:
        One order per consecutive pair; ``nan`` where an error is zero
    """
    orders = []
    for coarse, fine in zip(errors[:-1], errors[1:]):
        if coarse <= 0.0 or fine <= 0.0:
            orders.append(float("nan"))
        else:
            orders.append(float(np.log(coarse / fine) / np.log(refinement)))
    return orders
