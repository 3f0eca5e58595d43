"""
Static potentials and minimal spheres of radial metrics.

The static test looks for radial ``f`` with
``L*f = -(Laplacian f) g + Hess f - f Ric = 0``. Writing the metric as
``ds^2 + rho(s)^2 h0`` with ``s`` the radial arclength, the two independent
components of ``L*f`` are

    E_ss = -k (rho_s/rho) f_s + k (rho_ss/rho) f
    E_aa = -f_ss - (k-1)(rho_s/rho) f_s + f [rho_ss/rho - (k-1)(1 - rho_s^2)/rho^2]

with ``k = n - 1``. Both are discretized on a window and stacked; the smallest
singular value of the stacked matrix measures how close the window is to
carrying a radial static potential.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy import optimize
from scipy.interpolate import make_interp_spline

from .curvature import coefficients, scalar_curvature
from .deform import FamilyReport
from .errors import WindowError
from .fitting import DEFAULT_WINDOW, decay_exponent
from .geometry import GeneralProfile, RadialMetric
from .mass import normalize, sphere_area
from .report_types import AdmissibilityDict, CrossingDict, HorizonDict, StaticDict
from .stencils import derivative_matrices

logger = logging.getLogger(__name__)

MIN_WINDOW_NODES = 20
STENCIL_REACH = 2
DECAY_ATOL = 1e-12


class Verdict:
    """Outcomes of the static kernel test."""

    STATIC = "static"
    NON_STATIC = "non-static"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class StaticOperator:
    """Stacked discrete ``(E_ss, E_aa)`` operator on a window."""

    matrix: np.ndarray
    rows: np.ndarray
    """Grid indices of the window nodes (one row of each component per node)"""

    cols: np.ndarray
    """Grid indices of the unknowns: the window widened by the stencil reach"""


def _window_rows(metric: RadialMetric, window: tuple[float, float]) -> np.ndarray:
    t_a, t_b = window
    grid = metric.grid
    if not grid.t_min < t_a < t_b < grid.t_max:
        raise WindowError(
            f"Window {window} must lie strictly inside the grid span ({grid.t_min}, {grid.t_max})"
        )
    t = grid.nodes
    rows = np.flatnonzero((t >= t_a) & (t <= t_b))
    if rows.size < MIN_WINDOW_NODES:
        raise WindowError(f"Window {window} holds {rows.size} nodes; at least {MIN_WINDOW_NODES} are needed")
    if rows[0] < STENCIL_REACH or rows[-1] > grid.size - 1 - STENCIL_REACH:
        raise WindowError(f"Window {window} touches the grid edge; centered stencils do not fit")
    return rows


def static_operator(metric: RadialMetric, window: tuple[float, float]) -> StaticOperator:
    """
    Assemble the stacked static operator on the nodes of ``window``.

    Raises:
        WindowError: If the window is too small or touches the grid edge
    """
    rows = _window_rows(metric, window)
    cols = np.arange(rows[0] - STENCIL_REACH, rows[-1] + STENCIL_REACH + 1)
    c = coefficients(metric)
    k = c.k
    t = c.t
    d1, d2 = derivative_matrices(c.grid.size, c.grid.spacing)
    dt = sp.diags(1.0 / t) @ d1
    dtt = sp.diags(1.0 / t**2) @ (d2 - d1)

    root_p = np.sqrt(c.P)
    sigma = c.sinh / root_p
    sigma_t = c.cosh / root_p - c.sinh * c.P_t / (2.0 * c.P * root_p)
    lam = c.log_b_t - c.cosh / c.sinh
    lam_t = c.Q_tt / (2.0 * c.Q) - c.Q_t**2 / (2.0 * c.Q**2) + 1.0 / c.sinh**2
    # rho_s and rho_ss hold rho_s/rho and rho_ss/rho
    rho_s = sigma * lam
    rho_ss = sigma * (sigma_t * lam + sigma * lam_t) + rho_s**2
    inv_rho2 = c.sinh**2 / c.Q

    e_ss = sp.diags(-k * rho_s * sigma) @ dt + sp.diags(k * rho_ss)
    e_aa = (
        -(sp.diags(sigma**2) @ dtt + sp.diags(sigma * sigma_t) @ dt)
        - sp.diags((k - 1) * rho_s * sigma) @ dt
        + sp.diags(rho_ss - (k - 1) * (inv_rho2 - rho_s**2))
    )
    block = (slice(rows[0], rows[-1] + 1), slice(cols[0], cols[-1] + 1))
    matrix = np.vstack([e_ss.tocsr()[block].toarray(), e_aa.tocsr()[block].toarray()])
    return StaticOperator(matrix, rows, cols)


def static_residual(metric: RadialMetric, window: tuple[float, float], f: np.ndarray) -> float:
    """
    Max-norm of ``L*f`` on the window for ``f`` sampled on the whole grid,
    relative to the max-norm of ``f`` on the stencil columns.
    """
    op = static_operator(metric, window)
    vals = np.asarray(f, dtype=float)[op.cols]
    scale = float(np.max(np.abs(vals)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(op.matrix @ (vals / scale))))


def constant_curvature_prefilter(
    metric: RadialMetric, window: tuple[float, float], tol: float = 1e-6
) -> bool:
    """True iff ``max R - min R <= tol`` on the window nodes."""
    rows = _window_rows(metric, window)
    R = scalar_curvature(metric).R[rows]
    return bool(R.max() - R.min() <= tol)


@dataclass
class StaticVerdict:
    """Radial-sector outcome of the static kernel test on one window."""

    window: tuple[float, float]
    smallest_singular_value: float
    residual: float
    verdict: str
    prefilter: bool
    curvature_range: float
    candidate: Optional[np.ndarray] = None
    candidate_t: Optional[np.ndarray] = None
    sector: str = "radial"

    def to_dict(self) -> StaticDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "window": [self.window[0], self.window[1]],
            "sector": self.sector,
            "prefilter": self.prefilter,
            "curvature_range": self.curvature_range,
            "smallest_singular_value": self.smallest_singular_value,
            "residual": self.residual,
            "verdict": self.verdict,
            "candidate": None if self.candidate is None else self.candidate.tolist(),
        }


def static_kernel_test(
    metric: RadialMetric,
    window: tuple[float, float],
    *,
    static_tol: float = 1e-6,
    gap_tol: float = 1e-2,
    curvature_tol: float = 1e-6,
) -> StaticVerdict:
    """
    Decide whether ``window`` carries a radial static potential.

    The smallest singular value of the stacked operator is taken over unit
    2-norm vectors; its singular vector, rescaled to unit max-norm, is the
    candidate potential.

    Args:
        metric: Radial metric
        window: ``(t_a, t_b)`` strictly inside the grid with at least 20 nodes
        static_tol: Bound on singular value and residual for a static verdict
        gap_tol: Singular value above which the verdict is non-static
        curvature_tol: Range of ``R`` allowed by the constant-curvature prefilter

    Returns:
        Verdict; non-constant curvature on the window always yields non-static

    Raises:
        WindowError: If the window is too small or touches the grid edge

    Example:
        verdict = static_kernel_test(make_hyperbolic(3, grid), (0.3, 0.9))
        assert verdict.verdict == Verdict.STATIC
    """
    op = static_operator(metric, window)
    R = scalar_curvature(metric).R[op.rows]
    curvature_range = float(R.max() - R.min())
    prefilter = curvature_range <= curvature_tol

    _, singular, vh = scipy.linalg.svd(op.matrix, full_matrices=False)
    sigma_min = float(singular[-1])
    vec = vh[-1]
    peak = int(np.argmax(np.abs(vec)))
    candidate = vec / vec[peak]
    residual = float(np.max(np.abs(op.matrix @ candidate)))

    if not prefilter:
        verdict = Verdict.NON_STATIC
    elif sigma_min <= static_tol and residual <= static_tol:
        verdict = Verdict.STATIC
    elif sigma_min >= gap_tol:
        verdict = Verdict.NON_STATIC
    else:
        verdict = Verdict.INCONCLUSIVE
    logger.debug(
        "Static test on %s: sigma_min=%.3e residual=%.3e prefilter=%s -> %s",
        window,
        sigma_min,
        residual,
        prefilter,
        verdict,
    )
    inner = slice(STENCIL_REACH, len(op.cols) - STENCIL_REACH)
    keep = verdict == Verdict.STATIC
    return StaticVerdict(
        window=(float(window[0]), float(window[1])),
        smallest_singular_value=sigma_min,
        residual=residual,
        verdict=verdict,
        prefilter=prefilter,
        curvature_range=curvature_range,
        candidate=candidate[inner] if keep else None,
        candidate_t=metric.grid.nodes[op.rows] if keep else None,
    )


# Minimal spheres


@dataclass(frozen=True)
class Crossing:
    """Critical point of the area radius: a minimal coordinate sphere."""

    t_star: float
    area_radius: float
    direction: str
    separating: bool = True

    def to_dict(self) -> CrossingDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "t_star": self.t_star,
            "area_radius": self.area_radius,
            "direction": self.direction,
            "separating": self.separating,
        }


@dataclass
class HorizonScan:
    """Minimal spheres of a radial metric, sorted by ``t``."""

    crossings: list[Crossing] = field(default_factory=list)
    cmc_crossings: list[float] = field(default_factory=list)

    def to_dict(self) -> HorizonDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "crossings": [c.to_dict() for c in self.crossings],
            "cmc_crossings": list(self.cmc_crossings),
        }


def _sign_changes(values: np.ndarray) -> np.ndarray:
    return np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0.0)


def mean_curvature(metric: RadialMetric) -> np.ndarray:
    """Mean curvature of each coordinate sphere with respect to the normal pointing to infinity."""
    c = coefficients(metric)
    lam = c.log_b_t - c.cosh / c.sinh
    return -c.k * c.sinh / np.sqrt(c.P) * lam


def minimal_sphere_scan(metric: RadialMetric, xtol: float = 1e-12) -> HorizonScan:
    """
    Locate critical points of the area radius ``sqrt(q)``.

    ``log q`` is interpolated by a quintic spline in ``x = log t``; each sign
    change of its derivative between nodes is refined with Brent's method.
    Radial spheres always separate the core from infinity.

    Args:
        metric: Radial metric
        xtol: Root tolerance in ``x = log t``

    Returns:
        Crossings and the coordinates of mean-curvature ``n - 1`` spheres
    """
    grid = metric.grid
    x = grid.x
    log_q = np.log(metric.q)
    spline = make_interp_spline(x, log_q, k=5)
    slope = spline.derivative()
    d = slope(x)

    crossings = []
    for i in _sign_changes(d):
        root = optimize.brentq(slope, x[i], x[i + 1], xtol=xtol)
        direction = "min" if d[i] < 0.0 else "max"
        crossings.append(
            Crossing(float(np.exp(root)), float(np.exp(0.5 * spline(root))), direction)
        )
    for i in np.flatnonzero(d == 0.0):
        direction = "min" if i + 1 < d.size and d[i + 1] > 0.0 else "max"
        crossings.append(Crossing(float(grid.nodes[i]), float(np.exp(0.5 * log_q[i])), direction))
    crossings.sort(key=lambda c: c.t_star)

    excess = mean_curvature(metric) - (metric.dim - 1)
    t = grid.nodes
    cmc = []
    for i in _sign_changes(excess):
        w = excess[i] / (excess[i] - excess[i + 1])
        cmc.append(float(t[i] + w * (t[i + 1] - t[i])))
    if crossings:
        logger.info("Found %d minimal sphere(s) at t=%s", len(crossings), [c.t_star for c in crossings])
    return HorizonScan(crossings, cmc)


# Admissibility


@dataclass
class AdmissibilityReport:
    """Outcome of the admissibility check of an extension."""

    minR_plus: float
    boundary_order: float
    interior_crossings: list[Crossing]
    reasons: list[str]

    @property
    def passed(self) -> bool:
        return not self.reasons

    def to_dict(self) -> AdmissibilityDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "passed": self.passed,
            "reasons": list(self.reasons),
            "minR_plus": self.minR_plus,
            "boundary_order": self.boundary_order,
            "interior_crossings": [c.to_dict() for c in self.interior_crossings],
        }


def admissibility_check(
    metric: RadialMetric,
    t_omega: float,
    *,
    curvature_tol: float = 1e-6,
    window: tuple[float, float] = DEFAULT_WINDOW,
    decay_atol: float = DECAY_ATOL,
) -> AdmissibilityReport:
    """
    Check that ``metric`` is an admissible extension of the core ``t >= t_omega``.

    Requires ``R >= -n(n-1) - curvature_tol`` everywhere, ``a - 1`` decaying at
    rate at least ``t^(n - 1/2)`` and no minimal sphere with ``t < t_omega``.
    A sphere within one grid cell of ``t_omega`` counts as lying on the boundary.
    Deviations ``|a - 1| <= decay_atol`` are treated as exact zeros.

    Raises:
        WindowError: If ``t_omega`` is outside the grid
    """
    grid = metric.grid
    if not grid.t_min < t_omega <= grid.t_max:
        raise WindowError(f"t_omega={t_omega} is outside the grid ({grid.t_min}, {grid.t_max}]")
    n = metric.dim
    reasons = []

    plus = scalar_curvature(metric).plus
    min_plus = float(plus.min())
    if min_plus < -curvature_tol:
        reasons.append(f"scalar curvature below -n(n-1) by {-min_plus:.3g}")

    normal = normalize(metric) if isinstance(metric, GeneralProfile) else metric
    order = decay_exponent(normal.t, normal.a - 1.0, window, decay_atol)
    if order < n - 0.5:
        reasons.append(f"a(t) - 1 decays like t^{order:.3g}, slower than t^{n}")

    edge = t_omega * np.exp(-grid.spacing)
    interior = [c for c in minimal_sphere_scan(metric).crossings if c.t_star < edge]
    for c in interior:
        reasons.append(f"minimal sphere at t={c.t_star:.10g} (area radius {c.area_radius:.10g})")
    return AdmissibilityReport(min_plus, order, interior, reasons)


def bartnik_upper_bound(
    n: int,
    family: FamilyReport,
    admissibility: Sequence[AdmissibilityReport],
) -> Optional[float]:
    """
    Smallest total mass among verified and admissible family members.

    Every such member is an admissible extension of the core, so its mass
    bounds the infimum over extensions from above. ``None`` when no member
    qualifies.
    """
    masses = [
        m.mu_s * sphere_area(n)
        for m, adm in zip(family.members, admissibility)
        if m.passed and adm.passed
    ]
    return min(masses) if masses else None


__all__ = [
    "AdmissibilityReport",
    "Crossing",
    "HorizonScan",
    "StaticOperator",
    "StaticVerdict",
    "Verdict",
    "admissibility_check",
    "bartnik_upper_bound",
    "constant_curvature_prefilter",
    "mean_curvature",
    "minimal_sphere_scan",
    "static_kernel_test",
    "static_residual",
]
