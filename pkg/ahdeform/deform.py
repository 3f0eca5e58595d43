"""
Conformal and glued deformation families.

For a solved correction ``v`` the conformal metrics are
``h_s = (1 + s v)^(4/(n-2)) g`` and the glued metrics are
``g_s = (1 - phi) g + phi h_s``, with ``phi = 1`` near infinity (``t <= t0``)
and ``phi = 0`` from ``t1`` inward.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, TypeVar

import numpy as np

from .curvature import laplace_beltrami, scalar_curvature
from .errors import CutoffError, DomainError, ProfileError
from .fitting import DEFAULT_ATOL, DEFAULT_DRIFT, DEFAULT_WINDOW
from .geometry import GeneralProfile, MetricProfile, RadialGrid, smooth_step
from .report_types import CutoffDict, FamilyDict, MemberDict
from .stencils import derivative_matrices
from .yamabe import YamabeSolution

logger = logging.getLogger(__name__)

DEFAULT_S_VALUES = (0.4, 0.2, 0.1, 0.05)


class MassClause:
    """Outcomes of the strict mass-decrease clause."""

    PASS = "pass"
    FAIL = "fail"
    DEGENERATE = "degenerate-not-applicable"


@dataclass(frozen=True)
class CutoffSpec:
    """
    Transition ``phi`` between the conformal metric and the base metric.

    ``phi = 1`` for ``t <= t0``, ``phi = 0`` for ``t >= t1`` and non-increasing
    in between. The transition is C-infinity; ``smoothness`` is the derivative
    order certified on samples.
    """

    t0: float
    t1: float
    smoothness: int = 2

    def __post_init__(self) -> None:
        if not 0.0 < self.t0 < self.t1:
            raise CutoffError(f"Cutoff needs 0 < t0 < t1, got t0={self.t0}, t1={self.t1}")
        if self.smoothness < 0:
            raise CutoffError(f"Smoothness order must be non-negative, got {self.smoothness}")

    def check_inside(self, t_omega: float) -> None:
        """
        Raises:
            CutoffError: If the transition reaches the core region ``t >= t_omega``
        """
        if self.t1 >= t_omega:
            raise CutoffError(f"Cutoff edge t1={self.t1} must lie below t_omega={t_omega}")

    def phi(self, t: np.ndarray) -> np.ndarray:
        return 1.0 - smooth_step((np.asarray(t, dtype=float) - self.t0) / (self.t1 - self.t0))

    def to_dict(self) -> CutoffDict:
        """Convert to dictionary for JSON serialization."""
        return {"t0": self.t0, "t1": self.t1, "smoothness": self.smoothness}


def conformal_multiply(metric: MetricProfile, u: np.ndarray) -> GeneralProfile:
    """
    The metric ``u^(4/(n-2)) g`` as a general radial profile.

    Args:
        metric: Normal-form base metric
        u: Positive conformal factor on the metric's grid

    Returns:
        ``p = u^(4/(n-2)) sinh^-2(t)``, ``q = u^(4/(n-2)) a(t) sinh^-2(t)``

    Raises:
        ProfileError: If ``u`` is not positive or lives on another grid
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (metric.grid.size,):
        raise ProfileError(f"Conformal factor has {u.size} samples for a grid of {metric.grid.size} nodes")
    if np.any(~np.isfinite(u)) or np.any(u <= 0.0):
        raise ProfileError("Conformal factor must be positive at every node")
    w = u ** (4.0 / (metric.dim - 2))
    s2 = np.sinh(metric.t) ** 2
    return GeneralProfile(metric.dim, metric.grid, w / s2, w * metric.a / s2, f"conformal({metric.meta})")


def glue(base: MetricProfile, conformal: GeneralProfile, cutoff: CutoffSpec) -> GeneralProfile:
    """
    Coefficient-wise convex combination ``(1 - phi) g + phi h``.

    Samples equal the base samples bit for bit where ``phi = 0`` and the
    conformal samples where ``phi = 1``.

    Raises:
        ProfileError: If the two metrics live on different grids
    """
    if conformal.grid != base.grid or conformal.dim != base.dim:
        raise ProfileError("Glued metrics must share dimension and grid")
    phi = cutoff.phi(base.t)
    keep = 1.0 - phi
    p = keep * base.p + phi * conformal.p
    q = keep * base.q + phi * conformal.q
    return GeneralProfile(base.dim, base.grid, p, q, f"glued({base.meta}; t0={cutoff.t0}, t1={cutoff.t1})")


@dataclass(frozen=True, eq=False)
class DeformedFamily:
    """Conformal metrics ``h_s`` and glued metrics ``g_s`` over an ``s`` sweep."""

    base: MetricProfile
    yamabe: YamabeSolution
    cutoff: CutoffSpec
    s_values: tuple[float, ...]
    members: tuple[GeneralProfile, ...]
    conformal: tuple[GeneralProfile, ...]

    def member(self, s: float) -> GeneralProfile:
        return self.members[self.s_values.index(s)]


_T = TypeVar("_T")
_R = TypeVar("_R")


def _map(func: Callable[[_T], _R], items: Sequence[_T], workers: Optional[int]) -> list[_R]:
    if workers is None or workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map yields in submission order
        return list(pool.map(func, items))


def build_family(
    base: MetricProfile,
    yamabe: YamabeSolution,
    cutoff: CutoffSpec,
    s_values: Sequence[float] = DEFAULT_S_VALUES,
    workers: Optional[int] = None,
) -> DeformedFamily:
    """
    Build ``g_s = glue(g, conformal_multiply(g, 1 + s v), cutoff)`` for each ``s``.

    Args:
        base: Normal-form base metric
        yamabe: Solution of the Yamabe problem on ``base``
        cutoff: Transition between ``h_s`` and ``g``
        s_values: Parameters in the open interval ``(0, 1)``
        workers: Thread count for building members concurrently

    Raises:
        DomainError: If some ``s`` is outside ``(0, 1)``
        ProfileError: If the solution lives on another grid
        CutoffError: If the transition reaches the inner end of the grid
    """
    values = tuple(float(s) for s in s_values)
    if not values:
        raise DomainError("At least one deformation parameter is required")
    bad = [s for s in values if not 0.0 < s < 1.0]
    if bad:
        raise DomainError(f"Deformation parameters must lie in (0, 1), got {bad}")
    if yamabe.grid != base.grid:
        raise ProfileError("Yamabe solution and base metric live on different grids")
    cutoff.check_inside(base.grid.t_max)

    def one(s: float) -> tuple[GeneralProfile, GeneralProfile]:
        h_s = conformal_multiply(base, yamabe.factor(s))
        return glue(base, h_s, cutoff), h_s

    built = _map(one, values, workers)
    logger.info("Built deformed family for s in %s", list(values))
    return DeformedFamily(
        base,
        yamabe,
        cutoff,
        values,
        tuple(g for g, _ in built),
        tuple(h for _, h in built),
    )


def _deviation(grid: RadialGrid, member: GeneralProfile, base: MetricProfile) -> float:
    d1, d2 = derivative_matrices(grid.size, grid.spacing)
    big_p, big_q = member.scaled()
    base_p, base_q = base.scaled()
    worst = 0.0
    for diff in (big_p - base_p, big_q - base_q):
        for arr in (diff, d1 @ diff, d2 @ diff):
            worst = max(worst, float(np.max(np.abs(arr))))
    return worst


def member_deviations(family: DeformedFamily) -> list[float]:
    """Max-node deviation of each glued member from the base, in ``s`` order."""
    return [_deviation(family.base.grid, g_s, family.base) for g_s in family.members]


def superharmonic_extent(metric: MetricProfile, u: np.ndarray) -> float:
    """
    Largest node ``t_0`` with ``-Laplacian(u) >= 0`` on all nodes up to it.

    Returns 0 when the first node already fails.
    """
    neg_lap = -laplace_beltrami(metric, u)
    bad = np.flatnonzero(neg_lap < 0.0)
    t = metric.t
    if bad.size == 0:
        return float(t[-1])
    return float(t[bad[0] - 1]) if bad[0] > 0 else 0.0


@dataclass
class MemberReport:
    """Verification of one glued metric."""

    s: float
    mu_base: float
    mu_s: float
    mu_conformal: float
    predicted_drop: float
    measured_drop: float
    rel_err: float
    mass_clause: str
    minR_plus: float
    annulus_min_t: float
    annulus_minR_plus: float
    equality_region_ok: bool
    deviation: float
    superharmonic_extent: float
    curvature_ok: bool = True
    curvature: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    @property
    def violations(self) -> list[str]:
        out = []
        if self.mass_clause == MassClause.FAIL:
            out.append("mass")
        if not self.curvature_ok:
            out.append("curvature")
        if not self.equality_region_ok:
            out.append("equality")
        return out

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> MemberDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "s": self.s,
            "mu_base": self.mu_base,
            "mu_s": self.mu_s,
            "mu_conformal": self.mu_conformal,
            "predicted_drop": self.predicted_drop,
            "measured_drop": self.measured_drop,
            "rel_err": self.rel_err,
            "mass_clause": self.mass_clause,
            "minR_plus": self.minR_plus,
            "annulus_min_t": self.annulus_min_t,
            "annulus_minR_plus": self.annulus_minR_plus,
            "equality_region_ok": self.equality_region_ok,
            "deviation": self.deviation,
            "superharmonic_extent": self.superharmonic_extent,
            "violations": self.violations,
            "passed": self.passed,
        }


@dataclass
class FamilyReport:
    """Verification of every member of a deformed family."""

    degenerate: bool
    cutoff: CutoffSpec
    members: list[MemberReport]

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.members)

    @property
    def deviation_constant(self) -> float:
        """Smallest ``C`` with ``deviation <= C s`` over the sweep."""
        return max((m.deviation / m.s for m in self.members), default=0.0)

    @property
    def drop_per_s_spread(self) -> float:
        """Relative spread of ``measured_drop / s`` across the sweep."""
        ratios = np.array([m.measured_drop / m.s for m in self.members])
        if ratios.size == 0 or self.degenerate:
            return 0.0
        mean = abs(float(ratios.mean()))
        return float((ratios.max() - ratios.min()) / mean) if mean > 0.0 else float("inf")

    def to_dict(self) -> FamilyDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "degenerate": self.degenerate,
            "cutoff": self.cutoff.to_dict(),
            "deviation_constant": self.deviation_constant,
            "drop_per_s_spread": self.drop_per_s_spread,
            "members": [m.to_dict() for m in self.members],
            "passed": self.passed,
        }


def verify_family(
    family: DeformedFamily,
    tol: float = 1e-6,
    *,
    mass_rtol: float = 0.01,
    fit_window: tuple[float, float] = DEFAULT_WINDOW,
    max_drift: float = DEFAULT_DRIFT,
    fit_atol: float = DEFAULT_ATOL,
    workers: Optional[int] = None,
) -> FamilyReport:
    """
    Check the three family conclusions for every ``s``.

    (i) the mass aspect of ``g_s`` lies below that of ``g`` by at least the
    closed-form drop times ``1 - mass_rtol``; (ii) ``R + n(n-1) >= -tol`` on
    every node; (iii) samples equal the base samples bit for bit for
    ``t >= t1``. Failures are recorded in the report, never raised.

    Args:
        family: Built family
        tol: Curvature tolerance
        mass_rtol: Relative slack on the predicted mass drop
        fit_window: Window of the ``t^n`` fits
        max_drift: Fit stability threshold
        fit_atol: Absolute floor of the fit stability check
        workers: Thread count for verifying members concurrently

    Returns:
        Family report, members in ``s`` order
    """
    from .mass import mass_aspect, normalize, predicted_mass_drop

    base = family.base
    n = base.dim
    t = base.t
    fit_args = {"window": fit_window, "max_drift": max_drift, "atol": fit_atol}
    mu_base = mass_aspect(base, **fit_args).mu
    v_n = family.yamabe.v_n
    degenerate = abs(v_n) <= fit_atol
    outer = t >= family.cutoff.t1
    annulus = (t > family.cutoff.t0) & (t < family.cutoff.t1)
    base_general = base.to_general()

    def check(index: int) -> MemberReport:
        s = family.s_values[index]
        g_s, h_s = family.members[index], family.conformal[index]
        mu_s = mass_aspect(normalize(g_s), **fit_args).mu
        mu_h = mass_aspect(normalize(h_s), **fit_args).mu
        predicted = predicted_mass_drop(n, s, v_n)
        measured = mu_s - mu_base
        rel_err = abs(measured - predicted) / abs(predicted) if predicted != 0.0 else abs(measured)
        if degenerate:
            clause = MassClause.DEGENERATE
        elif measured < 0.0 and measured <= predicted * (1.0 - mass_rtol):
            clause = MassClause.PASS
        else:
            clause = MassClause.FAIL

        plus = scalar_curvature(g_s).plus
        if np.any(annulus):
            j = np.flatnonzero(annulus)[int(np.argmin(plus[annulus]))]
            annulus_t, annulus_min = float(t[j]), float(plus[j])
        else:
            annulus_t, annulus_min = float("nan"), float("nan")
        equal = bool(
            np.array_equal(g_s.p[outer], base_general.p[outer])
            and np.array_equal(g_s.q[outer], base_general.q[outer])
        )
        report = MemberReport(
            s=s,
            mu_base=mu_base,
            mu_s=mu_s,
            mu_conformal=mu_h,
            predicted_drop=predicted,
            measured_drop=measured,
            rel_err=rel_err,
            mass_clause=clause,
            minR_plus=float(plus.min()),
            annulus_min_t=annulus_t,
            annulus_minR_plus=annulus_min,
            equality_region_ok=equal,
            deviation=_deviation(base.grid, g_s, base),
            superharmonic_extent=superharmonic_extent(base, family.yamabe.factor(s)),
            curvature=plus,
            curvature_ok=bool(plus.min() >= -tol),
        )
        if not report.passed:
            logger.warning("Family member s=%g violates %s", s, ", ".join(report.violations))
        return report

    members = _map(check, list(range(len(family.s_values))), workers)
    return FamilyReport(degenerate, family.cutoff, members)


__all__ = [
    "CutoffSpec",
    "DeformedFamily",
    "FamilyReport",
    "MassClause",
    "MemberReport",
    "build_family",
    "conformal_multiply",
    "glue",
    "member_deviations",
    "superharmonic_extent",
    "verify_family",
]
