"""
Type definitions for the JSON documents written by ahdeform.

Every public result type has a ``to_dict()`` returning one of these shapes,
so reports can be type-checked and consumed without importing numpy.
"""

from typing import Optional, TypedDict


class ProfileDict(TypedDict, total=False):
    """Versioned profile document."""

    version: int
    """Document format version (currently 1)"""

    kind: str
    """``"metric"`` for normal form, ``"general"`` for ``p dt^2 + q h0``"""

    n: int
    level: int
    nodes: list[float]
    a: list[float]
    p: list[float]
    q: list[float]
    meta: str
    """Provenance label"""


class CurvatureDict(TypedDict):
    """Summary of a sampled scalar curvature field."""

    level: int
    min_plus: float
    """Minimum over the grid of ``R + n(n-1)``"""

    max_plus: float
    """Maximum over the grid of ``R + n(n-1)``"""

    edge_order: int
    """Formal order of the one-sided stencils at the grid ends"""

    interior_order: int


class FitDict(TypedDict):
    """Diagnostics of a two-term ``c0 t^n + c1 t^(n+1)`` fit."""

    window: list[float]
    nodes: int
    coefficient: float
    correction: float
    half_window_coefficient: float
    drift: float
    """Relative disagreement of the full-window and half-window estimates"""

    residual: float


class YamabeDict(TypedDict):
    """Summary of a Yamabe solve."""

    v_n: float
    residual_norm: float
    iterations: int
    residual_history: list[float]
    quadratic_constant: Optional[float]
    """Largest ``r_(k+1) / r_k^2`` over the last three iterations"""

    v_min: float
    v_max: float
    fit: FitDict


class MassDict(TypedDict):
    """Mass aspect and total mass of a normal-form profile."""

    mu: float
    gamma_bar: float
    total_mass: float
    fit: FitDict


class ExpansionDict(TypedDict):
    """Leading ``tau^n`` coefficient of one change-of-variables expansion."""

    name: str
    measured: float
    predicted: float
    rel_err: float


class LemmaDict(TypedDict):
    """Measured versus predicted mass drop of the conformal metric."""

    s: float
    v_n: float
    mu_base: float
    mu_conformal: float
    predicted_drop: float
    measured_drop: float
    abs_err: float
    rel_err: float
    expansions: list[ExpansionDict]


class CutoffDict(TypedDict):
    t0: float
    t1: float
    smoothness: int


class MemberDict(TypedDict):
    """Verification record of one glued metric ``g_s``."""

    s: float
    mu_base: float
    mu_s: float
    mu_conformal: float
    predicted_drop: float
    measured_drop: float
    rel_err: float
    mass_clause: str
    """``"pass"``, ``"fail"`` or ``"degenerate-not-applicable"``"""

    minR_plus: float
    annulus_min_t: float
    annulus_minR_plus: float
    equality_region_ok: bool
    deviation: float
    """Max-node deviation ``max |g_s - g|`` over ``P``, ``Q`` and two derivatives"""

    superharmonic_extent: float
    """Largest ``t_0`` with ``-Laplacian(u_s) >= 0`` on ``(0, t_0)``"""

    violations: list[str]
    passed: bool


class FamilyDict(TypedDict):
    """Verification report of a deformed family."""

    degenerate: bool
    cutoff: CutoffDict
    deviation_constant: float
    """Largest ``deviation / s`` across the sweep"""

    drop_per_s_spread: float
    members: list[MemberDict]
    passed: bool


class StaticDict(TypedDict):
    """Radial-sector verdict of the static kernel test."""

    window: list[float]
    sector: str
    prefilter: bool
    curvature_range: float
    smallest_singular_value: float
    residual: float
    verdict: str
    candidate: Optional[list[float]]


class CrossingDict(TypedDict):
    t_star: float
    area_radius: float
    direction: str
    """``"min"`` for a neck, ``"max"`` for a belly"""

    separating: bool


class HorizonDict(TypedDict):
    crossings: list[CrossingDict]
    cmc_crossings: list[float]
    """Coordinates where a coordinate sphere has mean curvature ``n - 1``"""


class AdmissibilityDict(TypedDict):
    passed: bool
    reasons: list[str]
    minR_plus: float
    boundary_order: float
    interior_crossings: list[CrossingDict]


class ConvergenceRow(TypedDict):
    """One grid level of a convergence study."""

    quantity: str
    level: int
    intervals: int
    value: float
    error: float
    """Distance to the exact value, or to the finest level when none is known"""

    order: Optional[float]
    """Observed order against the next coarser level"""


class SkippedLevelDict(TypedDict):
    """A grid level the convergence study could not build."""

    level: int
    error: str


class RunReportDict(TypedDict, total=False):
    """Full run report document."""

    version: int
    status: str
    """``"pass"``, ``"verification-failure"`` or ``"error"``"""

    exit_code: int
    failed_stage: Optional[str]
    error: Optional[str]
    failures: list[str]
    """Verification clauses that did not hold"""

    config: dict
    stages: dict
    convergence: list[ConvergenceRow]
    skipped_levels: list[SkippedLevelDict]
