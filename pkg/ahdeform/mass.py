"""
Normal form and mass aspect.

``normalize`` finds the coordinate ``tau`` in which a radial metric
``p dt^2 + q h0`` reads ``sinh^-2(tau) (dtau^2 + a(tau) h0)``:

    log tanh(tau/2) = log tanh(t/2) + I(t),   I(t) = int_0^t (sqrt(P) - 1) / sinh,

with ``P = p sinh^2(t)``. Only the difference from the hyperbolic coordinate
is integrated, so the ``tau ~ t`` matching at the boundary costs no digits.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.special import gamma

from .deform import conformal_multiply
from .errors import AsymptoticMismatchError, IntegrationError, ProfileError
from .fitting import DEFAULT_ATOL, DEFAULT_DRIFT, DEFAULT_WINDOW, FitResult, fit_leading
from .geometry import GeneralProfile, MetricProfile, RadialGrid, RadialMetric
from .report_types import ExpansionDict, LemmaDict, MassDict
from .yamabe import YamabeSolution

logger = logging.getLogger(__name__)

ASYMPTOTIC_TOL = 1e-4


def sphere_area(n: int) -> float:
    """Area of the round unit ``(n-1)``-sphere, ``2 pi^(n/2) / Gamma(n/2)``."""
    return float(2.0 * np.pi ** (n / 2.0) / gamma(n / 2.0))


def predicted_mass_drop(n: int, s: float, v_n: float) -> float:
    """
    Closed-form change ``mu(h_s) - mu(g) = 4(n-1)(n+1) s v_n / (n(n-2))``.

    For ``n = 3`` this is ``32 s v_n / 3``.
    """
    return 4.0 * (n - 1) * (n + 1) * s * v_n / (n * (n - 2))


@dataclass(frozen=True, eq=False)
class Normalization:
    """Normal-form profile with the coordinate change that produced it."""

    profile: MetricProfile
    t: np.ndarray
    tau: np.ndarray
    shift: np.ndarray
    """``I(t) = log tanh(tau/2) - log tanh(t/2)``"""

    log_ratio: np.ndarray
    """``log(sinh(tau) / sinh(t))``"""


def _shift_integral(grid: RadialGrid, big_p: np.ndarray, n: int) -> np.ndarray:
    t = grid.nodes
    integrand = np.expm1(0.5 * np.log(big_p)) / np.sinh(t)
    # integrate in x = log t; the piece below t_min behaves like t^n
    spline = make_interp_spline(grid.x, integrand * t, k=5).antiderivative()
    head = integrand[0] * t[0] / n
    return head + spline(grid.x) - spline(grid.x[0])


def normalize_with_coordinates(
    metric: GeneralProfile, asymptotic_tol: float = ASYMPTOTIC_TOL
) -> Normalization:
    """
    Bring a general radial metric to normal form and keep the coordinate map.

    Args:
        metric: Radial metric with ``p, q ~ sinh^-2(t)`` at the boundary
        asymptotic_tol: Largest accepted ``|P - 1|`` and ``|Q - 1|`` at the first node

    Returns:
        Normalization on a fresh geometric grid with the same node count

    Raises:
        AsymptoticMismatchError: If ``p sinh^2`` or ``q sinh^2`` does not tend to 1
        IntegrationError: If the new coordinate is not increasing
    """
    n = metric.dim
    grid = metric.grid
    big_p, big_q = metric.scaled()
    for name, arr in (("p", big_p), ("q", big_q)):
        if abs(arr[0] - 1.0) > asymptotic_tol:
            raise AsymptoticMismatchError(
                f"{name}(t) sinh^2(t) = {arr[0]:.6g} at t={grid.t_min:g}; expected 1 at the boundary"
            )
    t = grid.nodes
    shift = _shift_integral(grid, big_p, n)
    if not np.all(np.isfinite(shift)):
        raise IntegrationError("Coordinate shift integral is not finite")

    half = np.tanh(t / 2.0)
    rel = half**2 * np.expm1(2.0 * shift) / (1.0 - half**2)
    if np.any(rel >= 1.0):
        raise IntegrationError("New coordinate reaches infinity inside the grid")
    tau = 2.0 * np.arctanh(half * np.exp(shift))
    if np.any(np.diff(tau) <= 0.0):
        raise IntegrationError("New coordinate is not strictly increasing")
    # sinh(tau) / sinh(t) = e^I / (1 - rel)
    log_ratio = shift - np.log1p(-rel)
    a_tau = big_q * np.exp(2.0 * log_ratio)

    new_grid = RadialGrid(float(tau[0]), float(tau[-1]), grid.base_intervals, grid.level)
    if np.all(shift == 0.0):
        a_new = a_tau
    else:
        a_new = make_interp_spline(np.log(tau), a_tau, k=5)(new_grid.x)
        a_new[0], a_new[-1] = a_tau[0], a_tau[-1]
    profile = MetricProfile(n, new_grid, a_new, f"normalized({metric.meta})")
    return Normalization(profile, t, tau, shift, log_ratio)


def normalize(metric: GeneralProfile, asymptotic_tol: float = ASYMPTOTIC_TOL) -> MetricProfile:
    """
    Normal form ``sinh^-2(tau) (dtau^2 + a(tau) h0)`` of a general radial metric.

    Example:
        h = conformal_multiply(base, solution.factor(0.1))
        report = mass_aspect(normalize(h))
    """
    return normalize_with_coordinates(metric, asymptotic_tol).profile


@dataclass(frozen=True)
class MassReport:
    """Mass aspect ``mu = (n-1) gamma_bar`` and total mass of a normal-form metric."""

    mu: float
    gamma_bar: float
    total_mass: float
    fit: FitResult

    def to_dict(self) -> MassDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "mu": self.mu,
            "gamma_bar": self.gamma_bar,
            "total_mass": self.total_mass,
            "fit": self.fit.to_dict(),
        }


def mass_aspect(
    metric: MetricProfile,
    window: tuple[float, float] = DEFAULT_WINDOW,
    max_drift: float = DEFAULT_DRIFT,
    atol: float = DEFAULT_ATOL,
) -> MassReport:
    """
    Fit ``a(t) = 1 + gamma_bar t^n + c t^(n+1)`` and return the mass aspect.

    Raises:
        ProfileError: If ``metric`` is not in normal form
        FitUnstableError: If the half-window estimate drifts too far
    """
    if not isinstance(metric, MetricProfile):
        raise ProfileError("Mass aspect needs a normal-form profile; call normalize() first")
    n = metric.dim
    fit = fit_leading(metric.t, metric.a - 1.0, n, window, max_drift, atol)
    mu = (n - 1) * fit.coefficient
    return MassReport(mu, fit.coefficient, mu * sphere_area(n), fit)


@dataclass(frozen=True)
class Expansion:
    """Measured and closed-form ``tau^n`` coefficients of one expansion."""

    name: str
    measured: float
    predicted: float

    @property
    def rel_err(self) -> float:
        if self.predicted == 0.0:
            return abs(self.measured)
        return abs(self.measured - self.predicted) / abs(self.predicted)

    def to_dict(self) -> ExpansionDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "name": self.name,
            "measured": self.measured,
            "predicted": self.predicted,
            "rel_err": self.rel_err,
        }


def lemma_expansions(
    base: MetricProfile,
    yamabe: YamabeSolution,
    s: float,
    window: tuple[float, float] = DEFAULT_WINDOW,
) -> list[Expansion]:
    """
    Leading ``tau^n`` coefficients of the coordinate change to normal form.

    With ``k = 2 s v_n / (n(n-2))`` the closed forms are
    ``sinh^-2(t) / sinh^-2(tau) - 1 ~ 2k tau^n``,
    ``u_s^(4/(n-2)) - 1 ~ 4 s v_n / (n-2) tau^n`` and
    ``(dt/dtau)^2 - 1 ~ -2(n+1) k tau^n``. Measured values use three-term fits.
    """
    n = base.dim
    u = yamabe.factor(s)
    h_s = conformal_multiply(base, u)
    norm = normalize_with_coordinates(h_s)
    tau = norm.tau
    log_w = 4.0 / (n - 2) * np.log1p(s * yamabe.v)
    k = 2.0 * s * yamabe.v_n / (n * (n - 2))
    samples = [
        ("sinh_ratio", np.expm1(2.0 * norm.log_ratio), 2.0 * k),
        ("conformal_factor", np.expm1(log_w), 4.0 * s * yamabe.v_n / (n - 2)),
        ("radial_stretch", np.expm1(-log_w - 2.0 * norm.log_ratio), -2.0 * (n + 1) * k),
    ]
    out = []
    for name, values, predicted in samples:
        fit = fit_leading(tau, values, n, window, max_drift=1.0, atol=0.0, terms=3)
        out.append(Expansion(name, fit.coefficient, predicted))
    return out


@dataclass(frozen=True)
class LemmaReport:
    """Measured and predicted mass aspect of ``h_s``."""

    s: float
    v_n: float
    mu_base: float
    mu_conformal: float
    predicted_drop: float
    expansions: tuple[Expansion, ...] = ()

    @property
    def measured_drop(self) -> float:
        return self.mu_conformal - self.mu_base

    @property
    def abs_err(self) -> float:
        return abs(self.measured_drop - self.predicted_drop)

    @property
    def rel_err(self) -> float:
        if self.predicted_drop == 0.0:
            return self.abs_err
        return self.abs_err / abs(self.predicted_drop)

    def to_dict(self) -> LemmaDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "s": self.s,
            "v_n": self.v_n,
            "mu_base": self.mu_base,
            "mu_conformal": self.mu_conformal,
            "predicted_drop": self.predicted_drop,
            "measured_drop": self.measured_drop,
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "expansions": [e.to_dict() for e in self.expansions],
        }


def check_lemma_coefficients(
    base: MetricProfile,
    yamabe: YamabeSolution,
    s: float,
    *,
    window: tuple[float, float] = DEFAULT_WINDOW,
    max_drift: float = DEFAULT_DRIFT,
    atol: float = DEFAULT_ATOL,
    expansions: bool = True,
) -> LemmaReport:
    """
    Compare ``mu(normalize(u_s^(4/(n-2)) g))`` with the closed-form mass drop.

    Args:
        base: Normal-form base metric
        yamabe: Correction on the base grid
        s: Deformation parameter
        window: Fit window
        max_drift: Fit stability threshold
        atol: Absolute floor of the fit stability check
        expansions: Also measure the three coordinate-change coefficients

    Returns:
        Report with absolute and relative discrepancy
    """
    if yamabe.grid != base.grid:
        raise ProfileError("Yamabe solution and base metric live on different grids")
    mu_base = mass_aspect(base, window, max_drift, atol).mu
    h_s = conformal_multiply(base, yamabe.factor(s))
    mu_h = mass_aspect(normalize(h_s), window, max_drift, atol).mu
    extra = tuple(lemma_expansions(base, yamabe, s, window)) if expansions and yamabe.v_n != 0.0 else ()
    report = LemmaReport(s, yamabe.v_n, mu_base, mu_h, predicted_mass_drop(base.dim, s, yamabe.v_n), extra)
    logger.info(
        "Mass drop at s=%g: measured %.10g, predicted %.10g (rel err %.3g)",
        s,
        report.measured_drop,
        report.predicted_drop,
        report.rel_err,
    )
    return report


def general_mass(
    metric: RadialMetric,
    window: tuple[float, float] = DEFAULT_WINDOW,
    max_drift: float = DEFAULT_DRIFT,
    atol: float = DEFAULT_ATOL,
) -> MassReport:
    """Mass aspect of either profile type, normalizing general profiles first."""
    if isinstance(metric, GeneralProfile):
        metric = normalize(metric)
    return mass_aspect(metric, window, max_drift, atol)


__all__ = [
    "Expansion",
    "LemmaReport",
    "MassReport",
    "Normalization",
    "check_lemma_coefficients",
    "general_mass",
    "lemma_expansions",
    "mass_aspect",
    "normalize",
    "normalize_with_coordinates",
    "predicted_mass_drop",
    "sphere_area",
]
