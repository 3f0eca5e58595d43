"""
Spherically symmetric asymptotically hyperbolic metrics.

A ``MetricProfile`` encodes the normal form
``g = sinh^-2(t) (dt^2 + a(t) h0)`` where ``h0`` is the round metric on the
unit sphere; a ``GeneralProfile`` encodes ``p(t) dt^2 + q(t) h0`` before it has
been brought back to normal form.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Any, Union

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import make_interp_spline

from .errors import (
    DimensionError,
    ExtrapolationError,
    HorizonError,
    IntegrationError,
    InvalidGridError,
    ProfileError,
    SupportError,
)
from .report_types import ProfileDict

logger = logging.getLogger(__name__)

DIM_MIN = 3
DIM_MAX = 7
PROFILE_VERSION = 1


def check_dim(n: int) -> int:
    """
    Validate a manifold dimension.

    Args:
        n: Dimension of the manifold

    Returns:
        The dimension, unchanged

    Raises:
        DimensionError: If ``n`` is not an integer in ``[3, 7]``
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DimensionError(f"Dimension must be an integer, got {n!r}")
    if not DIM_MIN <= n <= DIM_MAX:
        raise DimensionError(f"Dimension must satisfy {DIM_MIN} <= n <= {DIM_MAX}, got {n}")
    return int(n)


def _readonly(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RadialGrid:
    """
    Geometric radial grid on ``[t_min, t_max]``.

    Nodes are uniform in ``x = log(t)``, so spacing in ``t`` is proportional to
    ``t`` and the ``O(t^n)`` behaviour at the conformal boundary is resolved.
    Level ``L`` has ``base_intervals * 2**L`` intervals, so every node of a
    level is also a node of the next one.
    """

    t_min: float
    t_max: float
    base_intervals: int = 64
    level: int = 0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.t_min) and np.isfinite(self.t_max)):
            raise InvalidGridError("Grid bounds must be finite")
        if self.t_min <= 0.0:
            raise InvalidGridError(f"Grid nodes must be strictly positive, got t_min={self.t_min}")
        if self.t_max <= self.t_min:
            raise InvalidGridError(
                f"Grid must be strictly increasing, got t_min={self.t_min} >= t_max={self.t_max}"
            )
        if self.base_intervals < 1 or self.level < 0:
            raise InvalidGridError(
                f"Invalid grid resolution: base_intervals={self.base_intervals}, level={self.level}"
            )

    @classmethod
    def from_nodes(cls, nodes: Any, level: int = 0) -> RadialGrid:
        """
        Rebuild a grid from explicit nodes (e.g. read from a profile file).

        Args:
            nodes: Strictly increasing, positive, geometrically spaced nodes
            level: Refinement level to record

        Raises:
            InvalidGridError: If the nodes are not a geometric grid
        """
        t = np.asarray(nodes, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise InvalidGridError("Grid needs at least two nodes")
        if np.any(t <= 0.0):
            raise InvalidGridError("Grid nodes must be strictly positive")
        steps = np.diff(np.log(t))
        if np.any(steps <= 0.0):
            raise InvalidGridError("Grid nodes must be strictly increasing")
        if np.max(np.abs(steps - steps.mean())) > 1e-9 * max(1.0, abs(steps.mean())):
            raise InvalidGridError("Grid nodes must be geometrically spaced")
        intervals = t.size - 1
        base = intervals >> level
        if base << level != intervals:
            raise InvalidGridError(f"{intervals} intervals is not compatible with level {level}")
        return cls(float(t[0]), float(t[-1]), base, level)

    @property
    def intervals(self) -> int:
        return self.base_intervals * 2**self.level

    @property
    def size(self) -> int:
        return self.intervals + 1

    @property
    def spacing(self) -> float:
        """Uniform spacing in ``x = log(t)``."""
        return (np.log(self.t_max) - np.log(self.t_min)) / self.intervals

    @property
    def x(self) -> np.ndarray:
        return np.linspace(np.log(self.t_min), np.log(self.t_max), self.size)

    @property
    def nodes(self) -> np.ndarray:
        t = np.exp(self.x)
        t[0] = self.t_min
        t[-1] = self.t_max
        return t

    def refine(self) -> RadialGrid:
        """Return the next refinement level (spacing halved)."""
        return RadialGrid(self.t_min, self.t_max, self.base_intervals, self.level + 1)

    def at_level(self, level: int) -> RadialGrid:
        return RadialGrid(self.t_min, self.t_max, self.base_intervals, level)

    def covers(self, other: RadialGrid) -> bool:
        """True if ``other`` lies within this grid's span."""
        slack = 1e-12 * self.t_max
        return other.t_min >= self.t_min - slack and other.t_max <= self.t_max + slack


@dataclass(frozen=True, eq=False)
class MetricProfile:
    """Normal-form metric ``sinh^-2(t) (dt^2 + a(t) h0)``."""

    dim: int
    grid: RadialGrid
    a: np.ndarray
    meta: str = ""

    def __post_init__(self) -> None:
        check_dim(self.dim)
        a = _readonly(self.a)
        if a.shape != (self.grid.size,):
            raise ProfileError(f"Profile has {a.size} samples for a grid of {self.grid.size} nodes")
        if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
            raise ProfileError("Angular profile a(t) must be positive and finite at every node")
        object.__setattr__(self, "a", a)

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def p(self) -> np.ndarray:
        return 1.0 / np.sinh(self.t) ** 2

    @property
    def q(self) -> np.ndarray:
        return self.a / np.sinh(self.t) ** 2

    def scaled(self) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients ``(P, Q) = (p, q) * sinh^2(t)``; exactly ``(1, a)`` here."""
        return np.ones_like(self.a), self.a

    def to_general(self) -> GeneralProfile:
        return GeneralProfile(self.dim, self.grid, self.p, self.q, self.meta)

    def to_dict(self) -> ProfileDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "version": PROFILE_VERSION,
            "kind": "metric",
            "n": self.dim,
            "level": self.grid.level,
            "nodes": self.t.tolist(),
            "a": self.a.tolist(),
            "meta": self.meta,
        }


@dataclass(frozen=True, eq=False)
class GeneralProfile:
    """Radial metric ``p(t) dt^2 + q(t) h0`` with ``p, q ~ sinh^-2(t)`` at infinity."""

    dim: int
    grid: RadialGrid
    p: np.ndarray
    q: np.ndarray
    meta: str = ""

    def __post_init__(self) -> None:
        check_dim(self.dim)
        p, q = _readonly(self.p), _readonly(self.q)
        for name, arr in (("p", p), ("q", q)):
            if arr.shape != (self.grid.size,):
                raise ProfileError(
                    f"Coefficient {name} has {arr.size} samples for a grid of {self.grid.size} nodes"
                )
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
                raise ProfileError(f"Coefficient {name}(t) must be positive and finite at every node")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    def scaled(self) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients ``(P, Q) = (p, q) * sinh^2(t)``."""
        s2 = np.sinh(self.t) ** 2
        return self.p * s2, self.q * s2

    def to_dict(self) -> ProfileDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "version": PROFILE_VERSION,
            "kind": "general",
            "n": self.dim,
            "level": self.grid.level,
            "nodes": self.t.tolist(),
            "p": self.p.tolist(),
            "q": self.q.tolist(),
            "meta": self.meta,
        }


RadialMetric = Union[MetricProfile, GeneralProfile]


def profile_from_dict(data: dict[str, Any]) -> RadialMetric:
    """
    Rebuild a profile from its JSON document.

    Raises:
        ProfileError: On an unknown version or kind, or missing fields
    """
    if data.get("version") != PROFILE_VERSION:
        raise ProfileError(f"Unsupported profile version: {data.get('version')!r}")
    try:
        grid = RadialGrid.from_nodes(data["nodes"], int(data.get("level", 0)))
        n = data["n"]
        meta = str(data.get("meta", ""))
        kind = data.get("kind", "metric" if "a" in data else "general")
        if kind == "metric":
            return MetricProfile(n, grid, np.asarray(data["a"], dtype=float), meta)
        if kind == "general":
            p = np.asarray(data["p"], dtype=float)
            q = np.asarray(data["q"], dtype=float)
            return GeneralProfile(n, grid, p, q, meta)
    except KeyError as e:
        raise ProfileError(f"Profile document is missing field {e}") from e
    raise ProfileError(f"Unknown profile kind: {kind!r}")


def area_radius(metric: RadialMetric) -> np.ndarray:
    """Radius of the round sphere with the area of each coordinate sphere."""
    return np.sqrt(metric.q)


# Shape functions. Both are fixed once; fixtures depend on them bit for bit.


def bump(x: Any) -> np.ndarray:
    """
    Standard C-infinity bump ``exp(1 - 1/(1 - x^2))`` on ``|x| < 1``, zero outside.

    Normalized to peak value 1 at ``x = 0``.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi))
    return out


def _flat(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    pos = x > 0.0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(x: Any) -> np.ndarray:
    """
    C-infinity monotone step: 0 for ``x <= 0``, 1 for ``x >= 1``.

    ``f(x) / (f(x) + f(1 - x))`` with ``f(x) = exp(-1/x)`` for ``x > 0``.
    """
    x = np.asarray(x, dtype=float)
    left = _flat(x)
    right = _flat(1.0 - x)
    return left / (left + right)


# Generators


def make_hyperbolic(n: int, grid: RadialGrid) -> MetricProfile:
    """
    Hyperbolic space in normal form (``a == 1``).

    Args:
        n: Dimension
        grid: Radial grid

    Returns:
        The model profile
    """
    return MetricProfile(check_dim(n), grid, np.ones(grid.size), meta=f"hyperbolic(n={n})")


def _lapse_squared(r: Any, n: int, m: float) -> Any:
    return 1.0 + r * r - 2.0 * m * r ** (2 - n)


def horizon_radius(n: int, m: float) -> float:
    """Largest root of ``V(r) = 1 + r^2 - 2m r^(2-n)``."""
    check_dim(n)
    if m <= 0.0:
        raise ProfileError(f"Mass parameter must be positive, got m={m}")
    upper = max(1.0, (2.0 * m) ** (1.0 / n)) + 1.0
    return float(optimize.brentq(lambda r: r ** (n - 2) + r**n - 2.0 * m, 0.0, upper, xtol=1e-15))


def _quad(func: Any, lo: float, hi: float) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(func, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)
        except integrate.IntegrationWarning as e:
            raise IntegrationError(f"Coordinate integral on [{lo}, {hi}] did not converge: {e}") from e
    return float(value)


def horizon_coordinate(n: int, m: float) -> float:
    """
    Normal-form coordinate ``t_h`` of the AdS-Schwarzschild horizon.

    Uses ``log tanh(t/2) = -arsinh(r) + int_r^inf (V^-1/2 - (1 + r^2)^-1/2) dr``,
    which is the coordinate change ``dt/dr = -sinh(t) V^-1/2`` with ``t ~ 1/r``
    at infinity. The square-root endpoint singularity is removed with
    ``r = r_h + y^2``.

    Returns ``inf`` for small masses, where the whole chart ``0 < t < inf``
    stays outside the horizon.
    """
    r_h = horizon_radius(n, m)
    dv = 2.0 * r_h + 2.0 * (n - 2) * m * r_h ** (1 - n)
    d2v = 2.0 - 2.0 * (n - 2) * (n - 1) * m * r_h ** (-n)
    split = 2.0 * r_h + 1.0

    def near(y: float) -> float:
        r = r_h + y * y
        if y < 1e-4:
            ratio = dv + 0.5 * d2v * y * y
        else:
            ratio = _lapse_squared(r, n, m) / (y * y)
        return 2.0 / np.sqrt(ratio) - 2.0 * y / np.sqrt(1.0 + r * r)

    def far(r: float) -> float:
        return 1.0 / np.sqrt(_lapse_squared(r, n, m)) - 1.0 / np.sqrt(1.0 + r * r)

    defect = _quad(near, 0.0, np.sqrt(split - r_h)) + _quad(far, split, np.inf)
    log_half = defect - np.arcsinh(r_h)
    if log_half >= 0.0:
        return float("inf")
    return float(2.0 * np.arctanh(np.exp(log_half)))


def _outer_deviation(n: int, m: float, t: np.ndarray) -> np.ndarray:
    # e = r sinh(t) - 1 solves a regular ODE with e(0) = 0; rationalized so
    # that no O(1) terms cancel near the boundary.
    def rhs(tt: float, y: np.ndarray) -> np.ndarray:
        e = y[0]
        w = 1.0 + e
        s, c = np.sinh(tt), np.cosh(tt)
        rad = max(s * s + w * w - 2.0 * m * w ** (2 - n) * s**n, 0.0)
        num = s * (e * (2.0 + e) + 2.0 * m * w ** (2 - n) * s ** (n - 2))
        return np.array([num / (w * c + np.sqrt(rad))])

    sol = integrate.solve_ivp(
        rhs, (0.0, float(t[-1])), [0.0], method="DOP853", t_eval=t, rtol=1e-12, atol=1e-16
    )
    if not sol.success:
        raise IntegrationError(f"Coordinate integration failed: {sol.message}")
    return np.asarray(sol.y[0])


def _bridge_radius(n: int, m: float, t: np.ndarray, t_h: float) -> np.ndarray:
    # Signed arclength from the neck; r(l) is even and solves r'' = V'(r)/2.
    r_h = horizon_radius(n, m)
    ell = np.abs(np.log(np.tanh(t / 2.0)) - np.log(np.tanh(t_h / 2.0)))

    def rhs(_: float, y: np.ndarray) -> np.ndarray:
        r = y[0]
        return np.array([y[1], r + (n - 2) * m * r ** (1 - n)])

    sol = integrate.solve_ivp(
        rhs,
        (0.0, float(ell.max())),
        [r_h, 0.0],
        method="DOP853",
        dense_output=True,
        rtol=1e-13,
        atol=1e-13,
    )
    if not sol.success:
        raise IntegrationError(f"Neck integration failed: {sol.message}")
    return np.asarray(sol.sol(ell)[0])


def make_ads_schwarzschild(
    n: int, m: float, grid: RadialGrid, through_horizon: bool = False
) -> MetricProfile:
    """
    AdS-Schwarzschild slice ``dr^2/V + r^2 h0`` in normal form.

    Args:
        n: Dimension
        m: Mass parameter (positive)
        grid: Radial grid; must end before the horizon unless ``through_horizon``
        through_horizon: Continue through the minimal neck at ``r = r_h`` onto
            the far side of the Einstein-Rosen bridge

    Returns:
        Profile with ``a(t) = r(t)^2 sinh^2(t)``

    Raises:
        HorizonError: If the grid reaches the horizon and ``through_horizon`` is off,
            or ``through_horizon`` is set but the chart never reaches the horizon
        IntegrationError: If the coordinate integration fails
    """
    check_dim(n)
    t_h = horizon_coordinate(n, m)
    t = grid.nodes
    if through_horizon:
        if not np.isfinite(t_h):
            raise HorizonError(
                f"The normal-form chart never reaches the horizon for m={m}; "
                "there is no neck to continue through"
            )
        r = _bridge_radius(n, m, t, t_h)
        a = (r * np.sinh(t)) ** 2
        meta = f"ads_schwarzschild(n={n}, m={m}, through_horizon)"
    else:
        if grid.t_max >= t_h:
            raise HorizonError(
                f"Grid extends past the horizon: t_max={grid.t_max} >= t_h={t_h:.12g} "
                f"(r_h={horizon_radius(n, m):.12g})"
            )
        e = _outer_deviation(n, m, t)
        a = 1.0 + e * (2.0 + e)
        meta = f"ads_schwarzschild(n={n}, m={m})"
    logger.debug("AdS-Schwarzschild profile n=%d m=%g t_h=%.12g", n, m, t_h)
    return MetricProfile(n, grid, a, meta)


def make_bumped(
    base: MetricProfile, center: float, width: float, amplitude: float
) -> MetricProfile:
    """
    Multiply ``a(t)`` by ``1 + amplitude * bump((t - center) / width)``.

    The operation rejects nothing on curvature grounds; check the result with
    ``curvature.scalar_curvature``. On hyperbolic space any such perturbation
    produces curvature on both sides of ``-n(n-1)``.

    Raises:
        SupportError: If ``[center - width, center + width]`` is not strictly
            inside the grid
    """
    if width <= 0.0:
        raise SupportError(f"Bump width must be positive, got {width}")
    lo, hi = center - width, center + width
    if not (base.grid.t_min < lo and hi < base.grid.t_max):
        raise SupportError(
            f"Bump support [{lo}, {hi}] is not inside the grid ({base.grid.t_min}, {base.grid.t_max})"
        )
    if amplitude == 0.0:
        return base
    factor = 1.0 + amplitude * bump((base.t - center) / width)
    meta = f"{base.meta} * bump(c={center}, w={width}, eps={amplitude})"
    return MetricProfile(base.dim, base.grid, base.a * factor, meta)


def make_tail_perturbed(base: MetricProfile, amplitude: float, power: int) -> MetricProfile:
    """
    Multiply ``a(t)`` by ``1 + amplitude * t^power``.

    With ``power > n`` the mass aspect is unchanged and, for negative
    ``amplitude``, ``R + n(n-1) ~ (n-1) power (power - n) |amplitude| t^power``
    near infinity.

    Raises:
        ProfileError: If ``power <= n`` or the profile stops being positive
    """
    if power <= base.dim:
        raise ProfileError(f"Tail power must exceed n={base.dim}, got {power}")
    factor = 1.0 + amplitude * base.t**power
    meta = f"{base.meta} * tail(eps={amplitude}, power={power})"
    return MetricProfile(base.dim, base.grid, base.a * factor, meta)


# Resampling


def _spline(x: np.ndarray, y: np.ndarray, x_new: np.ndarray) -> np.ndarray:
    k = min(5, x.size - 1)
    if k % 2 == 0:
        k -= 1
    return np.asarray(make_interp_spline(x, y, k=k)(x_new))


def _interpolate(src: RadialGrid, values: np.ndarray, dst: RadialGrid) -> np.ndarray:
    x_src, x_dst = src.x, dst.x
    out = _spline(x_src, values, x_dst)
    # copy samples exactly where nodes coincide
    idx = np.clip(np.searchsorted(x_src, x_dst), 0, x_src.size - 1)
    for offset in (0, -1):
        j = np.clip(idx + offset, 0, x_src.size - 1)
        hit = np.abs(x_src[j] - x_dst) <= 1e-13 * np.maximum(1.0, np.abs(x_dst))
        out[hit] = values[j[hit]]
    return out


def resample(profile: RadialMetric, grid: RadialGrid) -> RadialMetric:
    """
    Interpolate a profile onto another grid (quintic spline in ``log t``).

    Args:
        profile: Source profile
        grid: Target grid within the source span

    Returns:
        Profile of the same type on ``grid``

    Raises:
        ExtrapolationError: If ``grid`` reaches outside the source span
    """
    if grid == profile.grid:
        return profile
    if not profile.grid.covers(grid):
        raise ExtrapolationError(
            f"Target grid [{grid.t_min}, {grid.t_max}] leaves source span "
            f"[{profile.grid.t_min}, {profile.grid.t_max}]"
        )
    if isinstance(profile, MetricProfile):
        a = _interpolate(profile.grid, profile.a, grid)
        return MetricProfile(profile.dim, grid, a, profile.meta)
    big_p, big_q = profile.scaled()
    s2 = np.sinh(grid.nodes) ** 2
    p = _interpolate(profile.grid, big_p, grid) / s2
    q = _interpolate(profile.grid, big_q, grid) / s2
    return GeneralProfile(profile.dim, grid, p, q, profile.meta)


__all__ = [
    "DIM_MAX",
    "DIM_MIN",
    "GeneralProfile",
    "MetricProfile",
    "RadialGrid",
    "RadialMetric",
    "area_radius",
    "bump",
    "check_dim",
    "horizon_coordinate",
    "horizon_radius",
    "make_ads_schwarzschild",
    "make_bumped",
    "make_hyperbolic",
    "make_tail_perturbed",
    "profile_from_dict",
    "resample",
    "smooth_step",
]

