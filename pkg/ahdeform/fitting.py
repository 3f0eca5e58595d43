"""
Leading-coefficient fits near the conformal boundary.

One fitter serves both the decay coefficient of a conformal correction and
the ``t^n`` coefficient of a normal-form profile, so both carry the same error
characteristics.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial

from .errors import FitUnstableError, GridTooCoarseError, WindowError
from .report_types import FitDict

logger = logging.getLogger(__name__)

MIN_FIT_NODES = 8
DEFAULT_WINDOW = (0.01, 0.1)
DEFAULT_DRIFT = 0.1
DEFAULT_ATOL = 1e-6


@dataclass(frozen=True)
class FitResult:
    """Two-term fit ``c0 t^n + c1 t^(n+1)`` with its half-window repeat."""

    coefficient: float
    correction: float
    half_window_coefficient: float
    drift: float
    window: tuple[float, float]
    nodes: int
    residual: float

    def to_dict(self) -> FitDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "window": [self.window[0], self.window[1]],
            "nodes": self.nodes,
            "coefficient": self.coefficient,
            "correction": self.correction,
            "half_window_coefficient": self.half_window_coefficient,
            "drift": self.drift,
            "residual": self.residual,
        }


def _select(t: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    lo, hi = window
    if not 0.0 < lo < hi:
        raise WindowError(f"Fit window must satisfy 0 < lo < hi, got {window}")
    if lo < t[0] * (1.0 - 1e-12) or hi > t[-1] * (1.0 + 1e-12):
        raise WindowError(f"Fit window {window} leaves the grid span [{t[0]}, {t[-1]}]")
    mask = (t >= lo * (1.0 - 1e-12)) & (t <= hi * (1.0 + 1e-12))
    return np.flatnonzero(mask)


def _fit(t: np.ndarray, y: np.ndarray, n: int, terms: int) -> tuple[float, float, float]:
    # y / t^n = c0 + c1 t + ..., fitted with equal relative weight across the window
    scaled = y / t**n
    coef = polynomial.polyfit(t, scaled, terms - 1)
    resid = scaled - polynomial.polyval(t, coef)
    return float(coef[0]), float(coef[1]), float(np.max(np.abs(resid * t**n)))


def fit_leading(
    t: np.ndarray,
    values: np.ndarray,
    n: int,
    window: tuple[float, float] = DEFAULT_WINDOW,
    max_drift: float = DEFAULT_DRIFT,
    atol: float = DEFAULT_ATOL,
    terms: int = 2,
) -> FitResult:
    """
    Fit ``values ~ c0 t^n + c1 t^(n+1)`` on the smallest-``t`` window.

    The fit is repeated on the lower half of the window nodes; the relative
    disagreement is the drift.

    Args:
        t: Grid nodes
        values: Samples decaying like ``t^n``
        n: Leading power
        window: ``(lo, hi)`` fit window in ``t``
        max_drift: Largest relative drift accepted
        atol: Absolute floor below which estimates count as zero
        terms: Number of powers ``t^n, ..., t^(n+terms-1)`` in the model

    Returns:
        Fit result with ``coefficient = c0``

    Raises:
        GridTooCoarseError: If fewer than 8 nodes fall in the window
        WindowError: If the window leaves the grid
        FitUnstableError: If the half-window estimate drifts too far
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    idx = _select(t, window)
    if idx.size < MIN_FIT_NODES:
        raise GridTooCoarseError(
            f"Fit window {window} holds {idx.size} nodes; at least {MIN_FIT_NODES} are needed"
        )
    tw, yw = t[idx], values[idx]
    c0, c1, resid = _fit(tw, yw, n, terms)
    half = max(idx.size // 2 + 1, terms + 2)
    h0, _, _ = _fit(tw[:half], yw[:half], n, terms)

    diff = abs(c0 - h0)
    scale = max(abs(c0), abs(h0))
    drift = diff / scale if scale > atol else 0.0
    if diff > max_drift * scale + atol:
        raise FitUnstableError(
            f"Leading coefficient drifts by {drift:.3g} between full window ({c0:.10g}) and "
            f"half window ({h0:.10g}); refine the grid or move the fit window",
            c0,
            h0,
        )
    logger.debug("t^%d fit on %s: c0=%.12g half=%.12g drift=%.3g", n, window, c0, h0, drift)
    return FitResult(c0, c1, h0, drift, (float(tw[0]), float(tw[-1])), int(idx.size), resid)


def decay_exponent(
    t: np.ndarray,
    values: np.ndarray,
    window: tuple[float, float] = DEFAULT_WINDOW,
    atol: float = 0.0,
) -> float:
    """
    Log-log slope of ``|values|`` against ``t`` over a window.

    Samples with ``|values| <= atol`` are ignored. Returns ``inf`` when fewer
    than two samples remain.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    idx = _select(t, window)
    mag = np.abs(values[idx])
    keep = mag > atol
    if np.count_nonzero(keep) < 2:
        return float("inf")
    slope, _ = np.polyfit(np.log(t[idx][keep]), np.log(mag[keep]), 1)
    return float(slope)
