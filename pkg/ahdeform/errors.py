"""
Exception types raised by ahdeform.

Each error also derives from the closest builtin so callers can catch either
the specific type or ``ValueError``/``RuntimeError``.
"""

from __future__ import annotations


class AHDeformError(Exception):
    """Base class for all ahdeform errors."""


class DimensionError(AHDeformError, ValueError):
    """Dimension outside the supported range 3..7."""


class InvalidGridError(AHDeformError, ValueError):
    """Radial grid nodes are empty, unordered, non-positive or not geometric."""


class GridTooCoarseError(AHDeformError, ValueError):
    """Grid has too few nodes for the requested stencil or fit."""


class ProfileError(AHDeformError, ValueError):
    """Profile samples are non-positive or live on a different grid."""


class ExtrapolationError(AHDeformError, ValueError):
    """Resampling target reaches outside the source grid."""


class SupportError(AHDeformError, ValueError):
    """Perturbation support does not lie strictly inside the grid."""


class HorizonError(AHDeformError, ValueError):
    """Grid reaches the coordinate image of the horizon."""


class IntegrationError(AHDeformError, RuntimeError):
    """A quadrature or ODE integration did not converge."""


class HypothesisError(AHDeformError, ValueError):
    """Scalar curvature is below -n(n-1) beyond tolerance."""


class NewtonDivergenceError(AHDeformError, RuntimeError):
    """Newton iteration failed to reach the residual tolerance."""

    def __init__(self, message: str, last_residual: float):
        super().__init__(message)
        self.last_residual = last_residual


class PositivityLossError(AHDeformError, RuntimeError):
    """An iterate or conformal factor reached 1 + v <= 0."""


class FitUnstableError(AHDeformError, RuntimeError):
    """Full-window and half-window coefficient estimates disagree."""

    def __init__(self, message: str, full: float, half: float):
        super().__init__(message)
        self.full = full
        self.half = half


class AsymptoticMismatchError(AHDeformError, ValueError):
    """Radial coefficient is not asymptotic to sinh^-2(t) at the boundary."""


class CutoffError(AHDeformError, ValueError):
    """Cutoff edges violate 0 < t0 < t1 < t_omega."""


class WindowError(AHDeformError, ValueError):
    """Analysis window is too small or touches the grid edge."""


class ConfigError(AHDeformError, ValueError):
    """Run configuration failed validation."""


class DomainError(AHDeformError, ValueError):
    """Argument outside the domain of a closed-form function."""
