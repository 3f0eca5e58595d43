"""
Run configuration.

A run is described by one strict JSON document. Unknown keys are rejected and
every structural constraint is checked at parse time. The only environment
override is the output directory (``AHDEFORM_OUTPUT_DIR``).
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any, Literal, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "AHDEFORM_OUTPUT_DIR"

MetricKind = Literal["hyperbolic", "ads_schwarzschild", "bumped", "tail_perturbed", "file"]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MetricSpec(_Strict):
    """Which metric to build and where its core region starts."""

    kind: MetricKind
    n: int = Field(3, ge=3, le=7, description="Dimension")
    t_max: float = Field(..., gt=0.0, description="Inner end of the grid (deepest interior)")
    t_omega: float = Field(..., gt=0.0, description="Start of the core region t >= t_omega")
    m: Optional[float] = Field(None, gt=0.0, description="AdS-Schwarzschild mass parameter")
    through_horizon: bool = False
    base: Literal["hyperbolic", "ads_schwarzschild"] = Field(
        "hyperbolic", description="Base metric of the perturbed kinds"
    )
    center: Optional[float] = None
    width: Optional[float] = Field(None, gt=0.0)
    amplitude: Optional[float] = None
    power: Optional[int] = None
    path: Optional[str] = Field(None, description="Profile document for kind 'file'")

    @model_validator(mode="after")
    def _check_kind(self) -> MetricSpec:
        needs: dict[str, tuple[str, ...]] = {
            "ads_schwarzschild": ("m",),
            "bumped": ("center", "width", "amplitude"),
            "tail_perturbed": ("amplitude", "power"),
            "file": ("path",),
        }
        missing = [name for name in needs.get(self.kind, ()) if getattr(self, name) is None]
        if self.kind in ("bumped", "tail_perturbed") and self.base == "ads_schwarzschild" and self.m is None:
            missing.append("m")
        if missing:
            raise ValueError(f"metric kind '{self.kind}' requires {', '.join(missing)}")
        if self.kind == "tail_perturbed" and self.power is not None and self.power <= self.n:
            raise ValueError(f"tail power must exceed n={self.n}, got {self.power}")
        if not self.t_omega <= self.t_max:
            raise ValueError(f"t_omega={self.t_omega} must not exceed t_max={self.t_max}")
        return self


class GridSpec(_Strict):
    t_min: float = Field(1e-3, gt=0.0)
    base_intervals: int = Field(64, ge=8)
    levels: list[int] = Field(default_factory=lambda: [0, 1, 2, 3], min_length=1)

    @field_validator("levels")
    @classmethod
    def _check_levels(cls, levels: list[int]) -> list[int]:
        if any(level < 0 for level in levels):
            raise ValueError("refinement levels must be non-negative")
        if levels != sorted(set(levels)):
            raise ValueError("refinement levels must be strictly increasing")
        return levels

    @property
    def report_level(self) -> int:
        """Finest level; the one the report's stage results refer to."""
        return self.levels[-1]


class CutoffConfig(_Strict):
    t0: float = Field(..., gt=0.0)
    t1: float = Field(..., gt=0.0)


class Tolerances(_Strict):
    solver: float = Field(1e-10, gt=0.0, description="Yamabe residual max-norm")
    curvature: float = Field(1e-6, gt=0.0, description="Slack below -n(n-1)")
    fit_drift: float = Field(0.1, gt=0.0, description="Full vs half window relative drift")
    fit_atol: float = Field(1e-6, gt=0.0)
    mass_rtol: float = Field(0.01, gt=0.0, lt=1.0, description="Relative slack on the predicted drop")
    static_tol: float = Field(1e-6, gt=0.0)
    gap_tol: float = Field(1e-2, gt=0.0)

    @model_validator(mode="after")
    def _check_gap(self) -> Tolerances:
        if not self.static_tol < self.gap_tol:
            raise ValueError("static_tol must be below gap_tol")
        return self


class FitConfig(_Strict):
    window: tuple[float, float] = (0.01, 0.1)

    @field_validator("window")
    @classmethod
    def _check_window(cls, window: tuple[float, float]) -> tuple[float, float]:
        if not 0.0 < window[0] < window[1]:
            raise ValueError("fit window must satisfy 0 < lo < hi")
        return window


class OutputConfig(_Strict):
    directory: str = "ahdeform-out"
    report: str = "report.json"
    csv: bool = True


def _check_s(values: list[float]) -> list[float]:
    bad = [s for s in values if not 0.0 < s < 1.0]
    if bad:
        raise ValueError(f"deformation parameters must lie in (0, 1), got {bad}")
    return values


class RunConfig(_Strict):
    """Complete description of one pipeline run."""

    metric: MetricSpec
    grid: GridSpec = Field(default_factory=GridSpec)
    cutoff: CutoffConfig
    s_values: list[float] = Field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05], min_length=1)
    lemma_s_values: Optional[list[float]] = Field(
        None, description="Sweep of the mass-drop check; defaults to s_values"
    )
    static_windows: list[tuple[float, float]] = Field(default_factory=list)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    fit: FitConfig = Field(default_factory=FitConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    workers: Optional[int] = Field(None, ge=1)

    @field_validator("s_values")
    @classmethod
    def _check_s_values(cls, values: list[float]) -> list[float]:
        return _check_s(values)

    @field_validator("lemma_s_values")
    @classmethod
    def _check_lemma_s(cls, values: Optional[list[float]]) -> Optional[list[float]]:
        return None if values is None else _check_s(values)

    @model_validator(mode="after")
    def _check_ordering(self) -> RunConfig:
        t_min = self.grid.t_min
        m = self.metric
        if not t_min < self.cutoff.t0 < self.cutoff.t1 < m.t_omega < m.t_max:
            raise ValueError(
                "need t_min < t0 < t1 < t_omega < t_max, got "
                f"{t_min}, {self.cutoff.t0}, {self.cutoff.t1}, {m.t_omega}, {m.t_max}"
            )
        lo, hi = self.fit.window
        if not (t_min <= lo and hi <= m.t_max):
            raise ValueError(f"fit window {self.fit.window} leaves the grid [{t_min}, {m.t_max}]")
        for a, b in self.static_windows:
            if not t_min < a < b < m.t_max:
                raise ValueError(f"static window ({a}, {b}) must lie strictly inside the grid")
        return self

    @property
    def lemma_sweep(self) -> list[float]:
        return list(self.lemma_s_values if self.lemma_s_values is not None else self.s_values)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], env: Optional[Mapping[str, str]] = None) -> RunConfig:
        """
        Validate a configuration document and apply the environment override.

        Raises:
            ConfigError: If the document does not validate
        """
        try:
            config = cls.model_validate(dict(data))
        except ValidationError as e:
            raise ConfigError(f"Invalid run configuration: {e}") from e
        return config.with_env(os.environ if env is None else env)

    @classmethod
    def from_file(cls, path: Union[str, Path], env: Optional[Mapping[str, str]] = None) -> RunConfig:
        """
        Load a configuration from a JSON file.

        Raises:
            ConfigError: If the file cannot be read or does not validate
        """
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read configuration {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Configuration {path} is not a JSON object")
        return cls.from_dict(data, env)

    def with_env(self, env: Mapping[str, str]) -> RunConfig:
        directory = env.get(OUTPUT_DIR_ENV)
        if not directory:
            return self
        logger.info("Output directory overridden by %s=%s", OUTPUT_DIR_ENV, directory)
        return self.model_copy(update={"output": self.output.model_copy(update={"directory": directory})})

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return self.model_dump(mode="json")


__all__ = [
    "CutoffConfig",
    "FitConfig",
    "GridSpec",
    "MetricSpec",
    "OUTPUT_DIR_ENV",
    "OutputConfig",
    "RunConfig",
    "Tolerances",
]
