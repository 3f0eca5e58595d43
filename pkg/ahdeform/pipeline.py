"""
End-to-end runs.

``run_pipeline`` executes

    geometry -> curvature -> yamabe -> deform -> mass -> analysis

on the finest configured grid level and then repeats the geometry, Yamabe and
family construction on every level for the convergence tables. A stage that
raises stops the run; every stage that completed stays in the report.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional, Union

import numpy as np

from .analysis import (
    DECAY_ATOL,
    AdmissibilityReport,
    admissibility_check,
    bartnik_upper_bound,
    minimal_sphere_scan,
    static_kernel_test,
)
from .config import MetricSpec, RunConfig
from .curvature import CurvatureField, scalar_curvature
from .deform import (
    CutoffSpec,
    DeformedFamily,
    FamilyReport,
    build_family,
    member_deviations,
    verify_family,
)
from .errors import AHDeformError, ProfileError
from .fitting import decay_exponent
from .geometry import (
    GeneralProfile,
    MetricProfile,
    RadialGrid,
    make_ads_schwarzschild,
    make_bumped,
    make_hyperbolic,
    make_tail_perturbed,
    resample,
)
from .mass import LemmaReport, check_lemma_coefficients, mass_aspect, normalize
from .report_types import ConvergenceRow, RunReportDict, SkippedLevelDict
from .serialization import load_profile, save_profile, to_jsonable, write_csv, write_json
from .stencils import observed_order
from .yamabe import YamabeSolution, solve_yamabe

logger = logging.getLogger(__name__)

REPORT_VERSION = 1
EXACT_CURVATURE_KINDS = ("hyperbolic", "ads_schwarzschild")


class Status:
    """Overall outcome of a run."""

    PASS = "pass"
    VERIFICATION_FAILURE = "verification-failure"
    ERROR = "error"


class ExitCode:
    OK = 0
    ERROR = 1
    VERIFICATION_FAILURE = 2


# Geometry


def grid_for(config: RunConfig, level: int) -> RadialGrid:
    """Radial grid of the configured span at one refinement level."""
    return RadialGrid(config.grid.t_min, config.metric.t_max, config.grid.base_intervals, level)


def _model(spec: MetricSpec, kind: str, grid: RadialGrid) -> MetricProfile:
    if kind == "hyperbolic":
        return make_hyperbolic(spec.n, grid)
    if spec.m is None:
        raise ProfileError("AdS-Schwarzschild metric needs a mass parameter m")
    return make_ads_schwarzschild(spec.n, spec.m, grid, spec.through_horizon)


def build_metric(spec: MetricSpec, grid: RadialGrid) -> MetricProfile:
    """
    Build the configured base metric on ``grid``.

    Profiles read from a file are normalized if needed and resampled onto
    ``grid``.

    Raises:
        HorizonError: If an AdS-Schwarzschild grid reaches the horizon
        ProfileError: If a profile file has the wrong dimension or cannot be read
        ExtrapolationError: If ``grid`` leaves the span of a profile file
    """
    if spec.kind in EXACT_CURVATURE_KINDS:
        return _model(spec, spec.kind, grid)
    if spec.kind == "bumped":
        assert spec.center is not None and spec.width is not None and spec.amplitude is not None
        return make_bumped(_model(spec, spec.base, grid), spec.center, spec.width, spec.amplitude)
    if spec.kind == "tail_perturbed":
        assert spec.amplitude is not None and spec.power is not None
        return make_tail_perturbed(_model(spec, spec.base, grid), spec.amplitude, spec.power)

    assert spec.path is not None
    profile = load_profile(spec.path)
    if isinstance(profile, GeneralProfile):
        profile = normalize(profile)
    if profile.dim != spec.n:
        raise ProfileError(f"Profile {spec.path} has dimension {profile.dim}, configured n={spec.n}")
    out = resample(profile, grid)
    if not isinstance(out, MetricProfile):
        raise ProfileError(f"Profile {spec.path} did not resample to normal form")
    return out


def _geometry_summary(metric: MetricProfile) -> dict[str, Any]:
    return {
        "meta": metric.meta,
        "n": metric.dim,
        "level": metric.grid.level,
        "nodes": metric.grid.size,
        "t_min": metric.grid.t_min,
        "t_max": metric.grid.t_max,
        "a_min": float(metric.a.min()),
        "a_max": float(metric.a.max()),
    }


# Report


@dataclass
class RunReport:
    """
    Stage results, convergence tables and verdict of one run.

    ``stages`` holds the JSON form of each completed stage in execution
    order; the remaining fields keep the arrays ``emit_plots`` writes.
    """

    config: RunConfig
    stages: dict[str, Any] = field(default_factory=dict)
    convergence: list[ConvergenceRow] = field(default_factory=list)
    skipped_levels: list[SkippedLevelDict] = field(default_factory=list)
    failed_stage: Optional[str] = None
    error: Optional[str] = None
    failures: list[str] = field(default_factory=list)

    metric: Optional[MetricProfile] = field(default=None, repr=False)
    curvature: Optional[CurvatureField] = field(default=None, repr=False)
    yamabe: Optional[YamabeSolution] = field(default=None, repr=False)
    family: Optional[FamilyReport] = field(default=None, repr=False)
    lemma: list[LemmaReport] = field(default_factory=list, repr=False)

    @property
    def status(self) -> str:
        if self.failed_stage is not None:
            return Status.ERROR
        if self.failures:
            return Status.VERIFICATION_FAILURE
        return Status.PASS

    @property
    def exit_code(self) -> int:
        return {
            Status.PASS: ExitCode.OK,
            Status.ERROR: ExitCode.ERROR,
            Status.VERIFICATION_FAILURE: ExitCode.VERIFICATION_FAILURE,
        }[self.status]

    def to_dict(self) -> RunReportDict:
        """Convert to dictionary for JSON serialization."""
        return {
            "version": REPORT_VERSION,
            "status": self.status,
            "exit_code": self.exit_code,
            "failed_stage": self.failed_stage,
            "error": self.error,
            "failures": list(self.failures),
            "config": self.config.to_dict(),
            "stages": to_jsonable(self.stages),
            "convergence": list(self.convergence),
            "skipped_levels": list(self.skipped_levels),
        }


class _StageFailed(Exception):
    """A stage raised; the run stops with a partial report."""


@contextmanager
def _stage(report: RunReport, name: str) -> Iterator[None]:
    logger.info("Stage %s", name)
    try:
        yield
    except AHDeformError as e:
        report.failed_stage = name
        report.error = f"{type(e).__name__}: {e}"
        logger.error("Stage %s failed: %s", name, e)
        raise _StageFailed(name) from e
    except Exception as e:
        report.failed_stage = name
        report.error = f"{type(e).__name__}: {e}"
        logger.exception("Stage %s failed unexpectedly", name)
        raise _StageFailed(name) from e


def _run_stages(report: RunReport, lemma_only: bool) -> None:
    config = report.config
    tol = config.tolerances
    window = config.fit.window
    grid = grid_for(config, config.grid.report_level)

    with _stage(report, "geometry"):
        metric = build_metric(config.metric, grid)
        report.metric = metric
        report.stages["geometry"] = _geometry_summary(metric)

    with _stage(report, "curvature"):
        curvature = scalar_curvature(metric)
        report.curvature = curvature
        report.stages["curvature"] = curvature.to_dict()

    with _stage(report, "yamabe"):
        solution = solve_yamabe(
            metric,
            tol.solver,
            curvature_tol=tol.curvature,
            fit_window=window,
            max_drift=tol.fit_drift,
            fit_atol=tol.fit_atol,
        )
        report.yamabe = solution
        report.stages["yamabe"] = solution.to_dict()
    degenerate = abs(solution.v_n) <= tol.fit_atol

    family: Optional[DeformedFamily] = None
    family_report: Optional[FamilyReport] = None
    if not lemma_only:
        with _stage(report, "deform"):
            cutoff = CutoffSpec(config.cutoff.t0, config.cutoff.t1)
            cutoff.check_inside(config.metric.t_omega)
            family = build_family(metric, solution, cutoff, config.s_values, config.workers)
            family_report = verify_family(
                family,
                tol.curvature,
                mass_rtol=tol.mass_rtol,
                fit_window=window,
                max_drift=tol.fit_drift,
                fit_atol=tol.fit_atol,
                workers=config.workers,
            )
            report.family = family_report
            report.stages["deform"] = family_report.to_dict()
            for member in family_report.members:
                if not member.passed:
                    report.failures.append(
                        f"family member s={member.s:g} violates {', '.join(member.violations)}"
                    )

    with _stage(report, "mass"):
        base_mass = mass_aspect(metric, window, tol.fit_drift, tol.fit_atol)
        lemma = [
            check_lemma_coefficients(
                metric,
                solution,
                s,
                window=window,
                max_drift=tol.fit_drift,
                atol=tol.fit_atol,
                expansions=not degenerate,
            )
            for s in config.lemma_sweep
        ]
        report.lemma = lemma
        report.stages["mass"] = {
            "base": base_mass.to_dict(),
            "degenerate": degenerate,
            "lemma": [r.to_dict() for r in lemma],
        }
        if not degenerate:
            for r in lemma:
                if r.rel_err > tol.mass_rtol:
                    report.failures.append(
                        f"mass drop at s={r.s:g} is off the closed form by {r.rel_err:.3g}"
                    )

    if lemma_only or family is None or family_report is None:
        return

    with _stage(report, "analysis"):
        static = [
            static_kernel_test(
                metric,
                w,
                static_tol=tol.static_tol,
                gap_tol=tol.gap_tol,
                curvature_tol=tol.curvature,
            )
            for w in config.static_windows
        ]
        scans = [minimal_sphere_scan(g_s) for g_s in family.members]
        admissible: list[AdmissibilityReport] = [
            admissibility_check(
                g_s, config.metric.t_omega, curvature_tol=tol.curvature, window=window
            )
            for g_s in family.members
        ]
        bound = bartnik_upper_bound(metric.dim, family_report, admissible)
        report.stages["analysis"] = {
            "static": [v.to_dict() for v in static],
            "horizons": {
                "base": minimal_sphere_scan(metric).to_dict(),
                "members": [
                    {"s": s, **scan.to_dict()} for s, scan in zip(family.s_values, scans)
                ],
            },
            "admissibility": [
                {"s": s, **adm.to_dict()} for s, adm in zip(family.s_values, admissible)
            ],
            "bartnik_upper_bound": bound,
        }
        for s, adm in zip(family.s_values, admissible):
            if not adm.passed:
                report.failures.append(f"family member s={s:g} is not admissible: {'; '.join(adm.reasons)}")


# Convergence


def _rows(
    quantity: str,
    grids: list[RadialGrid],
    values: list[float],
    errors: list[float],
) -> list[ConvergenceRow]:
    rows: list[ConvergenceRow] = []
    for i, (grid, value, error) in enumerate(zip(grids, values, errors)):
        order: Optional[float] = None
        if i > 0 and np.isfinite(error) and np.isfinite(errors[i - 1]):
            ratio = 2.0 ** (grid.level - grids[i - 1].level)
            order = observed_order([errors[i - 1], error], ratio)[0]
        rows.append(
            {
                "quantity": quantity,
                "level": grid.level,
                "intervals": grid.intervals,
                "value": value,
                "error": error,
                "order": order,
            }
        )
    return rows


def _to_finest(values: list[float]) -> list[float]:
    finest = values[-1]
    return [abs(v - finest) for v in values[:-1]] + [float("nan")]


@dataclass
class ConvergenceStudy:
    """Rows of a convergence study and the levels it could not build."""

    rows: list[ConvergenceRow]
    skipped: list[SkippedLevelDict] = field(default_factory=list)


def convergence_table(config: RunConfig) -> ConvergenceStudy:
    """
    Observed orders across the configured grid levels.

    Quantities are the scalar curvature (against ``-n(n-1)`` for the model
    metrics, otherwise against the finest level on shared nodes), the decay
    exponent of ``a - 1`` at the boundary, the decay coefficient ``v_n`` and
    the family constant ``C`` in ``max |g_s - g| <= C s``. A level whose
    construction fails is recorded in ``skipped`` with its error.
    """
    spec = config.metric
    tol = config.tolerances
    grids: list[RadialGrid] = []
    skipped: list[SkippedLevelDict] = []
    plus: list[np.ndarray] = []
    boundary: list[float] = []
    v_n: list[float] = []
    constants: list[float] = []
    for level in config.grid.levels:
        grid = grid_for(config, level)
        try:
            metric = build_metric(spec, grid)
            field_plus = scalar_curvature(metric).plus
            solution = solve_yamabe(
                metric,
                tol.solver,
                curvature_tol=tol.curvature,
                fit_window=config.fit.window,
                max_drift=tol.fit_drift,
                fit_atol=tol.fit_atol,
            )
            family = build_family(
                metric, solution, CutoffSpec(config.cutoff.t0, config.cutoff.t1), config.s_values
            )
        except AHDeformError as e:
            logger.warning("Convergence study skips level %d: %s", level, e)
            skipped.append({"level": level, "error": f"{type(e).__name__}: {e}"})
            continue
        grids.append(grid)
        plus.append(field_plus)
        boundary.append(decay_exponent(metric.t, metric.a - 1.0, config.fit.window, DECAY_ATOL))
        v_n.append(solution.v_n)
        deviations = member_deviations(family)
        constants.append(max(d / s for d, s in zip(deviations, family.s_values)))
    if not grids:
        return ConvergenceStudy([], skipped)

    curvature_values = [float(p.min()) for p in plus]
    if spec.kind in EXACT_CURVATURE_KINDS:
        curvature_errors = [float(np.max(np.abs(p))) for p in plus]
    else:
        finest = plus[-1]
        curvature_errors = []
        for grid, p in zip(grids[:-1], plus[:-1]):
            stride = 2 ** (grids[-1].level - grid.level)
            curvature_errors.append(float(np.max(np.abs(p - finest[::stride]))))
        curvature_errors.append(float("nan"))

    rows = _rows("curvature", grids, curvature_values, curvature_errors)
    rows += _rows("boundary_order", grids, boundary, _to_finest(boundary))
    rows += _rows("v_n", grids, v_n, _to_finest(v_n))
    rows += _rows("deviation_constant", grids, constants, _to_finest(constants))
    return ConvergenceStudy(rows, skipped)


def _check_convergence(report: RunReport, study: ConvergenceStudy) -> None:
    report.convergence = study.rows
    report.skipped_levels = study.skipped
    for skipped in study.skipped:
        report.failures.append(f"convergence level {skipped['level']} skipped: {skipped['error']}")
    minimum = report.config.metric.n - 0.5
    for row in study.rows:
        if row["quantity"] == "boundary_order" and row["value"] < minimum:
            report.failures.append(
                f"a - 1 decays at order {row['value']:.3g} < {minimum:g} on level {row['level']}"
            )


# Entry points


def run_pipeline(config: RunConfig) -> RunReport:
    """
    Run every stage and the convergence study.

    Never raises for failures inside a stage: the failing stage and its error
    are recorded and the report keeps the stages that completed.

    Args:
        config: Validated run configuration

    Returns:
        Report with exit code 0 (pass), 2 (verification failure) or 1 (error)

    Example:
        report = run_pipeline(RunConfig.from_file("configs/tail_fixture.json"))
        write_outputs(report)
        sys.exit(report.exit_code)
    """
    report = RunReport(config)
    try:
        _run_stages(report, lemma_only=False)
        with _stage(report, "convergence"):
            _check_convergence(report, convergence_table(config))
    except _StageFailed:
        pass
    logger.info("Run finished with status %s", report.status)
    return report


def run_lemma(config: RunConfig) -> RunReport:
    """Run only geometry, curvature, Yamabe and the mass-drop check."""
    report = RunReport(config)
    try:
        _run_stages(report, lemma_only=True)
    except _StageFailed:
        pass
    logger.info("Mass-drop check finished with status %s", report.status)
    return report


def emit_plots(report: RunReport, path: Union[str, Path]) -> list[Path]:
    """
    Write the CSV tables of a report into directory ``path``.

    ``mass_drop.csv`` lists the mass-drop check per ``s``,
    ``curvature_profile.csv`` the scalar curvature of the base and of each
    glued member, ``yamabe_profile.csv`` the correction ``v`` and
    ``convergence.csv`` the convergence rows. Tables whose stage did not run
    are skipped.

    Returns:
        Paths written, in the order above
    """
    directory = Path(path)
    written = []
    if report.lemma:
        written.append(
            write_csv(
                directory / "mass_drop.csv",
                ("s", "mu_base", "mu_conformal", "predicted_drop", "measured_drop", "rel_err"),
                [
                    (r.s, r.mu_base, r.mu_conformal, r.predicted_drop, r.measured_drop, r.rel_err)
                    for r in report.lemma
                ],
            )
        )
    if report.curvature is not None:
        curvature = report.curvature
        shift = curvature.dim * (curvature.dim - 1)
        members = report.family.members if report.family is not None else []
        header = ["t", "R_base"] + [f"R_s={m.s:g}" for m in members]
        columns = [curvature.grid.nodes, curvature.R] + [m.curvature - shift for m in members]
        written.append(write_csv(directory / "curvature_profile.csv", header, zip(*columns)))
    if report.yamabe is not None:
        written.append(
            write_csv(
                directory / "yamabe_profile.csv",
                ("t", "v"),
                zip(report.yamabe.grid.nodes, report.yamabe.v),
            )
        )
    if report.convergence:
        keys = ("quantity", "level", "intervals", "value", "error", "order")
        written.append(
            write_csv(
                directory / "convergence.csv",
                keys,
                [[row[k] for k in keys] for row in report.convergence],  # type: ignore[literal-required]
            )
        )
    return written


def write_outputs(report: RunReport, directory: Optional[Union[str, Path]] = None) -> list[Path]:
    """
    Write ``report.json``, the base profile and, if configured, the CSV tables.

    Args:
        report: Finished or partial report
        directory: Output directory; defaults to the configured one

    Returns:
        Paths written
    """
    output = report.config.output
    target = Path(directory) if directory is not None else Path(output.directory)
    written = [write_json(target / output.report, report.to_dict())]
    if report.metric is not None:
        written.append(save_profile(target / "profile.json", report.metric))
    if output.csv:
        written.extend(emit_plots(report, target))
    logger.info("Wrote %d file(s) to %s", len(written), target)
    return written


__all__ = [
    "EXACT_CURVATURE_KINDS",
    "ConvergenceStudy",
    "ExitCode",
    "RunReport",
    "Status",
    "build_metric",
    "convergence_table",
    "emit_plots",
    "grid_for",
    "run_lemma",
    "run_pipeline",
    "write_outputs",
]
