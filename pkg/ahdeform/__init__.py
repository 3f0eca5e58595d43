"""
ahdeform - mass-decreasing conformal deformations of radial asymptotically hyperbolic metrics
"""

from .analysis import (
    AdmissibilityReport,
    Crossing,
    HorizonScan,
    StaticVerdict,
    Verdict,
    admissibility_check,
    bartnik_upper_bound,
    mean_curvature,
    minimal_sphere_scan,
    static_kernel_test,
)
from .config import RunConfig
from .curvature import (
    CurvatureField,
    conformal_scalar_curvature,
    laplace_beltrami,
    scalar_curvature,
)
from .deform import (
    CutoffSpec,
    DeformedFamily,
    FamilyReport,
    MassClause,
    MemberReport,
    build_family,
    conformal_multiply,
    glue,
    verify_family,
)
from .errors import (
    AHDeformError,
    AsymptoticMismatchError,
    ConfigError,
    CutoffError,
    DimensionError,
    DomainError,
    ExtrapolationError,
    FitUnstableError,
    GridTooCoarseError,
    HorizonError,
    HypothesisError,
    IntegrationError,
    InvalidGridError,
    NewtonDivergenceError,
    PositivityLossError,
    ProfileError,
    SupportError,
    WindowError,
)
from .fitting import FitResult, fit_leading
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
from .mass import (
    LemmaReport,
    MassReport,
    check_lemma_coefficients,
    mass_aspect,
    normalize,
    predicted_mass_drop,
)
from .pipeline import RunReport, emit_plots, run_pipeline
from .serialization import load_profile, save_profile
from .yamabe import YamabeSolution, solve_yamabe, yamabe_source

__version__ = "0.3.0"
__all__ = [
    "AHDeformError",
    "AdmissibilityReport",
    "AsymptoticMismatchError",
    "ConfigError",
    "Crossing",
    "CurvatureField",
    "CutoffError",
    "CutoffSpec",
    "DeformedFamily",
    "DimensionError",
    "DomainError",
    "ExtrapolationError",
    "FamilyReport",
    "FitResult",
    "FitUnstableError",
    "GeneralProfile",
    "GridTooCoarseError",
    "HorizonError",
    "HorizonScan",
    "HypothesisError",
    "IntegrationError",
    "InvalidGridError",
    "LemmaReport",
    "MassClause",
    "MassReport",
    "MemberReport",
    "MetricProfile",
    "NewtonDivergenceError",
    "PositivityLossError",
    "ProfileError",
    "RadialGrid",
    "RunConfig",
    "RunReport",
    "StaticVerdict",
    "SupportError",
    "Verdict",
    "WindowError",
    "YamabeSolution",
    "admissibility_check",
    "bartnik_upper_bound",
    "build_family",
    "check_lemma_coefficients",
    "conformal_multiply",
    "conformal_scalar_curvature",
    "emit_plots",
    "fit_leading",
    "glue",
    "laplace_beltrami",
    "load_profile",
    "make_ads_schwarzschild",
    "make_bumped",
    "make_hyperbolic",
    "make_tail_perturbed",
    "mass_aspect",
    "mean_curvature",
    "minimal_sphere_scan",
    "normalize",
    "predicted_mass_drop",
    "resample",
    "run_pipeline",
    "save_profile",
    "scalar_curvature",
    "solve_yamabe",
    "static_kernel_test",
    "verify_family",
    "yamabe_source",
]
