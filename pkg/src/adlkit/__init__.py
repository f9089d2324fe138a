"""Anomalous-diffusion analysis toolkit for optimizer trajectories.

Simulates noisy gradient descent on synthetic 2D loss landscapes and
measures diffusion regimes (time-averaged MSD, crossovers), heavy-tailed
gradient statistics (stable fits with a Gaussian likelihood contest), and
fractal geometry of both the walker's path and the landscape itself.
"""

__version__ = "0.1.0"

from .errors import (
    ArgumentError,
    BoundaryError,
    DataError,
    DomainError,
    FitError,
    FormatError,
    OutOfBoundsError,
    ToolkitError,
    TruncationError,
    ValidationError,
)
from .trajectory import (
    Series,
    Trajectory,
    Window,
    displacement_sq,
    loss_series,
    validate,
)
from .landscape import (
    BoxCountResult,
    HeightField,
    Minimum,
    binarize,
    box_counting_dimension,
    default_scales,
    detect_minima,
    eval_loss,
    generate_fractal_terrain,
    level_contour,
    make_convex_paraboloid,
    numerical_gradient,
    shuffle_and_smooth,
)
from .msd import (
    BetaSeries,
    CrossoverResult,
    MsdCurve,
    PowerLawFit,
    RegimeChangeResult,
    RegimeReport,
    default_lags,
    detect_crossover_tau0,
    detect_regime_change_t0,
    fit_power_law,
    log_derivative_beta,
    log_spaced_lags,
    no_averaged_msd,
    time_averaged_msd,
)
from .stable import (
    StableFit,
    StableParams,
    change_of_loss,
    fit_stable_general,
    fit_stable_symmetric,
    gradient_pool,
    moving_variance,
    sample_stable,
    stable_log_pdf,
)
from .simulate import (
    RANDOM_HIGH_START,
    SimConfig,
    SimResult,
    detect_entry_time,
    run_sgd,
    sweep,
)
from .pathfractal import (
    MslCurve,
    PathFractalResult,
    TransverseProfile,
    msl,
    path_scaling,
    transverse_distance,
    transverse_profile,
)
from .adt1 import read_trajectory, write_trajectory
from .serialize import (
    RunManifest,
    read_field_csv,
    read_series_csv,
    write_field_csv,
    write_json,
    write_manifest,
    write_series_csv,
)
from .toymodel import (
    ControlOutcome,
    ToyModelConfig,
    ToyModelReport,
    TrialOutcome,
    run_toy_model,
    select_fractal_landscape,
)

__all__ = [
    "__version__",
    # errors
    "ToolkitError", "ArgumentError", "DomainError", "DataError",
    "ValidationError", "FitError", "OutOfBoundsError", "BoundaryError",
    "FormatError", "TruncationError",
    # core model
    "Trajectory", "Window", "Series", "displacement_sq", "loss_series", "validate",
    # landscapes
    "HeightField", "Minimum", "BoxCountResult", "generate_fractal_terrain",
    "make_convex_paraboloid", "shuffle_and_smooth", "eval_loss",
    "numerical_gradient", "detect_minima", "box_counting_dimension",
    "default_scales", "binarize", "level_contour",
    # diffusion analysis
    "MsdCurve", "PowerLawFit", "BetaSeries", "CrossoverResult", "RegimeReport",
    "RegimeChangeResult", "default_lags", "log_spaced_lags", "time_averaged_msd",
    "no_averaged_msd", "log_derivative_beta", "fit_power_law",
    "detect_crossover_tau0", "detect_regime_change_t0",
    # heavy tails
    "StableParams", "StableFit", "sample_stable", "stable_log_pdf",
    "fit_stable_symmetric", "fit_stable_general", "gradient_pool",
    "change_of_loss", "moving_variance",
    # simulator
    "SimConfig", "SimResult", "RANDOM_HIGH_START", "run_sgd",
    "detect_entry_time", "sweep",
    # path and landscape fractality
    "PathFractalResult", "TransverseProfile", "MslCurve", "path_scaling",
    "transverse_profile", "transverse_distance", "msl",
    # io
    "read_trajectory", "write_trajectory", "RunManifest", "write_field_csv",
    "read_field_csv", "write_series_csv", "read_series_csv", "write_json",
    "write_manifest",
    # toy experiment
    "ToyModelConfig", "ToyModelReport", "TrialOutcome", "ControlOutcome",
    "run_toy_model", "select_fractal_landscape",
]
