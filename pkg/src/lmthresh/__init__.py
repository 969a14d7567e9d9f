"""Automatic peaks-over-threshold level selection based on L-moments."""
from .asymptotics import (
    ConfidenceBand,
    RatioCov,
    ci_tau3_given_t4,
    ci_tau4_given_t3,
    lmom_acov,
    pwm_acov,
    ratio_acov,
    ratio_acov_gpd,
)
from .distributions import (
    GpdParams,
    KappaParams,
    RandomStream,
    gpd_cdf,
    gpd_fit_pwm,
    gpd_quantile,
    kappa_cdf,
    kappa_fit_lmom,
    kappa_lmoments,
    kappa_quantile,
    kappa_sample,
    std_normal_cdf,
    std_normal_quantile,
)
from .errors import (
    ConvergenceError,
    DegenerateSampleError,
    DomainError,
    GridError,
    InfeasibleFitError,
    InsufficientSampleError,
    LmomError,
    NonexistentMomentError,
)
from .inference import PotConfig, PotReport, analyze, return_level
from .lmoments import (
    LStatSet,
    ObservationSample,
    PwmSet,
    gpd_g,
    gpd_g_inv,
    gpd_population_lmoments,
    l_statistics,
    lmrd_lower_bound,
    pwm_estimates,
)
from .selectors import (
    CandidateDiagnostic,
    CandidateGrid,
    SelectionOutcome,
    alcbsm_select,
    algfsm_select,
    build_grid,
    forward_stop,
    gof_pvalue,
    gof_z_statistic,
)

__version__ = "0.1.0"
