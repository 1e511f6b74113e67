"""Rank correlation estimators, their population values and asymptotic variances."""

from importlib.metadata import PackageNotFoundError, version as _version

from .asymptotics import (
    VarianceReport,
    are_crossover_normal,
    expected_r_n,
    expected_r_tilde,
    var_pearson_normal,
    var_r_leading,
    var_tau_leading,
)
from .copulas import (
    FGM,
    BivariateModel,
    BivariateNormal,
    BivariatePareto,
    TheoreticalCoefficients,
    make_model,
    theoretical_coefficients,
)
from .errors import (
    DegenerateSample,
    InputParseError,
    LengthMismatch,
    MismatchedConfig,
    NonFiniteIntegrand,
    ParameterOutOfRange,
    QuadratureNotConverged,
    RankCorrError,
    TiesPresent,
)
from .rankstats import (
    ConcomitantRanks,
    CorrelationEstimates,
    PairedSample,
    concomitant_ranks,
    estimate_all,
    kendall,
    pearson,
    r_new,
    r_tilde,
    spearman,
    weighted_T,
)

try:
    __version__ = _version("rankcorr")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
