"""Cross-validated variable selection for linear models with possibly
asymmetric errors.

Coefficients are fit on a small training split by expectile (asymmetric
least squares) or adaptively weighted l1 expectile estimation, candidate
subsets are scored by their mean validation loss, and the score argmin is
the selected model.  A Monte Carlo harness benchmarks the pipeline on
synthetic designs, and a CLI exposes the workflow for CSV data.
"""

from .distributions import ErrorDistribution, sample_error, true_tau_of
from .estimators import (
    Dataset,
    FitResult,
    ModelSubset,
    PenaltyConfig,
    SolverOptions,
    compute_adaptive_weights,
    fit_adaptive_lasso_expectile,
    fit_adaptive_lasso_quantile,
    fit_expectile,
    fit_lasso_expectile,
    fit_least_squares,
    fit_quantile,
    linear_predictor,
)
from .exceptions import (
    AllReplicationsFailed,
    AllSubsetsFailed,
    ComputationError,
    DataError,
    DegenerateResiduals,
    DegenerateSplit,
    EmptyData,
    ExpselError,
    MissingColumn,
    NonFinite,
    ParseError,
    RankDeficient,
    ShapeMismatch,
    TooManySubsets,
)
from .dataio import Diagnostics, diagnose, load_csv, read_report, write_report
from .losses import (
    ExpectileIndex,
    check_loss,
    expectile_loss,
    expectile_score,
    expectile_weight,
)
from .selection import (
    CvSplit,
    EnumConfig,
    SelectConfig,
    SelectionReport,
    cv_score,
    enumerate_subsets,
    make_split,
    select_model,
    select_model_penalized,
    selected_coefficients,
)
from .simulation import (
    MethodSummary,
    ReplicationSummary,
    SimConfig,
    compute_metrics,
    generate_instance,
    preset_config,
    run_experiment,
)
from .tau import TauEstimate, tau_from_residuals, tau_two_step

__version__ = "0.1.0"
