"""qcfrac: q-series, three-term recurrences, and continued fractions for
the very-well-poised balanced 10-phi-9 family, with closed-form values
for the terminating and 8-phi-7 limit cases."""

from .context import QContext, SeriesResult, Terminated, to_scalar, scalar_to_json
from .errors import (
    BalanceViolated,
    ConfigError,
    DegenerateParameters,
    Divergent,
    EmptyRegion,
    MaxTermsExceeded,
    MinimalityLost,
    NonConvergent,
    QSeriesError,
    ZeroDenominator,
    ZeroPivot,
)
from .qseries import (
    ParameterSet10,
    complementary_pair,
    contiguous_residual,
    phi_series,
    qpoch,
    qpoch_inf,
    qpoch_inf_ratio,
    qpoch_multi,
    vwp_balanced_10_9,
    vwp_phi,
)
from .recurrence import (
    AsymptoticReport,
    Branch,
    MassonParams,
    RecurrenceCoeffs,
    SolutionSample,
    asymptotic_check,
    coeffs,
    limit_W1,
    limit_W2,
    minimal_solution,
    recurrence_residual,
    solution_X1,
    solution_X2,
)
from .cfrac import (
    CFCoefficients,
    CFMethod,
    ConvergentTrace,
    Corollary3CF,
    Corollary3Params,
    MassonCF,
    TableCF,
    corollary2_rhs,
    corollary3_bridge,
    corollary3_coeffs,
    corollary3_rhs,
    entry40_params,
    eval_cf,
    masson_terminating,
    pincherle_value,
    theorem1_rhs,
)
from .harness import CheckSpec, Report, run_check, sample_params

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
