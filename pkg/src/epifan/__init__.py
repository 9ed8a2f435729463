"""Ensemble fan-chart forecasting of cumulative epidemic case counts.

Cumulative confirmed-case series are fitted with a saturating growth curve
(linear-plus-quadratic rate equation), and forecast uncertainty is estimated
by refitting an ensemble of stochastically perturbed, time-shifted copies of
the training data and summarising the member curves as per-day quantile fans.
"""

from .dataio import (
    CaseSeries,
    CsvParseError,
    DATASET_NAMES,
    QcCorrection,
    QcReport,
    StructureError,
    UnknownDatasetError,
    bundled_dataset,
    parse_csv,
    qc_correct,
    render_csv,
)
from .diagnostics import (
    DerivativeSeries,
    ReadinessVerdict,
    SeriesTooShortError,
    derivatives,
    readiness,
)
from .ensemble import (
    EnsembleCollapseError,
    EnsembleConfig,
    EnsembleForecast,
    FanPoint,
    MemberOutcome,
    PerturbationSpec,
    generate,
    lag_shift,
    perturb_series,
    perturbation_spec,
    quantile_fan,
)
from .fitting import DegenerateDesignError, FitResult, fit, fit_quality
from .logistic import (
    LogisticParams,
    LogisticSolution,
    NoRealAsymptoteError,
    NotLogisticError,
    SaturatedStartError,
    UndefinedDoublingTimeError,
    derive_solution,
    doubling_time,
    evaluate,
    evaluate_normalized,
    integrate_ode,
)
from .verification import (
    RangeMismatchError,
    VerificationReport,
    verify_deterministic,
    verify_ensemble,
)

__version__ = "0.1.0"
