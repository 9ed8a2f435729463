"""Least-squares estimation of the growth-model coefficients from a case series.

The rate equation is linear in (alpha, beta, gamma), so daily increments are
regressed on the midpoint count and its square: for each consecutive pair of
observations, dE(d) = alpha*Ebar(d) - beta*Ebar(d)^2 + gamma with
Ebar(d) = (E(d) + E(d-1))/2.  The jump out of the last zero-count day is an
onset artifact and stays out of the regression.  Columns are rescaled before
solving; the normal problem is otherwise conditioned around 1e10 for counts
in the tens of thousands and the solution becomes platform-dependent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import CaseSeries
from .diagnostics import SeriesTooShortError
from .logistic import LogisticParams, LogisticSolution, derive_solution, evaluate

REASON_OK = ""
REASON_NOT_LOGISTIC = "NotLogistic"
REASON_NO_REAL_ASYMPTOTE = "NoRealAsymptote"
REASON_SATURATED_START = "SaturatedStart"
REASON_ASYMPTOTE_BELOW_DATA = "AsymptoteBelowData"
REASON_PRE_INFLECTION = "PreInflection"


class DegenerateDesignError(ValueError):
    """The regression design is rank-deficient (e.g. all midpoints equal)."""


@dataclass(frozen=True)
class FitResult:
    params: LogisticParams
    solution: LogisticSolution | None
    training_range: tuple[int, int]
    residual_rms: float
    valid_for_forecast: bool
    reason: str

    @property
    def asymptote(self) -> float | None:
        return self.solution.asymptote if self.solution is not None else None


def _regression_arrays(cum: np.ndarray, abscissa: str) -> tuple[np.ndarray, np.ndarray]:
    increments = cum[1:] - cum[:-1]
    if abscissa == "midpoint":
        x = 0.5 * (cum[1:] + cum[:-1])
    elif abscissa == "right":
        x = cum[1:]
    else:
        raise ValueError(f"abscissa must be 'midpoint' or 'right', got {abscissa!r}")
    return x, increments


def fit(series: CaseSeries, last_day: int | None = None, abscissa: str = "midpoint") -> FitResult:
    """Estimate (alpha, beta, gamma) on the observations up to `last_day`.

    valid_for_forecast is False, with a tagged reason, whenever the estimated
    curve cannot forecast a growing count: no saturation (beta <= 0), complex
    or already-passed asymptote, an asymptote below the data, or a rate curve
    whose vertex lies beyond the observed counts (the data never showed the
    bend the parabola claims, so the asymptote is pure extrapolation).
    """
    sub = series.through(last_day) if last_day is not None else series
    cum = sub.cumulative
    positive = np.nonzero(cum > 0)[0]
    if positive.size < 5:
        raise SeriesTooShortError(
            f"need >= 5 nonzero observations, got {positive.size}"
        )
    first_pos = int(positive[0])
    training = cum[first_pos:]
    x, y = _regression_arrays(training, abscissa)
    x_scale = float(np.abs(x).max())
    design = np.column_stack([x / x_scale, -((x / x_scale) ** 2), np.ones_like(x)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise DegenerateDesignError("regression design is rank-deficient")
    alpha = float(coef[0] / x_scale)
    beta = float(coef[1] / x_scale**2)
    gamma = float(coef[2])
    params = LogisticParams(alpha=alpha, beta=beta, gamma=gamma)
    residual_rms = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
    origin_day = sub.first_day + first_pos
    training_range = (origin_day, sub.last_day)
    initial_value = float(training[0])

    solution = None
    reason = REASON_OK
    if beta <= 0:
        reason = REASON_NOT_LOGISTIC
    elif params.discriminant < 0:
        reason = REASON_NO_REAL_ASYMPTOTE
    else:
        growth_rate = float(np.sqrt(params.discriminant))
        asymptote = (alpha + growth_rate) / (2.0 * beta)
        if initial_value >= asymptote or growth_rate <= 0:
            reason = REASON_SATURATED_START
        elif asymptote < training.max():
            reason = REASON_ASYMPTOTE_BELOW_DATA
        elif alpha / (2.0 * beta) > x.max():
            reason = REASON_PRE_INFLECTION
        else:
            solution = derive_solution(params, initial_value, origin_day)
    return FitResult(
        params=params,
        solution=solution,
        training_range=training_range,
        residual_rms=residual_rms,
        valid_for_forecast=solution is not None,
        reason=reason,
    )


def fit_quality(
    result: FitResult, series: CaseSeries, eval_range: tuple[int, int]
) -> tuple[float, float | None]:
    """RMSE and Pearson correlation of the fitted curve against observations.

    Correlation is None (flagged undefined) when either side is constant over
    the range; the RMSE is still returned.
    """
    if result.solution is None:
        raise ValueError(f"fit is not forecast-valid ({result.reason}); no curve to score")
    lo, hi = eval_range
    if lo < series.first_day or hi > series.last_day or lo > hi:
        raise ValueError(
            f"eval range [{lo}, {hi}] outside observations "
            f"[{series.first_day}, {series.last_day}]"
        )
    days = np.arange(lo, hi + 1)
    predicted = evaluate(result.solution, days - result.solution.origin_day)
    observed = series.cumulative[lo - series.first_day : hi - series.first_day + 1]
    rmse = float(np.sqrt(np.mean((predicted - observed) ** 2)))
    if np.std(observed) == 0 or np.std(predicted) == 0:
        return rmse, None
    correlation = float(np.corrcoef(predicted, observed)[0, 1])
    return rmse, correlation
