"""Scoring of deterministic fits and ensemble fans against held-out observations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import CaseSeries
from .ensemble import EnsembleForecast
from .fitting import FitResult, fit_quality


class RangeMismatchError(ValueError):
    """The requested day range is not covered by both forecast and observations."""


@dataclass(frozen=True)
class VerificationReport:
    rmse: float
    correlation: float | None
    n_days: int
    minmax_coverage: float | None = None
    iqr_coverage: float | None = None


def verify_deterministic(
    result: FitResult, series: CaseSeries, day_range: tuple[int, int]
) -> VerificationReport:
    """Score the single fitted curve; no band, so no coverage fields."""
    rmse, correlation = fit_quality(result, series, day_range)
    lo, hi = day_range
    return VerificationReport(rmse=rmse, correlation=correlation, n_days=hi - lo + 1)


def verify_ensemble(
    forecast: EnsembleForecast, series: CaseSeries, day_range: tuple[int, int]
) -> VerificationReport:
    """Coverage of the fan bands plus RMSE/correlation of the median curve.

    An observation sitting exactly on a band edge counts as covered (closed
    intervals).
    """
    lo, hi = day_range
    if lo > hi:
        raise RangeMismatchError(f"empty day range [{lo}, {hi}]")
    if lo < forecast.days[0] or hi > forecast.days[-1]:
        raise RangeMismatchError(
            f"range [{lo}, {hi}] outside forecast days "
            f"[{forecast.days[0]}, {forecast.days[-1]}]"
        )
    if lo < series.first_day or hi > series.last_day:
        raise RangeMismatchError(
            f"range [{lo}, {hi}] outside observed days "
            f"[{series.first_day}, {series.last_day}]"
        )
    fan = forecast.fan_array()
    sel = slice(lo - int(forecast.days[0]), hi - int(forecast.days[0]) + 1)
    observed = series.cumulative[lo - series.first_day : hi - series.first_day + 1]
    minimum, q25, median, q75, maximum = (fan[sel, i] for i in range(5))
    inside_minmax = (observed >= minimum) & (observed <= maximum)
    inside_iqr = (observed >= q25) & (observed <= q75)
    rmse = float(np.sqrt(np.mean((median - observed) ** 2)))
    if np.std(observed) == 0 or np.std(median) == 0:
        correlation = None
    else:
        correlation = float(np.corrcoef(median, observed)[0, 1])
    return VerificationReport(
        rmse=rmse,
        correlation=correlation,
        n_days=observed.size,
        minmax_coverage=float(np.mean(inside_minmax)),
        iqr_coverage=float(np.mean(inside_iqr)),
    )
