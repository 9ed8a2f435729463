"""Discrete derivatives of the cumulative curve and the forecast-readiness call.

A cumulative outbreak curve is considered ready for logistic forecasting once
its growth has visibly slowed: the centred-3-day-smoothed concavity must have
been negative for a run of days while the smoothed growth rate sits below its
running maximum.  Smoothed values are undefined (NaN) on the endpoints rather
than computed from a shrunken window, so the freshest smoothed day is always
one day behind the data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import CaseSeries


class SeriesTooShortError(ValueError):
    pass


@dataclass(frozen=True)
class DerivativeSeries:
    """Per-day differences of a cumulative series; NaN where undefined.

    increment[d]            cumulative[d] - cumulative[d-1]
    second_diff[d]          increment[d] - increment[d-1]
    smoothed_increment[d]   centred 3-day mean of increment
    smoothed_second_diff[d] centred 3-day mean of second_diff
    """

    day_index: np.ndarray
    increment: np.ndarray
    second_diff: np.ndarray
    smoothed_increment: np.ndarray
    smoothed_second_diff: np.ndarray


@dataclass(frozen=True)
class ReadinessVerdict:
    ready: bool
    first_ready_day: int | None
    consecutive_negative_days_required: int
    explanation: str


def _centered_mean3(values: np.ndarray) -> np.ndarray:
    out = np.full_like(values, np.nan)
    stacked = np.stack([values[:-2], values[1:-1], values[2:]])
    out[1:-1] = stacked.mean(axis=0)
    return out


def derivatives(series: CaseSeries) -> DerivativeSeries:
    """First and second discrete differences plus their centred 3-day means."""
    if len(series) < 3:
        raise SeriesTooShortError(f"need >= 3 days, got {len(series)}")
    cum = series.cumulative
    n = len(cum)
    increment = np.full(n, np.nan)
    increment[1:] = np.diff(cum)
    second = np.full(n, np.nan)
    second[2:] = np.diff(cum, n=2)
    return DerivativeSeries(
        day_index=series.day_index,
        increment=increment,
        second_diff=second,
        smoothed_increment=_centered_mean3(increment),
        smoothed_second_diff=_centered_mean3(second),
    )


def ready_flags(deriv: DerivativeSeries, k_consecutive: int) -> np.ndarray:
    """Per-day readiness qualification.

    A day qualifies when the smoothed concavity is strictly negative on the
    `k_consecutive` days ending there and the smoothed growth rate sits
    strictly below its running maximum.
    """
    if k_consecutive < 1:
        raise ValueError("k_consecutive must be >= 1")
    s1 = deriv.smoothed_increment
    s2 = deriv.smoothed_second_diff
    n = s1.size
    flags = np.zeros(n, dtype=bool)
    running_max = -np.inf
    for pos in range(n):
        if np.isnan(s1[pos]):
            continue
        running_max = max(running_max, s1[pos])
        window = s2[pos - k_consecutive + 1 : pos + 1]
        if (
            pos - k_consecutive + 1 >= 0
            and window.size == k_consecutive
            and not np.any(np.isnan(window))
            and np.all(window < 0)
            and s1[pos] < running_max
        ):
            flags[pos] = True
    return flags


def readiness(series: CaseSeries, k_consecutive: int = 2) -> ReadinessVerdict:
    """Decide whether the series supports issuing a logistic forecast.

    Advisory only: forecasting may be attempted regardless, but fits are
    expected to fail while the curve still grows super-linearly.
    """
    if len(series) < 5:
        raise SeriesTooShortError(f"need >= 5 days for smoothed values, got {len(series)}")
    deriv = derivatives(series)
    flags = ready_flags(deriv, k_consecutive)
    if flags.any():
        first = int(deriv.day_index[int(np.argmax(flags))])
        return ReadinessVerdict(
            ready=True,
            first_ready_day=first,
            consecutive_negative_days_required=k_consecutive,
            explanation=(
                f"smoothed concavity negative for {k_consecutive} consecutive days "
                f"with a declining smoothed growth rate, first on day {first}"
            ),
        )
    s2 = deriv.smoothed_second_diff
    defined = ~np.isnan(s2)
    neg_runs = _longest_negative_run(s2[defined]) if defined.any() else 0
    if neg_runs < k_consecutive:
        why = (
            f"smoothed concavity never stayed negative for {k_consecutive} consecutive "
            f"days (longest negative run: {neg_runs}); growth still looks exponential"
        )
    else:
        why = "smoothed growth rate was still at its running maximum on every candidate day"
    return ReadinessVerdict(
        ready=False,
        first_ready_day=None,
        consecutive_negative_days_required=k_consecutive,
        explanation=why,
    )


def _longest_negative_run(values: np.ndarray) -> int:
    best = run = 0
    for v in values:
        run = run + 1 if v < 0 else 0
        best = max(best, run)
    return best
