"""Stochastically perturbed, lag-shifted ensemble of growth-curve forecasts.

Thirty copies of the training data are perturbed with Gaussian noise whose
scale follows the series' own day-to-day variability, ten of them are shifted
one day forward and ten one day back to absorb reporting-timing error, each
copy is refitted, and the member curves are reduced to a per-day
(min, q25, median, q75, max) fan on the shared day axis.

Noise is applied to the daily increments, which are then re-accumulated.
Perturbing the cumulative values directly makes the implied daily counts
jump by the full cumulative scale and the refits lose the curve shape; the
increment form keeps the perturbed series an actual outbreak trajectory.

Members are kept when their fitted curve is mathematically able to forecast
growth (positive damping, real asymptote not yet reached, non-negative
initial rate).  The stricter deterministic-fit screens (asymptote below the
observed maximum, bend not yet in data) intentionally do not apply: members
expressing "the count saturates about here" or "the bend is barely visible"
are legitimate ensemble diversity, and near-saturated series such as the
South Korea case produce most of their members below the last observation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataio import CaseSeries
from .fitting import FitResult, fit
from .logistic import LogisticParams, derive_solution, evaluate


class EnsembleCollapseError(RuntimeError):
    """Fewer than two ensemble members produced usable forecasts."""

    def __init__(self, message: str, member_reasons: tuple[str, ...] = ()):
        super().__init__(message)
        self.member_reasons = member_reasons


@dataclass(frozen=True)
class EnsembleConfig:
    issuance_day: int
    horizon_days: int
    n_members: int = 30
    n_lag_forward: int = 10
    n_lag_backward: int = 10
    sigma_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if min(self.n_members, self.n_lag_forward, self.n_lag_backward) < 0:
            raise ValueError("member counts must be non-negative")
        if self.n_lag_forward + self.n_lag_backward > self.n_members:
            raise ValueError("lagged members cannot outnumber the ensemble")
        if self.sigma_scale < 0:
            raise ValueError("sigma_scale must be non-negative")
        if self.horizon_days < 1:
            raise ValueError("horizon_days must be >= 1")

    @property
    def shifts(self) -> tuple[int, ...]:
        plain = self.n_members - self.n_lag_forward - self.n_lag_backward
        return (0,) * plain + (1,) * self.n_lag_forward + (-1,) * self.n_lag_backward

    @property
    def forecast_days(self) -> np.ndarray:
        return np.arange(self.issuance_day + 1, self.issuance_day + self.horizon_days + 1)


@dataclass(frozen=True)
class PerturbationSpec:
    """Pre-generated noise for every member and training day.

    fractional_increments holds (E(d) - E(d-1)) / E(d-1) for the days where
    the previous count is positive; sigma is their sample standard deviation
    and noise_scale = sigma_scale * sigma is the standard deviation of every
    draw.  draws[j, p] belongs to member j and training position p, generated
    in one member-major pass from the seed so that results cannot depend on
    member execution order.
    """

    fractional_increments: np.ndarray
    sigma: float
    noise_scale: float
    draws: np.ndarray


def perturbation_spec(series: CaseSeries, config: EnsembleConfig) -> PerturbationSpec:
    train = series.through(config.issuance_day)
    cum = train.cumulative
    prev, cur = cum[:-1], cum[1:]
    usable = prev > 0
    pair_days = train.day_index[1:]
    if np.any(~usable & (pair_days > 1)):
        warnings.warn(
            "zero cumulative counts after day 1: those days are skipped in the "
            "fractional-increment statistics",
            stacklevel=2,
        )
    fractional = (cur[usable] - prev[usable]) / prev[usable]
    if fractional.size < 2:
        raise ValueError("need at least two fractional increments to estimate spread")
    sigma = float(np.std(fractional, ddof=1))
    noise_scale = config.sigma_scale * sigma
    rng = np.random.default_rng(config.seed)
    draws = rng.normal(loc=0.0, scale=noise_scale, size=(config.n_members, len(cum)))
    return PerturbationSpec(
        fractional_increments=fractional,
        sigma=sigma,
        noise_scale=noise_scale,
        draws=draws,
    )


def perturb_series(series: CaseSeries, member_index: int, spec: PerturbationSpec) -> CaseSeries:
    """Member copy of the training data with its noise applied.

    Each daily increment is multiplied by (1 + r) with that member's and
    day's draw; the cumulative column is re-accumulated and floored at zero.
    The result is handed to the fitter as-is: local decreases are possible
    and the regression tolerates them.
    """
    n = spec.draws.shape[1]
    if len(series) != n:
        raise ValueError(f"series length {len(series)} does not match draws ({n})")
    increments = series.increments * (1.0 + spec.draws[member_index])
    cumulative = np.maximum(np.cumsum(increments), 0.0)
    return CaseSeries(series.country_label, series.first_day, cumulative, series.dates)


def lag_shift(series: CaseSeries, shift: int) -> CaseSeries:
    """Relabel every observation's day by `shift` days; values unchanged."""
    if abs(shift) > 1:
        raise ValueError(f"shift must be -1, 0 or +1, got {shift}")
    if shift == 0:
        return series
    return CaseSeries(
        series.country_label, series.first_day + shift, series.cumulative, series.dates
    )


@dataclass(frozen=True)
class MemberOutcome:
    member_index: int
    shift: int
    ok: bool
    reason: str
    params: LogisticParams | None = None
    curve: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class FanPoint:
    minimum: float
    q25: float
    median: float
    q75: float
    maximum: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.minimum, self.q25, self.median, self.q75, self.maximum)


@dataclass(frozen=True)
class EnsembleForecast:
    issuance_day: int
    days: np.ndarray
    fan: tuple[FanPoint, ...]
    members: tuple[MemberOutcome, ...]

    @property
    def n_failed(self) -> int:
        return sum(not m.ok for m in self.members)

    def fan_array(self) -> np.ndarray:
        """Rows are days, columns (min, q25, median, q75, max)."""
        return np.asarray([p.as_tuple() for p in self.fan])


def quantile_fan(member_values) -> FanPoint:
    """Five-point summary of one day's member values.

    Quartiles and the median interpolate linearly between order statistics
    (rank position p*(n-1), zero-based); the extremes are exact.
    """
    values = np.asarray(member_values, dtype=float)
    if values.size < 2:
        raise ValueError("need at least two member values")
    if not np.all(np.isfinite(values)):
        raise ValueError("member values must be finite")
    q25, median, q75 = np.quantile(values, [0.25, 0.5, 0.75])
    return FanPoint(
        minimum=float(values.min()),
        q25=float(q25),
        median=float(median),
        q75=float(q75),
        maximum=float(values.max()),
    )


def member_forecastable(params: LogisticParams, initial_value: float) -> str:
    """Reason an ensemble member cannot forecast, or '' when it can.

    Requires positive damping, a real not-yet-reached asymptote with a
    positive approach rate, and a non-negative growth rate at the anchor
    value (otherwise the curve would shrink away from the data).
    """
    if params.beta <= 0:
        return "NotLogistic"
    disc = params.discriminant
    if disc < 0:
        return "NoRealAsymptote"
    growth_rate = float(np.sqrt(disc))
    asymptote = (params.alpha + growth_rate) / (2.0 * params.beta)
    if initial_value >= asymptote or growth_rate <= 0:
        return "SaturatedStart"
    if params.rate(initial_value) < 0:
        return "ShrinkingStart"
    return ""


def generate(series: CaseSeries, config: EnsembleConfig) -> EnsembleForecast:
    """Build the full ensemble forecast for one issuance day.

    The series must already be quality-controlled and cover the issuance
    day.  The result is a pure function of (series, config): all noise is
    drawn up front from the seed.
    """
    train = series.through(config.issuance_day)
    if train.last_day < config.issuance_day:
        raise ValueError(
            f"series ends on day {train.last_day}, before issuance day {config.issuance_day}"
        )
    spec = perturbation_spec(train, config)
    days = config.forecast_days
    members: list[MemberOutcome] = []
    for j, shift in enumerate(config.shifts):
        member_series = lag_shift(perturb_series(train, j, spec), shift)
        try:
            result: FitResult = fit(member_series)
        except (ValueError, np.linalg.LinAlgError) as exc:
            members.append(MemberOutcome(j, shift, ok=False, reason=type(exc).__name__))
            continue
        first_pos = int(np.nonzero(member_series.cumulative > 0)[0][0])
        origin_day = member_series.first_day + first_pos
        initial_value = float(member_series.cumulative[first_pos])
        why_not = member_forecastable(result.params, initial_value)
        if why_not:
            members.append(
                MemberOutcome(j, shift, ok=False, reason=why_not, params=result.params)
            )
            continue
        solution = derive_solution(result.params, initial_value, origin_day)
        curve = evaluate(solution, days - origin_day)
        members.append(
            MemberOutcome(j, shift, ok=True, reason="", params=result.params, curve=curve)
        )
    good = [m.curve for m in members if m.ok]
    if len(good) < 2:
        reasons = tuple(m.reason for m in members if not m.ok)
        raise EnsembleCollapseError(
            f"only {len(good)} of {config.n_members} members produced usable fits",
            member_reasons=reasons,
        )
    stacked = np.vstack(good)
    fan = tuple(quantile_fan(stacked[:, i]) for i in range(stacked.shape[1]))
    return EnsembleForecast(
        issuance_day=config.issuance_day, days=days, fan=fan, members=tuple(members)
    )
