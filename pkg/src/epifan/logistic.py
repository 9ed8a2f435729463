"""Logistic growth model: rate equation, closed-form trajectory, doubling time.

The rate equation is dE/dt = alpha*E - beta*E^2 + gamma.  For beta > 0 and a
non-negative discriminant alpha^2 + 4*beta*gamma it has two equilibria; the
larger one is the asymptote the cumulative count saturates at.  The closed
form interpolates between the equilibria with a sigmoid whose coefficients
follow from the parameters and the anchor value at t = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NotLogisticError(ValueError):
    """beta <= 0: the rate equation has unbounded growth, no saturating curve."""


class NoRealAsymptoteError(ValueError):
    """Negative discriminant: the rate parabola has no real roots."""


class SaturatedStartError(ValueError):
    """The anchor value already sits at or above the asymptote."""


class UndefinedDoublingTimeError(ValueError):
    """Non-positive instantaneous growth rate: the count is not doubling."""


@dataclass(frozen=True)
class LogisticParams:
    """Coefficients of the rate equation dE/dt = alpha*E - beta*E^2 + gamma."""

    alpha: float  # 1/day
    beta: float   # 1/(day*cases)
    gamma: float  # cases/day

    def rate(self, value):
        """dE/dt at the given count."""
        e = np.asarray(value, dtype=float)
        out = self.alpha * e - self.beta * e * e + self.gamma
        return float(out) if np.isscalar(value) else out

    @property
    def discriminant(self) -> float:
        return self.alpha * self.alpha + 4.0 * self.beta * self.gamma


@dataclass(frozen=True)
class LogisticSolution:
    """Closed-form trajectory derived from LogisticParams and an anchor value.

    asymptote    largest root of the rate parabola (cases)
    source_rate  the constant term gamma (cases/day)
    saturation_rate  beta * asymptote (1/day)
    growth_rate  exponent of the sigmoid, sqrt(discriminant) (1/day)
    phase_coeff  sigmoid offset fixed by the anchor value (dimensionless)
    initial_value  trajectory value at t = 0 (cases)
    origin_day   day index where t = 0, so forecasts share the data's day axis
    """

    asymptote: float
    source_rate: float
    saturation_rate: float
    growth_rate: float
    phase_coeff: float
    initial_value: float
    origin_day: int

    @property
    def _depletion(self) -> float:
        # multiplier on the sigmoid, 1 + S/(a*Einf); equals growth_rate/saturation_rate
        if self.source_rate == 0.0:
            return 1.0
        return 1.0 + self.source_rate / (self.saturation_rate * self.asymptote)


def derive_solution(params: LogisticParams, initial_value: float, origin_day: int = 0) -> LogisticSolution:
    """Build the closed-form solution anchored at `initial_value` on `origin_day`."""
    if params.beta <= 0:
        raise NotLogisticError(f"beta={params.beta!r} <= 0 gives unbounded growth")
    disc = params.discriminant
    if disc < 0:
        raise NoRealAsymptoteError(f"discriminant {disc!r} < 0: no real asymptote")
    asymptote = (params.alpha + np.sqrt(disc)) / (2.0 * params.beta)
    if initial_value >= asymptote:
        raise SaturatedStartError(
            f"initial value {initial_value!r} is not below the asymptote {asymptote!r}"
        )
    saturation_rate = params.beta * asymptote
    source_rate = params.gamma
    growth_rate = saturation_rate + (source_rate / asymptote if asymptote != 0 else 0.0)
    shifted = initial_value + (source_rate / saturation_rate if source_rate != 0.0 else 0.0)
    phase_coeff = shifted / (asymptote - initial_value)
    return LogisticSolution(
        asymptote=float(asymptote),
        source_rate=float(source_rate),
        saturation_rate=float(saturation_rate),
        growth_rate=float(growth_rate),
        phase_coeff=float(phase_coeff),
        initial_value=float(initial_value),
        origin_day=origin_day,
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def evaluate(sol: LogisticSolution, t) -> float | np.ndarray:
    """Trajectory value at `t` days past the origin day.

    evaluate(sol, 0) reproduces the anchor value to machine precision and the
    curve tends to the asymptote as t grows, with no overflow for any finite t.
    """
    scalar = np.isscalar(t) or np.ndim(t) == 0
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if sol.phase_coeff > 0:
        z = sol.growth_rate * t_arr + np.log(sol.phase_coeff)
        u = _sigmoid(-z)
    elif sol.phase_coeff == 0:
        u = np.ones_like(t_arr)
    else:
        with np.errstate(over="ignore"):
            u = 1.0 / (1.0 + sol.phase_coeff * np.exp(sol.growth_rate * t_arr))
    values = sol.asymptote * (1.0 - sol._depletion * u)
    return float(values[0]) if scalar else values


def evaluate_normalized(sol: LogisticSolution, t) -> float | np.ndarray:
    """Trajectory as a fraction of the asymptote."""
    return evaluate(sol, t) / sol.asymptote


def doubling_time(params: LogisticParams, count: float) -> float:
    """Days for the count to double at its current relative growth rate.

    Uses ln(2)/(alpha + gamma/E); the quadratic damping term plays no role in
    this diagnostic, which matches how the growth-rate summary is defined.
    """
    if count <= 0:
        raise ValueError(f"count must be positive, got {count!r}")
    denom = params.alpha + params.gamma / count
    if denom <= 0:
        raise UndefinedDoublingTimeError(
            f"relative growth rate {denom!r} is not positive at count {count!r}"
        )
    return float(np.log(2.0) / denom)


def integrate_ode(
    params: LogisticParams, initial_value: float, t_end: float, step: float
) -> tuple[np.ndarray, np.ndarray]:
    """Classical 4th-order Runge-Kutta integration of the rate equation.

    Serves as the independent numerical oracle for `evaluate`.  Returns the
    sample times (0, step, 2*step, ..., t_end; the final step is shortened to
    land exactly on t_end) and the trajectory values.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step!r}")
    times = [0.0]
    values = [float(initial_value)]
    t, e = 0.0, float(initial_value)
    alpha, beta, gamma = params.alpha, params.beta, params.gamma

    def f(value: float) -> float:
        return alpha * value - beta * value * value + gamma

    while t < t_end:
        h = min(step, t_end - t)
        k1 = f(e)
        k2 = f(e + 0.5 * h * k1)
        k3 = f(e + 0.5 * h * k2)
        k4 = f(e + h * k3)
        e += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        t += h
        times.append(t)
        values.append(e)
    return np.asarray(times), np.asarray(values)
