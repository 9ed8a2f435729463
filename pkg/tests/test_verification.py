import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epifan.dataio import CaseSeries, bundled_dataset, qc_correct
from epifan.ensemble import EnsembleConfig, FanPoint, generate
from epifan.fitting import fit, fit_quality
from epifan.logistic import evaluate
from epifan.verification import (
    RangeMismatchError,
    verify_deterministic,
    verify_ensemble,
)


def china():
    corrected, _ = qc_correct(bundled_dataset("china"))
    return corrected


def china_forecast(seed=0, issuance=25, horizon=20, **overrides):
    cfg = EnsembleConfig(issuance_day=issuance, horizon_days=horizon, seed=seed, **overrides)
    return generate(china(), cfg)


def widen(forecast, amount):
    fan = tuple(
        FanPoint(p.minimum - amount, p.q25, p.median, p.q75, p.maximum + amount)
        for p in forecast.fan
    )
    return dataclasses.replace(forecast, fan=fan)


class TestVerifyDeterministic:
    def test_perfect_forecast(self):
        result = fit(china(), 45)
        days = np.arange(0.0, 46.0)
        curve = evaluate(result.solution, days - result.solution.origin_day)
        self_series = CaseSeries("self", 0, np.maximum(curve, 0.0))
        report = verify_deterministic(result, self_series, (1, 45))
        assert report.rmse == pytest.approx(0.0, abs=1e-9 * result.asymptote)
        assert report.correlation == pytest.approx(1.0)
        assert report.minmax_coverage is None

    def test_constant_observations_flagged(self):
        result = fit(china(), 45)
        flat = CaseSeries("flat", 0, np.full(46, 1000.0))
        report = verify_deterministic(result, flat, (1, 45))
        assert report.correlation is None
        assert report.rmse > 0

    def test_china_day25_high_correlation(self):
        report = verify_deterministic(fit(china(), 25), china(), (1, 45))
        assert report.correlation >= 0.99
        assert report.n_days == 45

    def test_matches_fit_quality(self):
        result = fit(china(), 45)
        report = verify_deterministic(result, china(), (1, 45))
        rmse, corr = fit_quality(result, china(), (1, 45))
        assert report.rmse == rmse
        assert report.correlation == corr


class TestVerifyEnsemble:
    def test_china_day25_full_coverage(self):
        report = verify_ensemble(china_forecast(), china(), (26, 45))
        assert report.minmax_coverage == 1.0
        assert report.n_days == 20
        assert report.iqr_coverage <= report.minmax_coverage

    def test_degenerate_ensemble_equals_deterministic_scores(self):
        forecast = china_forecast(sigma_scale=0.0, n_lag_forward=0, n_lag_backward=0)
        report = verify_ensemble(forecast, china(), (26, 45))
        rmse, corr = fit_quality(fit(china(), 25), china(), (26, 45))
        assert report.rmse == pytest.approx(rmse, rel=1e-12)
        assert report.correlation == pytest.approx(corr, rel=1e-12)

    def test_observation_on_the_band_edge_counts_as_covered(self):
        forecast = china_forecast(sigma_scale=0.0, n_lag_forward=0, n_lag_backward=0)
        fan = forecast.fan_array()
        exact = CaseSeries("edge", int(forecast.days[0]), fan[:, 0])
        report = verify_ensemble(forecast, exact, (26, 45))
        assert report.minmax_coverage == 1.0
        assert report.iqr_coverage == 1.0
        assert report.rmse == pytest.approx(0.0, abs=1e-9)

    @given(st.floats(min_value=0.0, max_value=1e5), st.floats(min_value=0.0, max_value=1e5))
    @settings(max_examples=40, deadline=None)
    def test_widening_the_fan_never_reduces_coverage(self, small, large):
        lo, hi = sorted((small, large))
        forecast = china_forecast(seed=3, issuance=22, horizon=23)
        narrow = verify_ensemble(widen(forecast, lo), china(), (23, 45))
        wide = verify_ensemble(widen(forecast, hi), china(), (23, 45))
        assert wide.minmax_coverage >= narrow.minmax_coverage

    def test_range_errors(self):
        forecast = china_forecast()
        with pytest.raises(RangeMismatchError):
            verify_ensemble(forecast, china(), (26, 60))  # beyond the fan
        with pytest.raises(RangeMismatchError):
            verify_ensemble(forecast, china().through(30), (26, 40))  # beyond observations
        with pytest.raises(RangeMismatchError):
            verify_ensemble(forecast, china(), (30, 26))  # empty
