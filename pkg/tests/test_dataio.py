import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epifan.dataio import (
    CaseSeries,
    CsvParseError,
    DATASET_NAMES,
    StructureError,
    UnknownDatasetError,
    bundled_dataset,
    parse_csv,
    qc_correct,
    render_csv,
)


def make_series(increments, first_day=0, label="test"):
    return CaseSeries(label, first_day, np.cumsum([0.0] + list(increments)))


class TestBundledDatasets:
    def test_china_is_raw_as_first_reported(self):
        china = bundled_dataset("china")
        assert len(china) == 46
        assert china.first_day == 0
        assert china.increments[22] == 15200
        assert china.cumulative[22] == 44548 + 15200 == 59748
        assert china.cumulative[45] == 80682

    def test_italy(self):
        italy = bundled_dataset("italy")
        assert len(italy) == 33
        assert italy.value_at(32) == 69176

    def test_south_korea(self):
        korea = bundled_dataset("south_korea")
        assert len(korea) == 34
        assert korea.value_at(33) == 9018

    def test_uk(self):
        uk = bundled_dataset("uk")
        assert len(uk) == 27
        assert uk.value_at(26) == 6637

    def test_unknown_name_lists_valid_ones(self):
        with pytest.raises(UnknownDatasetError) as exc:
            bundled_dataset("france")
        for name in DATASET_NAMES:
            assert name in str(exc.value)

    def test_day_zero_convention(self):
        for name in DATASET_NAMES:
            series = bundled_dataset(name)
            assert series.cumulative[0] == 0
            assert series.cumulative[1] > 0


class TestParseCsv:
    def test_corrected_china_table_values(self):
        # the published table reflects the outlier correction
        corrected, _ = qc_correct(bundled_dataset("china"))
        reparsed = parse_csv(render_csv(corrected), "china")
        assert reparsed.value_at(45) == 68482
        assert reparsed.value_at(22) == 47548

    def test_header_only_is_structural_error(self):
        with pytest.raises(StructureError, match="no data rows"):
            parse_csv("date,day,confirmed,cumulative\n")

    def test_day_gap_is_structural_error(self):
        text = "date,day,confirmed,cumulative\n,0,0,0\n,2,5,5\n"
        with pytest.raises(StructureError, match="consecutive"):
            parse_csv(text)

    def test_malformed_row_reports_line_number(self):
        text = "date,day,confirmed,cumulative\n,0,0,0\n,1,oops,10\n"
        with pytest.raises(CsvParseError, match="line 3"):
            parse_csv(text)

    def test_negative_cumulative_is_value_error(self):
        text = "date,day,confirmed,cumulative\n,0,0,0\n,1,5,-5\n"
        with pytest.raises(ValueError, match="negative"):
            parse_csv(text)

    def test_bad_header(self):
        with pytest.raises(CsvParseError, match="header"):
            parse_csv("day,cumulative\n0,0\n")

    def test_decimal_day_labels_truncate(self):
        text = "date,day,confirmed,cumulative\n2020-01-22,0.00,0,0\n2020-01-23,1.00,3,3\n"
        series = parse_csv(text)
        assert list(series.day_index) == [0, 1]

    def test_confirmed_mismatch_warns_but_cumulative_wins(self):
        text = "date,day,confirmed,cumulative\n,0,0,0\n,1,99,10\n,2,5,15\n"
        with pytest.warns(UserWarning, match="cumulative is authoritative"):
            series = parse_csv(text)
        assert series.increments[1] == 10

    @pytest.mark.parametrize("name", DATASET_NAMES)
    def test_render_round_trip(self, name):
        series = bundled_dataset(name)
        assert parse_csv(render_csv(series), name) == series


class TestCaseSeries:
    def test_increments_match_differences_exactly(self):
        series = bundled_dataset("italy")
        diffs = np.diff(series.cumulative)
        assert np.array_equal(series.increments[1:], diffs)

    def test_through_truncates(self):
        series = bundled_dataset("uk")
        head = series.through(10)
        assert head.last_day == 10
        assert head.value_at(10) == series.value_at(10)

    def test_value_at_outside_range(self):
        with pytest.raises(KeyError):
            bundled_dataset("uk").value_at(99)


class TestQcCorrect:
    def test_china_day22_is_the_only_correction(self):
        corrected, report = qc_correct(bundled_dataset("china"))
        assert len(report.corrected_days) == 1
        fix = report.corrected_days[0]
        assert fix.day == 22
        assert fix.original_increment == 15200
        assert fix.replacement_increment == 3000  # mean of 2,000 and 4,000
        assert corrected.value_at(22) == 47548
        assert corrected.value_at(45) == 68482

    def test_constant_increments_untouched(self):
        series = make_series([100] * 10)
        corrected, report = qc_correct(series)
        assert not report
        assert corrected == series

    def test_single_spike_replaced_by_neighbour_mean(self):
        series = make_series([100, 100, 1000, 100, 100])
        corrected, report = qc_correct(series)
        assert [c.day for c in report.corrected_days] == [3]
        assert report.corrected_days[0].replacement_increment == 100
        assert corrected.increments[3] == 100

    def test_threshold_is_configurable(self):
        series = make_series([100, 100, 250, 100, 100])
        _, loose = qc_correct(series, ratio_threshold=3.0)
        _, tight = qc_correct(series, ratio_threshold=2.0)
        assert not loose
        assert len(tight.corrected_days) == 1

    def test_too_short(self):
        with pytest.raises(StructureError):
            qc_correct(make_series([5]))

    @pytest.mark.parametrize("name", DATASET_NAMES)
    def test_idempotent_on_bundled_data(self, name):
        once, _ = qc_correct(bundled_dataset(name))
        twice, second_report = qc_correct(once)
        assert not second_report
        assert twice == once

    @pytest.mark.parametrize("name", DATASET_NAMES)
    def test_preserves_monotonicity(self, name):
        corrected, _ = qc_correct(bundled_dataset(name))
        assert np.all(np.diff(corrected.cumulative) >= 0)

    @given(
        st.lists(st.integers(min_value=50, max_value=150), min_size=5, max_size=40),
        st.data(),
    )
    @settings(max_examples=150)
    def test_idempotent_when_spikes_are_isolated(self, increments, data):
        # isolated spikes are corrected to their neighbour mean, which then
        # sits below threshold; adjacent spikes are outside the guarantee
        spike_pos = data.draw(st.integers(min_value=1, max_value=len(increments) - 2))
        increments[spike_pos] *= data.draw(st.integers(min_value=1, max_value=50))
        series = make_series(increments)
        once, _ = qc_correct(series)
        twice, second_report = qc_correct(once)
        assert not second_report
        assert twice == once
        assert np.all(np.diff(once.cumulative) >= 0)
