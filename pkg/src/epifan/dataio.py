"""Case-count series ingestion, bundled datasets, and outlier quality control.

The CSV format is `date,day,confirmed,cumulative` with one row per day.  The
cumulative column is authoritative; the confirmed (daily new cases) column is
cross-checked and a mismatch only warns.  Bundled datasets are the WHO /
Italian Civil Protection daily cumulative confirmed COVID-19 counts for
China, Italy, South Korea and the UK (Jan-Mar 2020), shipped exactly as
first reported: the China file keeps the notorious 15,200 single-day jump so
the QC correction is a live code path rather than baked-in data.
"""

from __future__ import annotations

import datetime as dt
import importlib.resources
import warnings
from dataclasses import dataclass, field

import numpy as np

DATASET_NAMES = ("china", "italy", "south_korea", "uk")

CSV_HEADER = "date,day,confirmed,cumulative"


class CsvParseError(ValueError):
    """A CSV row could not be parsed; the message carries the line number."""


class StructureError(ValueError):
    """The rows parse but do not form a usable day-indexed series."""


class UnknownDatasetError(LookupError):
    def __init__(self, name: str):
        super().__init__(
            f"unknown dataset {name!r}; available: {', '.join(DATASET_NAMES)}"
        )


@dataclass(frozen=True, eq=False)
class CaseSeries:
    """Daily cumulative confirmed-case counts on a consecutive integer day axis.

    Day 0 is the last zero-count day and day 1 the first nonzero report for
    an as-ingested outbreak series; derived series (time-shifted ensemble
    members) may start at any integer, including negative days.
    """

    country_label: str
    first_day: int
    cumulative: np.ndarray
    dates: tuple[dt.date | None, ...] | None = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.cumulative, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise StructureError("series needs a one-dimensional, non-empty cumulative column")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "cumulative", values)
        if self.dates is not None and len(self.dates) != values.size:
            raise StructureError("dates and cumulative must have equal length")

    def __len__(self) -> int:
        return self.cumulative.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, CaseSeries):
            return NotImplemented
        return (
            self.country_label == other.country_label
            and self.first_day == other.first_day
            and np.array_equal(self.cumulative, other.cumulative)
            and self.dates == other.dates
        )

    @property
    def last_day(self) -> int:
        return self.first_day + len(self) - 1

    @property
    def day_index(self) -> np.ndarray:
        return np.arange(self.first_day, self.first_day + len(self))

    @property
    def increments(self) -> np.ndarray:
        """Daily increases; entry 0 is the jump from the (implicit) value 0."""
        return np.diff(self.cumulative, prepend=0.0)

    def value_at(self, day: int) -> float:
        pos = day - self.first_day
        if not 0 <= pos < len(self):
            raise KeyError(f"day {day} outside [{self.first_day}, {self.last_day}]")
        return float(self.cumulative[pos])

    def through(self, day: int) -> "CaseSeries":
        """Sub-series of all observations up to and including `day`."""
        if day < self.first_day:
            raise StructureError(f"day {day} precedes the series start {self.first_day}")
        n = min(day, self.last_day) - self.first_day + 1
        dates = self.dates[:n] if self.dates is not None else None
        return CaseSeries(self.country_label, self.first_day, self.cumulative[:n], dates)


@dataclass(frozen=True)
class QcCorrection:
    day: int
    original_increment: float
    replacement_increment: float
    reason: str


@dataclass(frozen=True)
class QcReport:
    threshold_used: float
    corrected_days: tuple[QcCorrection, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.corrected_days)


def _parse_day(token: str, lineno: int) -> int:
    # appendix-style decimal day labels ("45.00") are truncated to integers
    try:
        value = float(token)
    except ValueError:
        raise CsvParseError(f"line {lineno}: day {token!r} is not numeric") from None
    return int(value)


def parse_csv(raw_text: str, country_label: str = "") -> CaseSeries:
    """Parse CSV content in the `date,day,confirmed,cumulative` format."""
    lines = [ln for ln in raw_text.splitlines() if ln.strip()]
    if not lines:
        raise StructureError("empty input: no header row")
    if lines[0].strip() != CSV_HEADER:
        raise CsvParseError(f"line 1: expected header {CSV_HEADER!r}, got {lines[0].strip()!r}")
    days: list[int] = []
    cumulative: list[float] = []
    confirmed: list[float] = []
    dates: list[dt.date | None] = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 4:
            raise CsvParseError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        date_token, day_token, conf_token, cum_token = parts
        if date_token:
            try:
                dates.append(dt.date.fromisoformat(date_token))
            except ValueError:
                raise CsvParseError(f"line {lineno}: bad ISO date {date_token!r}") from None
        else:
            dates.append(None)
        days.append(_parse_day(day_token, lineno))
        try:
            confirmed.append(float(conf_token))
            value = float(cum_token)
        except ValueError:
            raise CsvParseError(f"line {lineno}: non-numeric count") from None
        if value < 0:
            raise ValueError(f"line {lineno}: negative cumulative count {value}")
        cumulative.append(value)
    if not days:
        raise StructureError("no data rows (header only)")
    for prev, cur in zip(days, days[1:]):
        if cur != prev + 1:
            raise StructureError(f"day indices must be consecutive; found {prev} -> {cur}")
    series = CaseSeries(
        country_label=country_label,
        first_day=days[0],
        cumulative=np.asarray(cumulative, dtype=float),
        dates=tuple(dates),
    )
    recomputed = series.increments
    reported = np.asarray(confirmed, dtype=float)
    reported[0] = recomputed[0]  # first row has no predecessor to check against
    if not np.allclose(recomputed, reported):
        bad = int(np.argmax(~np.isclose(recomputed, reported)))
        warnings.warn(
            f"confirmed column disagrees with cumulative differences "
            f"(first mismatch on day {days[bad]}); cumulative is authoritative",
            stacklevel=2,
        )
    return series


def render_csv(series: CaseSeries) -> str:
    """Inverse of parse_csv for integer-valued series."""
    lines = [CSV_HEADER]
    incs = series.increments
    for pos, day in enumerate(series.day_index):
        date = series.dates[pos] if series.dates is not None else None
        date_token = date.isoformat() if date is not None else ""
        lines.append(
            f"{date_token},{day},{_fmt_count(incs[pos])},{_fmt_count(series.cumulative[pos])}"
        )
    return "\n".join(lines) + "\n"


def _fmt_count(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def bundled_dataset(name: str) -> CaseSeries:
    """Load one of the bundled country datasets, exactly as first reported."""
    if name not in DATASET_NAMES:
        raise UnknownDatasetError(name)
    text = (importlib.resources.files("epifan") / "data" / f"{name}.csv").read_text()
    return parse_csv(text, country_label=name)


def qc_correct(series: CaseSeries, ratio_threshold: float = 3.0) -> tuple[CaseSeries, QcReport]:
    """Replace daily increments that dwarf both neighbours.

    An interior day whose increment exceeds `ratio_threshold` times the mean
    of the two neighbouring increments (when that mean is positive) gets the
    rounded neighbour mean instead; the cumulative column is rebuilt from the
    corrected increments.  One pass over the original increments, so a
    correction never feeds into its neighbours' statistics.
    """
    if len(series) < 3:
        raise StructureError("need at least 3 days to quality-control a series")
    incs = series.increments.copy()
    corrected = incs.copy()
    corrections = []
    # interior = both neighbouring increments exist (positions 1..n-1 are real increments)
    for pos in range(2, len(incs) - 1):
        neighbour_mean = 0.5 * (incs[pos - 1] + incs[pos + 1])
        if neighbour_mean > 0 and incs[pos] > ratio_threshold * neighbour_mean:
            replacement = float(round(neighbour_mean))
            corrections.append(
                QcCorrection(
                    day=series.first_day + pos,
                    original_increment=float(incs[pos]),
                    replacement_increment=replacement,
                    reason=(
                        f"increment {incs[pos]:.0f} exceeds {ratio_threshold:g}x the "
                        f"neighbour mean {neighbour_mean:.1f}"
                    ),
                )
            )
            corrected[pos] = replacement
    if corrections:
        rebuilt = float(series.cumulative[0]) + np.concatenate(
            [[0.0], np.cumsum(corrected[1:])]
        )
        out = CaseSeries(series.country_label, series.first_day, rebuilt, series.dates)
    else:
        out = series
    return out, QcReport(threshold_used=ratio_threshold, corrected_days=tuple(corrections))
