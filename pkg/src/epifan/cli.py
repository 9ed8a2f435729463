"""Command-line front end: ingest, quality-control, diagnose, fit, forecast, verify.

Subcommands
    datasets   list the bundled country datasets
    fit        deterministic fit up to the issuance day, JSON report
    diagnose   per-day derivative/readiness CSV for plotting
    forecast   ensemble fan forecast; writes fan CSV/JSON, member CSV and a
               gnuplot-ready data file
    verify     ensemble forecast scored against the held-out observations

Forecasting refuses a series whose readiness check fails: before the
observed curve shows a sustained concavity change the fits extrapolate a
bend they never saw, which is the regime where the published-case forecasts
could not be generated.  Exit codes: 0 ok, 2 usage, 3 bad data, 4 forecast
refused or collapsed, 5 output I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataio, diagnostics, ensemble, fitting, verification

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_FORECAST = 4
EXIT_IO = 5


@dataclass(frozen=True)
class RunConfig:
    dataset: str | None = None
    input: str | None = None
    issuance_day: int | None = None
    horizon: int = 30
    members: int = 30
    lag_forward: int = 10
    lag_backward: int = 10
    sigma_scale: float = 0.1
    seed: int = 0
    qc_threshold: float = 3.0
    readiness_k: int = 2
    format: str = "json"
    out_dir: str = "."

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def load_series(config: RunConfig) -> tuple[dataio.CaseSeries, dataio.QcReport]:
    """Ingest the configured dataset or CSV file and quality-control it."""
    if (config.dataset is None) == (config.input is None):
        raise UsageError("exactly one of --dataset and --input is required")
    if config.dataset is not None:
        series = dataio.bundled_dataset(config.dataset)
    else:
        series = dataio.parse_csv(Path(config.input).read_text(), Path(config.input).stem)
    return dataio.qc_correct(series, config.qc_threshold)


class UsageError(ValueError):
    pass


def run_forecast(series: dataio.CaseSeries, config: RunConfig) -> ensemble.EnsembleForecast:
    """Readiness-gated ensemble forecast on a quality-controlled series.

    Raises EnsembleCollapseError when the data through the issuance day is
    not ready, carrying the readiness explanation, or when too few members
    fit.
    """
    issuance = config.issuance_day if config.issuance_day is not None else series.last_day
    train = series.through(issuance)
    verdict = diagnostics.readiness(train, config.readiness_k)
    if not verdict.ready:
        raise ensemble.EnsembleCollapseError(
            f"series not ready for forecasting: {verdict.explanation}"
        )
    return ensemble.generate(
        series,
        ensemble.EnsembleConfig(
            issuance_day=issuance,
            horizon_days=config.horizon,
            n_members=config.members,
            n_lag_forward=config.lag_forward,
            n_lag_backward=config.lag_backward,
            sigma_scale=config.sigma_scale,
            seed=config.seed,
        ),
    )


def _jsonify(value):
    if isinstance(value, float):
        return None if math.isnan(value) else value
    if isinstance(value, np.generic):
        return _jsonify(value.item())
    if isinstance(value, np.ndarray):
        return [_jsonify(v) for v in value.tolist()]
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {k: _jsonify(v) for k, v in dataclasses.asdict(value).items()}
    if isinstance(value, dict):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return value


def _dump_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(_jsonify(payload), sort_keys=True, indent=2) + "\n")


def _qc_payload(report: dataio.QcReport) -> dict:
    return {
        "threshold_used": report.threshold_used,
        "corrected_days": [dataclasses.asdict(c) for c in report.corrected_days],
    }


def _label(config: RunConfig) -> str:
    return config.dataset or Path(config.input).stem


def _out_dir(config: RunConfig) -> Path:
    path = Path(config.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_report(payload: dict, config: RunConfig, stem: str) -> Path:
    """JSON by default; --format csv flattens the payload to key,value rows."""
    out_dir = _out_dir(config)
    if config.format == "csv":
        out = out_dir / f"{stem}.csv"
        rows = ["key,value"]
        _flatten(_jsonify(payload), "", rows)
        out.write_text("\n".join(rows) + "\n")
    else:
        out = out_dir / f"{stem}.json"
        _dump_json(payload, out)
    return out


def _flatten(value, prefix: str, rows: list[str]) -> None:
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(value[k], f"{prefix}{k}.", rows)
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _flatten(item, f"{prefix}{i}.", rows)
    else:
        rows.append(f"{prefix.rstrip('.')},{value}")


def cmd_datasets(_: RunConfig) -> int:
    print(f"{'name':<12} {'days':>5} {'last_day':>8} {'last_cumulative':>16}")
    for name in dataio.DATASET_NAMES:
        series = dataio.bundled_dataset(name)
        print(
            f"{name:<12} {len(series):>5} {series.last_day:>8} "
            f"{int(series.cumulative[-1]):>16}"
        )
    return EXIT_OK


def cmd_fit(config: RunConfig) -> int:
    series, qc_report = load_series(config)
    issuance = config.issuance_day if config.issuance_day is not None else series.last_day
    result = fitting.fit(series, last_day=issuance)
    payload: dict = {
        "config": config.to_dict(),
        "qc": _qc_payload(qc_report),
        "params": dataclasses.asdict(result.params),
        "training_range": list(result.training_range),
        "residual_rms": result.residual_rms,
        "valid_for_forecast": result.valid_for_forecast,
        "reason": result.reason,
        "solution": dataclasses.asdict(result.solution) if result.solution else None,
    }
    if result.valid_for_forecast:
        lo = result.training_range[0]
        rmse, corr = fitting.fit_quality(result, series, (lo, issuance))
        payload["rmse"] = rmse
        payload["correlation"] = corr
    out = _write_report(payload, config, f"{_label(config)}_fit")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_diagnose(config: RunConfig) -> int:
    series, qc_report = load_series(config)
    issuance = config.issuance_day if config.issuance_day is not None else series.last_day
    train = series.through(issuance)
    deriv = diagnostics.derivatives(train)
    flags = diagnostics.ready_flags(deriv, config.readiness_k)
    verdict = diagnostics.readiness(train, config.readiness_k)
    lines = ["day,increment,second_diff,smoothed_increment,smoothed_second_diff,ready"]
    for i, day in enumerate(deriv.day_index):
        cells = [
            _csv_num(deriv.increment[i]),
            _csv_num(deriv.second_diff[i]),
            _csv_num(deriv.smoothed_increment[i]),
            _csv_num(deriv.smoothed_second_diff[i]),
            str(bool(flags[i])).lower(),
        ]
        lines.append(f"{day}," + ",".join(cells))
    out = _out_dir(config) / f"{_label(config)}_diagnostics.csv"
    out.write_text("\n".join(lines) + "\n")
    state = "ready" if verdict.ready else "not ready"
    print(f"wrote {out} ({state}: {verdict.explanation})")
    if qc_report:
        print(f"qc corrected {len(qc_report.corrected_days)} day(s)")
    return EXIT_OK


def _csv_num(value: float) -> str:
    if np.isnan(value):
        return ""
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def cmd_forecast(config: RunConfig) -> int:
    series, qc_report = load_series(config)
    forecast = run_forecast(series, config)
    label = _label(config)
    out_dir = _out_dir(config)
    fan = forecast.fan_array()

    fan_lines = ["day,min,q25,median,q75,max"]
    for i, day in enumerate(forecast.days):
        fan_lines.append(f"{day}," + ",".join(repr(float(v)) for v in fan[i]))
    (out_dir / f"{label}_fan.csv").write_text("\n".join(fan_lines) + "\n")

    member_lines = ["member,shift,day,value"]
    for m in forecast.members:
        if not m.ok:
            continue
        for day, value in zip(forecast.days, m.curve):
            member_lines.append(f"{m.member_index},{m.shift},{day},{float(value)!r}")
    (out_dir / f"{label}_members.csv").write_text("\n".join(member_lines) + "\n")

    _write_plot_data(out_dir / f"{label}_plot.dat", series, forecast)

    payload = {
        "config": config.to_dict(),
        "qc": _qc_payload(qc_report),
        "issuance_day": forecast.issuance_day,
        "n_failed": forecast.n_failed,
        "member_params": [
            {
                "member": m.member_index,
                "shift": m.shift,
                "ok": m.ok,
                "reason": m.reason,
                "params": dataclasses.asdict(m.params) if m.params else None,
            }
            for m in forecast.members
        ],
        "fan": [
            {"day": int(day), **dict(zip(("min", "q25", "median", "q75", "max"), point))}
            for day, point in zip(forecast.days, fan.tolist())
        ],
    }
    out = out_dir / f"{label}_forecast.json"
    _dump_json(payload, out)
    print(f"wrote {out} (+fan/members CSV, plot data); {forecast.n_failed} member(s) failed")
    return EXIT_OK


def _write_plot_data(
    path: Path, series: dataio.CaseSeries, forecast: ensemble.EnsembleForecast
) -> None:
    """Gnuplot-ready columns: observations split into used/held-out, then the fan.

    Missing cells are "-"; plot with `set datafile missing "-"`.
    """
    fan = forecast.fan_array()
    first = min(series.first_day, int(forecast.days[0]))
    last = max(series.last_day, int(forecast.days[-1]))
    lines = ["# day obs_used obs_heldout fan_min fan_q25 fan_median fan_q75 fan_max"]
    for day in range(first, last + 1):
        cells = [str(day)]
        if series.first_day <= day <= series.last_day:
            value = series.value_at(day)
            used = day <= forecast.issuance_day
            cells.append(_plot_num(value) if used else "-")
            cells.append(_plot_num(value) if not used else "-")
        else:
            cells += ["-", "-"]
        if forecast.days[0] <= day <= forecast.days[-1]:
            cells += [_plot_num(v) for v in fan[day - int(forecast.days[0])]]
        else:
            cells += ["-"] * 5
        lines.append(" ".join(cells))
    path.write_text("\n".join(lines) + "\n")


def _plot_num(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def cmd_verify(config: RunConfig) -> int:
    series, qc_report = load_series(config)
    if config.issuance_day is None:
        raise UsageError("verify requires --issuance-day (observations after it are scored)")
    forecast = run_forecast(series, config)
    lo = forecast.issuance_day + 1
    hi = min(series.last_day, int(forecast.days[-1]))
    if hi < lo:
        raise UsageError(
            f"no held-out observations: series ends on day {series.last_day}"
        )
    report = verification.verify_ensemble(forecast, series, (lo, hi))
    payload = {
        "config": config.to_dict(),
        "qc": _qc_payload(qc_report),
        "issuance_day": forecast.issuance_day,
        "range": [lo, hi],
        "report": dataclasses.asdict(report),
    }
    out = _write_report(payload, config, f"{_label(config)}_verify")
    print(f"wrote {out}")
    return EXIT_OK


COMMANDS = {
    "datasets": cmd_datasets,
    "fit": cmd_fit,
    "diagnose": cmd_diagnose,
    "forecast": cmd_forecast,
    "verify": cmd_verify,
}

_CONFIG_TYPES = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, raw: str):
    if name in ("dataset", "input", "format", "out_dir"):
        return raw
    if name in ("sigma_scale", "qc_threshold"):
        return float(raw)
    return int(raw)


def read_config_file(path: str) -> dict:
    """key=value per line; '#' starts a comment; keys match RunConfig fields."""
    values: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = _coerce(key, raw.strip())
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epifan",
        description="Ensemble fan-chart forecasts of cumulative epidemic case counts",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value config file; flags override it")
        p.add_argument("--dataset", choices=dataio.DATASET_NAMES)
        p.add_argument("--input", help="CSV file (date,day,confirmed,cumulative)")
        p.add_argument("--issuance-day", type=int, dest="issuance_day")
        p.add_argument("--horizon", type=int)
        p.add_argument("--members", type=int)
        p.add_argument("--lag-forward", type=int, dest="lag_forward")
        p.add_argument("--lag-backward", type=int, dest="lag_backward")
        p.add_argument("--sigma-scale", type=float, dest="sigma_scale")
        p.add_argument("--seed", type=int)
        p.add_argument("--qc-threshold", type=float, dest="qc_threshold")
        p.add_argument("--readiness-k", type=int, dest="readiness_k")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--out-dir", dest="out_dir")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        values.update(read_config_file(args.config))
    for name in _CONFIG_TYPES:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = flag_value
    return RunConfig(**values)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        return COMMANDS[args.command](config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ensemble.EnsembleCollapseError as exc:
        print(f"forecast failed: {exc}", file=sys.stderr)
        return EXIT_FORECAST
    except (ValueError, LookupError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
