"""End-to-end run: ingest, forecast, weight, backtest, tabulate."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import backtest as bt
from .config import RunConfig, model_label, model_slug
from .dataio import AlignedDataset, dump_aligned, load_dataset, split, write_csv
from .errors import EmptyPeriod, ZeroVolatility
from .harness import ForecastSeries, forecast, oos_r2
from .models import fit_ols, ols_inference
from .timing import WeightSeries, constant_weights, timed_weights

log = logging.getLogger(__name__)

BENCHMARK_SLUG = "constant"
BENCHMARK_LABEL = "Constant (unconditional optimal)"


@dataclass
class StrategyResult:
    slug: str
    label: str
    weights: WeightSeries
    forecast: ForecastSeries | None = None
    r2: float | None = None
    backtests: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    intervals: dict = field(default_factory=dict)


@dataclass
class RunResult:
    config: RunConfig
    dataset: AlignedDataset
    train: AlignedDataset
    test: AlignedDataset
    strategies: list[StrategyResult]
    inference: object

    def strategy(self, slug) -> StrategyResult:
        return next(s for s in self.strategies if s.slug == slug)


def _safe_metrics(report, periods, rf=None):
    out = {}
    for p in periods:
        try:
            out[p.label] = bt.subperiod_metrics(report, [p], rf)[p.label]
        except (EmptyPeriod, ZeroVolatility):
            out[p.label] = None
    return out


def run_pipeline(cfg: RunConfig) -> RunResult:
    cfg.check_paths()
    ds = load_dataset(
        cfg.data.factors, cfg.data.predictors, cfg.data.factor_unit, cfg.data.predictor_unit, cfg.data.features
    )
    train, test = split(ds, cfg.split)
    log.info("aligned %d months (%d train, %d test)", len(ds), len(train), len(test))

    realized_months = ds.months[ds.months <= cfg.split.test_end]
    realized = ds.target()[ds.months <= cfg.split.test_end]
    test_returns = test.target()
    rf = test.panel["rf"] if cfg.backtest.include_rf else None

    tr_mask = train.usable
    ols = fit_ols(train.features(tr_mask), train.target(tr_mask), ct_truncate=False)
    inference = ols_inference(ols, train.features(tr_mask), train.target(tr_mask), ds.feature_names)

    strategies = []
    for spec in cfg.models:
        log.info("forecasting with %s", spec.kind)
        fs = forecast(ds, cfg.split, spec, n_jobs=cfg.n_jobs)
        ws = timed_weights(fs, realized_months, realized, cfg.timing)
        strategies.append(StrategyResult(model_slug(spec), model_label(spec), ws, fs, oos_r2(fs)))
    strategies.append(
        StrategyResult(
            BENCHMARK_SLUG,
            BENCHMARK_LABEL,
            constant_weights(test.months, train.target(), cfg.timing, BENCHMARK_SLUG),
        )
    )

    b = cfg.backtest
    for s in strategies:
        for cost in b.costs:
            rep = bt.run_backtest(
                s.weights, test_returns, cost, 1, b.initial_wealth,
                months=test.months, rf=rf, charge_entry=b.charge_entry, label=s.slug,
            )
            s.backtests[cost.label] = rep
            s.metrics[cost.label] = _safe_metrics(rep, b.periods)
            if cost.kind != "none" and s.slug != BENCHMARK_SLUG:
                s.intervals[cost.label] = bt.select_rebalance_interval(
                    s.weights, test_returns, cost, b.rebalance_grid,
                    b.validation_fraction, b.initial_wealth, b.charge_entry,
                )
    return RunResult(cfg, ds, train, test, strategies, inference)


# ---------------------------------------------------------------------------
# output

def _num(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) or math.isinf(x) else x


def write_outputs(result: RunResult, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "FAILED").unlink(missing_ok=True)
    cfg = result.config
    b = cfg.backtest
    written = []

    def path(name):
        p = out / name
        written.append(p)
        return p

    dump_aligned(result.dataset, path("aligned.csv"))
    modeled = [s for s in result.strategies if s.forecast is not None]
    for s in modeled:
        s.forecast.dump(path(f"forecast_{s.slug}.csv"))
    for s in result.strategies:
        s.weights.dump(path(f"weights_{s.slug}.csv"))
        for label, rep in s.backtests.items():
            rep.dump(path(f"backtest_{s.slug}_{label}.csv"))

    write_csv(path("oos_r2.csv"), ("model", "oos_r2"), ([s.label, s.r2] for s in modeled))

    period_labels = [p.label for p in b.periods]
    rows = []
    for s in result.strategies:
        for cost in b.costs:
            m = s.metrics[cost.label]
            rows.append([s.label, cost.label] + [
                float("nan") if m[p] is None else m[p].sharpe for p in period_labels
            ])
    write_csv(path("sharpe_table.csv"), ("model", "cost", *period_labels), rows)

    irows = []
    for s in modeled:
        for label, sel in s.intervals.items():
            irows.append([
                s.label, label, sel.interval, sel.n_validation,
                sel.holdout_monthly.terminal_wealth, sel.holdout.terminal_wealth,
                sel.extra_annual_return,
            ])
    write_csv(
        path("intervals.csv"),
        ("model", "cost", "interval", "validation_months", "holdout_wealth_monthly",
         "holdout_wealth_optimal", "extra_annual_return"),
        irows,
    )

    # plot-ready series
    none_label = next((c.label for c in b.costs if c.kind == "none"), None)
    if none_label is not None:
        strategies = result.strategies
        write_csv(
            path("wealth_paths.csv"),
            ("yyyymm", *(s.slug for s in strategies)),
            (
                [int(m), *(float(s.backtests[none_label].wealth[i]) if i < len(s.backtests[none_label]) else float("nan")
                           for s in strategies)]
                for i, m in enumerate(result.test.months)
            ),
        )
    for s in modeled:
        for label, sel in s.intervals.items():
            n = len(sel.holdout_monthly)
            write_csv(
                path(f"holdout_{s.slug}_{label}.csv"),
                ("yyyymm", "wealth_monthly", "wealth_optimal"),
                (
                    [int(sel.holdout_monthly.months[i]), float(sel.holdout_monthly.wealth[i]),
                     float(sel.holdout.wealth[i]) if i < len(sel.holdout) else float("nan")]
                    for i in range(n)
                ),
            )

    inf = result.inference
    ds = result.dataset
    summary = {
        "config_digest": cfg.digest(),
        "status": "complete",
        "entry_trade_charged": b.charge_entry,
        "dataset": {
            "months": len(ds),
            "first_month": int(ds.months[0]),
            "last_month": int(ds.months[-1]),
            "first_usable_month": int(ds.first_usable_month),
            "train_months": len(result.train),
            "test_months": len(result.test),
            "features": list(ds.feature_names),
        },
        "oos_r2": {s.label: _num(s.r2) for s in modeled},
        "sharpe_no_cost": {
            s.label: {p: _num(None if s.metrics[none_label][p] is None else s.metrics[none_label][p].sharpe)
                      for p in period_labels}
            for s in result.strategies
        } if none_label is not None else {},
        "rebalance_intervals": {s.label: {k: v.interval for k, v in s.intervals.items()} for s in modeled},
        "terminal_wealth": {
            s.label: {k: _num(r.terminal_wealth) for k, r in s.backtests.items()} for s in result.strategies
        },
        "bankrupt": sorted(
            f"{s.slug}/{k}" for s in result.strategies for k, r in s.backtests.items() if r.bankrupt
        ),
        "ols_inference": {
            "n_obs": inf.n_obs,
            "r_squared": _num(inf.r_squared),
            "terms": {
                name: {
                    "coef": _num(inf.coefficients[i]),
                    "std_error": _num(inf.std_errors[i]),
                    "t_stat": _num(inf.t_stats[i]),
                    "p_value": _num(inf.p_values[i]),
                    "vif": None if i == 0 else (_num(inf.vif[i - 1]) if np.isfinite(inf.vif[i - 1]) else "inf"),
                }
                for i, name in enumerate(inf.names)
            },
        },
    }
    _write_json(path("summary.json"), summary)
    resolved = cfg.to_dict()
    resolved["config_digest"] = cfg.digest()
    _write_json(path("config_resolved.json"), resolved)
    return written


def _write_json(p: Path, obj) -> None:
    p.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def mark_failed(out_dir, exc: BaseException) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "FAILED").write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")


def _ym(m) -> str:
    return f"{int(m) // 100:04d}-{int(m) % 100:02d}"


def summarize_dataset(ds: AlignedDataset, cfg: RunConfig) -> str:
    train, test = split(ds, cfg.split)
    return (
        f"aligned months: {len(ds)}, {_ym(ds.months[0])}..{_ym(ds.months[-1])}\n"
        f"first usable month: {_ym(ds.first_usable_month)}\n"
        f"train: {len(train)} months, {_ym(train.months[0])}..{_ym(train.months[-1])}\n"
        f"test: {len(test)} months, {_ym(test.months[0])}..{_ym(test.months[-1])}"
    )
