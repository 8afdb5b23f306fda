"""Acceptance criteria, one test per criterion.

Criteria 1-4 compare against published reference values and need the public
monthly files (see ``real_data_paths`` in conftest); without them they are
reported as NOT RUN. Criteria 5-12 are self-contained.
"""

import math
import time

import numpy as np
import pytest

from factor_timing.backtest import CostModel, run_backtest, select_rebalance_interval
from factor_timing.cli import main
from factor_timing.config import config_from_dict
from factor_timing.dataio import MonthlyPanel, add_months, build_dataset, parse_factor_csv, parse_predictor_csv
from factor_timing.harness import ForecastSeries, forecast, oos_r2
from factor_timing.models import ForestParams, ModelSpec, NN3Params, fit_ols, fit_random_forest, fit_ridge
from factor_timing.models.nn3 import init_params, loss_and_grad
from factor_timing.pipeline import run_pipeline
from factor_timing.synthetic import write_synthetic_sources
from factor_timing.timing import WeightSeries, timed_weights

from conftest import real_data_paths
from oracles import central_difference_grad, max_relative_error, normal_equations_ols, simulate_wealth

pytestmark = pytest.mark.acceptance

PROPORTIONAL = ("proportional_10bps", "proportional_20bps", "proportional_50bps")


# ---------------------------------------------------------------------------
# reference targets


@pytest.fixture(scope="module")
def reference_run():
    paths = real_data_paths()
    if paths is None:
        return None
    cfg = config_from_dict({"data": {"factors": str(paths[0]), "predictors": str(paths[1])}})
    t0 = time.perf_counter()
    result = run_pipeline(cfg)
    result.elapsed = time.perf_counter() - t0
    return result


def _need(criterion, number, run):
    if run is None:
        criterion.skip(number, "public monthly data files not supplied (set FACTOR_TIMING_DATA or add data/)")


def test_criterion_01_constant_benchmark_sharpe(criterion, reference_run):
    _need(criterion, 1, reference_run)
    s = reference_run.strategy("constant").metrics["none"]["2003-2022"].sharpe
    ok = abs(s - 0.2141) <= 0.05
    criterion(1, ok, f"constant no-cost Sharpe 2003-2022 = {s:.4f} (target 0.2141 +/- 0.05)")
    assert ok


def test_criterion_02_linear_oos_r2(criterion, reference_run):
    _need(criterion, 2, reference_run)
    ols = reference_run.strategy("ols_ct").r2
    ridge = reference_run.strategy("ridge").r2
    ok = abs(ols - 0.024068) <= 0.02 and abs(ridge - 0.029150) <= 0.02
    criterion(2, ok, f"OLS-CT R2 = {ols:.6f} (0.024068), Ridge R2 = {ridge:.6f} (0.029150), tol 0.02")
    assert ok


def test_criterion_03_flexible_models_ordering(criterion, reference_run):
    _need(criterion, 3, reference_run)
    ols = reference_run.strategy("ols_ct").r2
    rf = reference_run.strategy("random_forest").r2
    nn = reference_run.strategy("nn3").r2
    ok = rf > 0 and nn > 0 and rf >= ols and nn >= ols
    criterion(3, ok, f"RF R2 = {rf:.6f}, NN3 R2 = {nn:.6f}, OLS-CT R2 = {ols:.6f}")
    assert ok


def test_criterion_04_linear_rebalance_interval(criterion, reference_run):
    _need(criterion, 4, reference_run)
    chosen = {
        slug: [reference_run.strategy(slug).intervals[c].interval for c in PROPORTIONAL]
        for slug in ("ols_ct", "ridge", "random_forest", "nn3")
    }
    ok = 8 in chosen["ols_ct"] and 8 in chosen["ridge"]
    criterion(4, ok, f"intervals at 10/20/50 bps: {chosen}")
    assert ok


def test_reference_runtime(reference_run):
    if reference_run is None:
        pytest.skip("public monthly data files not supplied")
    assert reference_run.elapsed < 300


# ---------------------------------------------------------------------------
# property suite


def test_criterion_05_ols_and_ridge_against_normal_equations(criterion):
    r = np.random.default_rng(5)
    worst_ols = worst_ridge = 0.0
    for _ in range(100):
        n = int(r.integers(5, 40))
        k = int(r.integers(1, 4))
        X = r.normal(size=(n, k)) * r.uniform(0.01, 10, size=k) + r.normal(size=k)
        y = X @ r.normal(size=k) + r.normal(size=n)
        ref = np.array(normal_equations_ols(X.tolist(), y.tolist()))
        o = fit_ols(X, y, ct_truncate=False)
        g = fit_ridge(X, y, 0.0)
        worst_ols = max(worst_ols, float(np.max(np.abs(np.r_[o.intercept, o.coef] - ref))))
        worst_ridge = max(worst_ridge, float(np.max(np.abs(np.r_[g.intercept, g.coef] - np.r_[o.intercept, o.coef]))))
    ok = worst_ols < 1e-8 and worst_ridge < 1e-8
    criterion(5, ok, f"max |OLS - oracle| = {worst_ols:.2e}, max |ridge(0) - OLS| = {worst_ridge:.2e}")
    assert ok


def test_criterion_06_nn3_gradients(criterion):
    worst = 0.0
    for point in range(10):
        r = np.random.default_rng(600 + point)
        X = r.normal(size=(12, 3))
        y = r.normal(size=12)
        params = init_params(3, rng=r)
        _, g = loss_and_grad(params, X, y)
        numeric = central_difference_grad(lambda: loss_and_grad(params, X, y)[0], params)
        worst = max(worst, max_relative_error(g, numeric))
    ok = worst < 1e-4
    criterion(6, ok, f"max relative gradient error over 10 points = {worst:.2e}")
    assert ok


def test_criterion_07_forest_structure_and_determinism(criterion):
    leaves_ok = range_ok = repeat_ok = thread_ok = True
    for seed in range(5):
        r = np.random.default_rng(700 + seed)
        X = r.normal(size=(120, 3))
        y = np.tanh(X[:, 0]) + 0.3 * X[:, 1] * X[:, 2] + 0.2 * r.normal(size=120)
        q = r.normal(scale=4, size=(300, 3))
        a = fit_random_forest(X, y, ForestParams(), seed=seed)
        b = fit_random_forest(X, y, ForestParams(), seed=seed)
        c = fit_random_forest(X, y, ForestParams(), seed=seed, n_jobs=4)
        pa = a.predict(q)
        leaves_ok &= all(t.n_leaves <= 6 for t in a.trees)
        range_ok &= bool(pa.min() >= y.min() and pa.max() <= y.max())
        repeat_ok &= bool(np.array_equal(pa, b.predict(q)))
        thread_ok &= bool(np.array_equal(pa, c.predict(q)))
    ok = leaves_ok and range_ok and repeat_ok and thread_ok
    criterion(7, ok, f"leaves<=6 {leaves_ok}, in range {range_ok}, repeatable {repeat_ok}, thread-invariant {thread_ok}")
    assert ok


def test_criterion_08_oos_r2_hand_cases(criterion):
    a = np.array([0.01, -0.02, 0.03])
    perfect = oos_r2(ForecastSeries([1, 2, 3], a, a))
    zero = oos_r2(ForecastSeries([1, 2, 3], np.zeros(3), a))
    hand = oos_r2(ForecastSeries([1, 2], [1.0, 0.0], [2.0, -1.0]))
    ok = perfect == 1.0 and zero == 0.0 and abs(hand - 0.6) <= 1e-12
    criterion(8, ok, f"perfect {perfect}, zero {zero}, hand {hand!r}")
    assert ok


def _perturb_after(panel: MonthlyPanel, t: int, rng) -> MonthlyPanel:
    later = panel.months > t
    cols = {}
    for name in panel.names:
        v = panel[name].copy()
        v[later] = v[later] + rng.normal(0, 0.01, later.sum()) + 0.005
        cols[name] = v
    return panel.with_columns(**cols)


def test_criterion_09_no_look_ahead(criterion, small_sources, small_split):
    f_text, p_text = small_sources
    factors, predictors = parse_factor_csv(f_text), parse_predictor_csv(p_text)
    specs = [
        ModelSpec("ols_ct", seed=1),
        ModelSpec("ridge", seed=1),
        ModelSpec("random_forest", rf_params=ForestParams(n_trees=10), seed=1),
        ModelSpec("nn3", nn3_params=NN3Params(epochs=200), seed=1),
    ]

    def outputs(ds):
        months = ds.months
        realized = ds.target()
        res = {}
        for spec in specs:
            fs = forecast(ds, small_split, spec)
            res[spec.kind] = (fs, timed_weights(fs, months, realized))
        return res

    base = outputs(build_dataset(factors, predictors))
    r = np.random.default_rng(909)
    test_months = base["ols_ct"][0].months
    cuts = sorted(r.choice(test_months[:-1], size=20, replace=False).tolist())
    violations = []
    for t in cuts:
        ds = build_dataset(_perturb_after(factors, t, r), _perturb_after(predictors, t, r))
        pert = outputs(ds)
        for kind, (fs, ws) in base.items():
            fs2, ws2 = pert[kind]
            upto = fs.months <= t
            # variance for t + 1 only uses returns through t
            later = fs.months > add_months(t, 1)
            same = (
                np.array_equal(fs.forecast[upto], fs2.forecast[upto])
                and np.array_equal(ws.variance_used[upto], ws2.variance_used[upto])
                and np.array_equal(ws.weight[upto], ws2.weight[upto])
            )
            if not same:
                violations.append((kind, t))
            # the perturbation must be visible later on, or the check proves nothing
            if later.any():
                assert not np.array_equal(ws.variance_used[later], ws2.variance_used[later])
    ok = not violations
    criterion(9, ok, f"{len(cuts)} cut points x {len(specs)} models, violations: {violations or 'none'}")
    assert ok


def _weight_series(w):
    n = len(w)
    months = [(2003 + i // 12) * 100 + i % 12 + 1 for i in range(n)]
    return WeightSeries(months, w, np.full(n, 0.002))


def test_criterion_10_backtest_identities(criterion):
    r = np.random.default_rng(10)
    returns = r.normal(0.004, 0.03, 240)
    flat = run_backtest(_weight_series(np.zeros(240)), returns, CostModel("proportional", 0.005))
    flat_ok = bool(np.all(flat.wealth == 1.0))

    mono_ok = ledger_ok = True
    worst_ledger = 0.0
    for trial in range(50):
        w = r.normal(1.0, 0.8, 240)
        k = int(r.integers(1, 13))
        tw = [
            run_backtest(_weight_series(w), returns, CostModel("proportional", c), k).terminal_wealth
            for c in (0.0, 0.001, 0.002, 0.005, 0.01)
        ]
        mono_ok &= all(a >= b for a, b in zip(tw, tw[1:]))
        rep = run_backtest(_weight_series(w), returns, CostModel("proportional", 0.002), k)
        err = abs(rep.total_cost - 0.002 * rep.turnover.sum())
        worst_ledger = max(worst_ledger, err)
        ledger_ok &= err <= 1e-12

    ratios = {}
    ws = _weight_series(np.array([0.6, 1.1]))
    base = run_backtest(ws, [0.0, 0.0], CostModel("quadratic", 0.005), initial_wealth=1.0)
    for n in (2, 3, 10):
        big = run_backtest(ws, [0.0, 0.0], CostModel("quadratic", 0.005), initial_wealth=float(n))
        ratios[n] = float(big.cost_dollar[0] / base.cost_dollar[0])
    ratio_ok = all(abs(v - n * n) <= 1e-12 * n * n for n, v in ratios.items())

    ok = flat_ok and mono_ok and ledger_ok and ratio_ok
    criterion(
        10, ok,
        f"flat {flat_ok}, monotone {mono_ok}, ledger err {worst_ledger:.1e}, quadratic ratios {ratios}",
    )
    assert ok


def test_criterion_11_interval_selection_enumeration(criterion):
    r = np.random.default_rng(11)
    mismatches = 0
    cases = 0
    for trial in range(10):
        n = int(r.integers(60, 241))
        w = r.normal(1.0, float(r.uniform(0.1, 2.0)), n)
        returns = r.normal(0.004, 0.03, n)
        for cost in (CostModel("proportional", 0.001), CostModel("proportional", 0.005), CostModel("quadratic", 0.005)):
            sel = select_rebalance_interval(_weight_series(w), returns, cost)
            nv = sel.n_validation
            wealth = {k: simulate_wealth(w[:nv], returns[:nv], cost.rate, k, cost.kind) for k in range(1, 13)}
            # exact replay of the same recurrence, so ties are exact ties
            best = max(wealth.values())
            expected = min(k for k, v in wealth.items() if v == best)
            cases += 1
            if sel.interval != expected or any(
                not math.isclose(sel.validation_wealth[k], wealth[k], rel_tol=1e-12) for k in wealth
            ):
                mismatches += 1
    const = select_rebalance_interval(_weight_series(np.full(240, 0.9)), r.normal(0.004, 0.03, 240),
                                      CostModel("proportional", 0.002))
    ok = mismatches == 0 and const.interval == 1
    criterion(11, ok, f"{cases} enumerations, {mismatches} mismatches; constant weights -> {const.interval}")
    assert ok


@pytest.mark.slow
def test_criterion_12_end_to_end_determinism(criterion, tmp_path):
    write_synthetic_sources(tmp_path / "data", seed=12)
    cfg = tmp_path / "default.toml"
    cfg.write_text('[data]\nfactors = "data/factors.csv"\npredictors = "data/predictors.csv"\n')
    out = tmp_path / "out"

    def run():
        t0 = time.perf_counter()
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        elapsed = time.perf_counter() - t0
        return {p.name: p.read_bytes() for p in sorted(out.iterdir())}, elapsed

    first, t1 = run()
    second, t2 = run()
    differing = sorted(k for k in first if first[k] != second.get(k))
    ok = set(first) == set(second) and not differing and len(first) > 8
    criterion(12, ok, f"{len(first)} files, differing: {differing or 'none'}; runs took {t1:.0f}s and {t2:.0f}s")
    assert ok
    assert max(t1, t2) < 300
