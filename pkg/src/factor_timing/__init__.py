"""Timing the CMA factor with return forecasts.

Four regressors (Campbell-Thompson OLS, ridge, a small random forest and a
32-16-8 ReLU network) forecast next month's CMA return; forecasts become
mean-variance weights, and the weights are backtested with and without
transaction costs.
"""

from .backtest import (
    BacktestReport,
    CostModel,
    PeriodSpec,
    run_backtest,
    select_rebalance_interval,
    sharpe,
    subperiod_metrics,
)
from .dataio import (
    AlignedDataset,
    MonthlyPanel,
    SplitSpec,
    build_dataset,
    load_dataset,
    parse_factor_csv,
    parse_predictor_csv,
    split,
)
from .harness import ForecastSeries, expanding_window_forecast, forecast, oos_r2, static_forecast
from .models import ModelSpec, fit_model, predict
from .timing import TimingConfig, WeightSeries, constant_weight, optimal_weight, timed_weights

__version__ = "0.1.0"
