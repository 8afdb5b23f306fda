"""Wealth simulation under transaction costs, performance metrics, and
validation-based choice of the rebalancing interval.

Conventions:

* The held weight changes only at rebalance months ``0, k, 2k, ...`` and is
  otherwise kept fixed; there is no drift between rebalances.
* A rebalance from ``w_old`` to ``w_new`` trades ``wealth * |w_new - w_old|``
  dollars. Proportional cost is ``rate * trade``; quadratic cost is
  ``rate * trade**2``, so it grows with the square of the capital deployed.
* The first month trades in from a zero position unless ``charge_entry`` is
  off.
* Monthly net return is ``w * r - cost / wealth`` and
  ``wealth_t = wealth_{t-1} * (1 + net_t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataio import write_csv
from .errors import ConfigError, EmptyPeriod, Misalignment, ZeroVolatility
from .timing import WeightSeries

COST_KINDS = ("none", "proportional", "quadratic")


@dataclass(frozen=True)
class CostModel:
    kind: str = "none"
    rate: float = 0.0

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise ConfigError(f"cost kind must be one of {COST_KINDS}, got {self.kind!r}")
        if not self.rate >= 0:
            raise ConfigError("cost rate must be non-negative")

    def dollar_cost(self, trade: float) -> float:
        if self.kind == "proportional":
            return self.rate * trade
        if self.kind == "quadratic":
            return self.rate * trade * trade
        return 0.0

    @property
    def label(self) -> str:
        if self.kind == "none":
            return "none"
        bps = self.rate * 1e4
        bps_s = f"{bps:.0f}" if abs(bps - round(bps)) < 1e-9 else f"{bps:g}".replace(".", "p")
        return f"{self.kind}_{bps_s}bps"


@dataclass(frozen=True)
class PeriodSpec:
    label: str
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ConfigError(f"period {self.label!r}: start after end")


DEFAULT_PERIODS = (
    PeriodSpec("2003-2022", 200301, 202212),
    PeriodSpec("2003-2007", 200301, 200712),
    PeriodSpec("2007-2015", 200701, 201512),
    PeriodSpec("2015-2022", 201501, 202212),
)


@dataclass(frozen=True)
class BacktestReport:
    months: np.ndarray
    target_weight: np.ndarray
    held_weight: np.ndarray
    returns: np.ndarray
    gross: np.ndarray
    turnover: np.ndarray  # dollars traded
    cost_dollar: np.ndarray
    cost: np.ndarray  # fraction of wealth at the start of the month
    net: np.ndarray
    wealth: np.ndarray
    rebalanced: np.ndarray
    interval: int
    initial_wealth: float
    cost_model: CostModel
    entry_charged: bool = True
    bankrupt: bool = False
    label: str = ""

    def __len__(self):
        return int(self.months.size)

    @property
    def terminal_wealth(self) -> float:
        return float(self.wealth[-1]) if len(self) else self.initial_wealth

    @property
    def total_cost(self) -> float:
        return float(self.cost_dollar.sum())

    def dump(self, path) -> None:
        write_csv(
            path,
            ("yyyymm", "target_weight", "held_weight", "gross", "cost", "net", "wealth"),
            (
                [int(m), float(a), float(b), float(g), float(c), float(n), float(w)]
                for m, a, b, g, c, n, w in zip(
                    self.months, self.target_weight, self.held_weight,
                    self.gross, self.cost, self.net, self.wealth,
                )
            ),
        )


def run_backtest(
    ws: WeightSeries,
    returns,
    cost: CostModel = CostModel(),
    interval: int = 1,
    initial_wealth: float = 1.0,
    *,
    months=None,
    rf=None,
    charge_entry: bool = True,
    label: str | None = None,
) -> BacktestReport:
    """Simulate the wealth path of following ``ws`` with rebalancing every ``interval`` months.

    ``returns`` are the factor's monthly returns aligned with ``ws``; pass
    ``months`` to have the alignment checked. ``rf``, if given, is added to
    each month's gross return (wealth level studies); by default the strategy
    earns only the factor excess return. Should wealth reach zero the report
    stops at that month with ``bankrupt`` set.
    """
    r = np.asarray(returns, dtype=float)
    if r.shape != ws.weight.shape:
        raise Misalignment(f"{r.size} returns for {len(ws)} weights")
    if months is not None and not np.array_equal(np.asarray(months), ws.months):
        raise Misalignment("return months differ from weight months")
    if interval < 1 or int(interval) != interval:
        raise ConfigError("interval must be a positive integer")
    if not initial_wealth > 0:
        raise ConfigError("initial_wealth must be positive")
    rf_arr = np.zeros_like(r) if rf is None else np.asarray(rf, dtype=float)
    if rf_arr.shape != r.shape:
        raise Misalignment("risk-free series misaligned")

    n = r.size
    held = np.empty(n)
    gross = np.empty(n)
    turnover = np.zeros(n)
    cost_dollar = np.zeros(n)
    cost_frac = np.zeros(n)
    net = np.empty(n)
    wealth = np.empty(n)
    rebalanced = np.zeros(n, dtype=bool)

    w_prev = float(initial_wealth)
    position = 0.0
    bankrupt = False
    last = n
    for t in range(n):
        if t % interval == 0:
            target = float(ws.weight[t])
            rebalanced[t] = True
            if t > 0 or charge_entry:
                trade = w_prev * abs(target - position)
                turnover[t] = trade
                cost_dollar[t] = cost.dollar_cost(trade)
                cost_frac[t] = cost_dollar[t] / w_prev
            position = target
        held[t] = position
        gross[t] = position * r[t] + rf_arr[t]
        net[t] = gross[t] - cost_frac[t]
        wealth[t] = w_prev * (1.0 + net[t])
        w_prev = wealth[t]
        if wealth[t] <= 0:
            bankrupt = True
            last = t + 1
            break

    cut = slice(0, last)
    return BacktestReport(
        months=ws.months[cut],
        target_weight=ws.weight[cut],
        held_weight=held[cut],
        returns=r[cut],
        gross=gross[cut],
        turnover=turnover[cut],
        cost_dollar=cost_dollar[cut],
        cost=cost_frac[cut],
        net=net[cut],
        wealth=wealth[cut],
        rebalanced=rebalanced[cut],
        interval=int(interval),
        initial_wealth=float(initial_wealth),
        cost_model=cost,
        entry_charged=charge_entry,
        bankrupt=bankrupt,
        label=label if label is not None else ws.label,
    )


# ---------------------------------------------------------------------------
# metrics

def sharpe(net_returns, rf=None, periods_per_year: int = 12) -> float:
    """Annualized Sharpe ratio of monthly returns.

    Uses the population standard deviation, so ``[0.02, 0.00]`` scores
    exactly ``sqrt(12)``.
    """
    x = np.asarray(net_returns, dtype=float)
    if rf is not None:
        x = x - np.asarray(rf, dtype=float)
    if x.size < 2:
        raise ZeroVolatility("Sharpe ratio needs at least 2 returns")
    if np.ptp(x) == 0:
        raise ZeroVolatility("returns have zero volatility")
    return float(x.mean() / x.std() * math.sqrt(periods_per_year))


def max_drawdown(wealth, start: float = 1.0) -> float:
    """Largest peak-to-trough loss as a fraction of the peak (``start`` counts as a peak)."""
    path = np.concatenate([[start], np.asarray(wealth, dtype=float)])
    peak = np.maximum.accumulate(path)
    return float(np.max(1.0 - path / peak))


@dataclass(frozen=True)
class PeriodMetrics:
    label: str
    n_months: int
    sharpe: float
    terminal_wealth: float
    max_drawdown: float


def subperiod_metrics(report: BacktestReport, periods=DEFAULT_PERIODS, rf=None) -> dict[str, PeriodMetrics]:
    """Sharpe, growth of $1 and max drawdown over each period.

    Period wealth is rebased to 1 at the start of the period.
    """
    out = {}
    for p in periods:
        mask = (report.months >= p.start) & (report.months <= p.end)
        if not mask.any():
            raise EmptyPeriod(f"period {p.label} ({p.start}-{p.end}) has no months in the report")
        net = report.net[mask]
        path = np.cumprod(1.0 + net)
        out[p.label] = PeriodMetrics(
            label=p.label,
            n_months=int(mask.sum()),
            sharpe=sharpe(net, None if rf is None else np.asarray(rf)[mask]),
            terminal_wealth=float(path[-1]),
            max_drawdown=max_drawdown(path),
        )
    return out


# ---------------------------------------------------------------------------
# rebalancing interval

@dataclass(frozen=True)
class IntervalSelection:
    interval: int
    validation_wealth: dict[int, float]
    n_validation: int
    holdout: BacktestReport = field(repr=False)
    holdout_monthly: BacktestReport = field(repr=False)

    @property
    def extra_annual_return(self) -> float:
        """Annualized return gain of the chosen interval over monthly rebalancing on the holdout."""
        n = len(self.holdout_monthly)
        if n == 0 or len(self.holdout) != n:
            return float("nan")
        g_opt = self.holdout.terminal_wealth / self.holdout.initial_wealth
        g_one = self.holdout_monthly.terminal_wealth / self.holdout_monthly.initial_wealth
        if g_opt <= 0 or g_one <= 0:
            return float("nan")
        return g_opt ** (12.0 / n) - g_one ** (12.0 / n)


def validation_size(n: int, fraction: float) -> int:
    if not 0 < fraction < 1:
        raise ConfigError("validation fraction must lie in (0, 1)")
    return int(math.floor(n * fraction + 1e-9))


def select_rebalance_interval(
    ws: WeightSeries,
    returns,
    cost: CostModel,
    grid=range(1, 13),
    validation_fraction: float = 0.40,
    initial_wealth: float = 1.0,
    charge_entry: bool = True,
) -> IntervalSelection:
    """Pick the interval with the best terminal wealth on the first part of the sample.

    Every interval in ``grid`` is backtested on the first
    ``validation_fraction`` of the months; the winner (smallest interval on
    ties) is then run on the remaining months starting from
    ``initial_wealth``, alongside a monthly-rebalanced run for comparison.
    """
    grid = sorted(int(k) for k in grid)
    if not grid or grid[0] < 1:
        raise ConfigError("rebalance grid must contain positive integers")
    r = np.asarray(returns, dtype=float)
    if r.shape != ws.weight.shape:
        raise Misalignment(f"{r.size} returns for {len(ws)} weights")
    nv = validation_size(len(ws), validation_fraction)
    if nv < grid[-1]:
        raise ConfigError(f"validation prefix of {nv} months is shorter than interval {grid[-1]}")
    if nv >= len(ws):
        raise ConfigError("validation prefix leaves no holdout months")

    val_ws = ws.take(slice(0, nv))
    scores = {}
    best = None
    for k in grid:
        rep = run_backtest(val_ws, r[:nv], cost, k, initial_wealth, charge_entry=charge_entry)
        # a bankrupt path ranks below every surviving one
        score = rep.terminal_wealth if not rep.bankrupt else -math.inf
        scores[k] = score
        if best is None or score > scores[best]:
            best = k
    hold_ws = ws.take(slice(nv, None))
    return IntervalSelection(
        interval=best,
        validation_wealth=scores,
        n_validation=nv,
        holdout=run_backtest(hold_ws, r[nv:], cost, best, initial_wealth, charge_entry=charge_entry),
        holdout_monthly=run_backtest(hold_ws, r[nv:], cost, 1, initial_wealth, charge_entry=charge_entry),
    )


def cost_scaling_check(base: BacktestReport, scaled: BacktestReport) -> float:
    """Ratio of first-month dollar costs between two runs differing only in capital."""
    return float(scaled.cost_dollar[0] / base.cost_dollar[0])
