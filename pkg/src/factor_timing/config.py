"""Run configuration: one TOML file, resolved into plain dataclasses.

Example::

    seed = 7
    output_dir = "out"

    [data]
    factors = "data/ff5_monthly.csv"        # percent
    predictors = "data/goyal_monthly.csv"   # decimal
    features = ["tms_lag1", "dfy_lag1", "cma_lag1"]

    [split]
    train = [196307, 200212]
    test = [200301, 202212]

    [timing]
    gamma = 2.0

    [backtest]
    costs = [{kind = "none"}, {kind = "proportional", rate = 0.002}]

    [[models]]
    kind = "ols_ct"

Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .backtest import DEFAULT_PERIODS, CostModel, PeriodSpec
from .dataio import DEFAULT_FEATURES, SplitSpec
from .errors import ConfigError
from .models import ForestParams, ModelSpec, NN3Params
from .timing import TimingConfig

MODEL_LABELS = {
    "ols_ct": "Linear Regression - OLS (with Campbell and Thompson restrictions)",
    "ols": "Linear Regression - OLS",
    "ridge": "Linear Regression - Ridge",
    "random_forest": "Random Forest Regressor",
    "nn3": "Neural Network - NN3",
}

DEFAULT_COSTS = (
    CostModel("none"),
    CostModel("proportional", 0.0010),
    CostModel("proportional", 0.0020),
    CostModel("proportional", 0.0050),
    CostModel("quadratic", 0.0050),
)


@dataclass(frozen=True)
class DataConfig:
    factors: Path
    predictors: Path
    factor_unit: str = "percent"
    predictor_unit: str = "decimal"
    features: tuple[str, ...] = DEFAULT_FEATURES


@dataclass(frozen=True)
class BacktestConfig:
    costs: tuple[CostModel, ...] = DEFAULT_COSTS
    rebalance_grid: tuple[int, ...] = tuple(range(1, 13))
    validation_fraction: float = 0.40
    initial_wealth: float = 1.0
    charge_entry: bool = True
    include_rf: bool = False
    periods: tuple[PeriodSpec, ...] = DEFAULT_PERIODS


@dataclass(frozen=True)
class RunConfig:
    data: DataConfig
    split: SplitSpec = field(default_factory=SplitSpec.default)
    models: tuple[ModelSpec, ...] = ()
    timing: TimingConfig = TimingConfig()
    backtest: BacktestConfig = BacktestConfig()
    output_dir: Path = Path("out")
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if not self.models:
            raise ConfigError("config lists no models")
        slugs = [model_slug(m) for m in self.models]
        if len(set(slugs)) != len(slugs):
            raise ConfigError(f"model names must be unique, got {slugs}")
        if not 0 < self.backtest.validation_fraction < 1:
            raise ConfigError("validation_fraction must lie in (0, 1)")

    def check_paths(self) -> None:
        for p in (self.data.factors, self.data.predictors):
            if not Path(p).is_file():
                raise ConfigError(f"input file not found: {p}")

    def with_seed(self, seed: int) -> "RunConfig":
        """Override the base seed; models inherit it."""
        return replace(self, seed=int(seed), models=tuple(m.with_seed(seed) for m in self.models))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["data"]["factors"] = str(self.data.factors)
        d["data"]["predictors"] = str(self.data.predictors)
        d["output_dir"] = str(self.output_dir)
        return _jsonable(d)

    def digest(self) -> str:
        """SHA-256 of the resolved config, excluding where outputs are written."""
        d = self.to_dict()
        d.pop("output_dir")
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Path):
        return str(x)
    return x


def model_slug(spec: ModelSpec) -> str:
    return spec.name if spec.name and spec.name.isidentifier() else spec.kind


def model_label(spec: ModelSpec) -> str:
    return MODEL_LABELS.get(spec.kind, spec.kind) if not spec.name else spec.name


def default_models(seed: int = 0) -> tuple[ModelSpec, ...]:
    return tuple(ModelSpec(k, seed=seed) for k in ("ols_ct", "ridge", "random_forest", "nn3"))


def _model_from_dict(d: dict, base_seed: int) -> ModelSpec:
    d = dict(d)
    try:
        kind = d.pop("kind")
    except KeyError:
        raise ConfigError("every [[models]] entry needs a kind") from None
    rf = ForestParams(
        n_trees=int(d.pop("n_trees", 100)),
        max_leaf_nodes=int(d.pop("max_leaf_nodes", 6)),
        feature_subsample=int(d.pop("feature_subsample", 2)),
        bootstrap=bool(d.pop("bootstrap", True)),
    )
    nn = NN3Params(
        layer_widths=tuple(d.pop("layer_widths", (32, 16, 8))),
        epochs=int(d.pop("epochs", 2000)),
        learning_rate=float(d.pop("learning_rate", 0.01)),
    )
    signs = d.pop("ct_signs", None)
    spec = ModelSpec(
        kind=kind,
        ridge_lambda=float(d.pop("ridge_lambda", 1.0)),
        rf_params=rf,
        nn3_params=nn,
        seed=int(d.pop("seed", base_seed)),
        ct_signs=tuple(signs) if signs is not None else None,
        name=d.pop("name", None),
    )
    if d:
        raise ConfigError(f"unknown keys in model {kind!r}: {sorted(d)}")
    return spec


def _months_pair(value, name):
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ConfigError(f"split.{name} must be [start_yyyymm, end_yyyymm]")
    return int(value[0]), int(value[1])


def config_from_dict(raw: dict, base_dir: Path = Path(".")) -> RunConfig:
    raw = json.loads(json.dumps(raw))  # deep copy
    seed = int(raw.pop("seed", 0))
    n_jobs = int(raw.pop("n_jobs", 1))
    out = Path(raw.pop("output_dir", "out"))

    data = raw.pop("data", None)
    if not data or "factors" not in data or "predictors" not in data:
        raise ConfigError("[data] needs 'factors' and 'predictors' paths")
    data_cfg = DataConfig(
        factors=(base_dir / data.pop("factors")),
        predictors=(base_dir / data.pop("predictors")),
        factor_unit=data.pop("factor_unit", "percent"),
        predictor_unit=data.pop("predictor_unit", "decimal"),
        features=tuple(data.pop("features", DEFAULT_FEATURES)),
    )
    if data:
        raise ConfigError(f"unknown keys in [data]: {sorted(data)}")

    sp = raw.pop("split", {})
    default = SplitSpec.default()
    train = _months_pair(sp.pop("train", (default.train_start, default.train_end)), "train")
    test = _months_pair(sp.pop("test", (default.test_start, default.test_end)), "test")
    if sp:
        raise ConfigError(f"unknown keys in [split]: {sorted(sp)}")
    split_spec = SplitSpec(*train, *test)

    tm = raw.pop("timing", {})
    timing = TimingConfig(gamma=float(tm.pop("gamma", 2.0)), weight_cap=tm.pop("weight_cap", None))
    if tm:
        raise ConfigError(f"unknown keys in [timing]: {sorted(tm)}")

    bt = raw.pop("backtest", {})
    costs = bt.pop("costs", None)
    periods = bt.pop("periods", None)
    grid = bt.pop("rebalance_grid", list(range(1, 13)))
    backtest = BacktestConfig(
        costs=DEFAULT_COSTS if costs is None else tuple(CostModel(c.get("kind", "none"), float(c.get("rate", 0.0))) for c in costs),
        rebalance_grid=tuple(int(k) for k in grid),
        validation_fraction=float(bt.pop("validation_fraction", 0.40)),
        initial_wealth=float(bt.pop("initial_wealth", 1.0)),
        charge_entry=bool(bt.pop("charge_entry", True)),
        include_rf=bool(bt.pop("include_rf", False)),
        periods=DEFAULT_PERIODS if periods is None else tuple(PeriodSpec(p["label"], int(p["start"]), int(p["end"])) for p in periods),
    )
    if bt:
        raise ConfigError(f"unknown keys in [backtest]: {sorted(bt)}")

    models_raw = raw.pop("models", None)
    models = default_models(seed) if models_raw is None else tuple(_model_from_dict(m, seed) for m in models_raw)
    if raw:
        raise ConfigError(f"unknown top-level keys: {sorted(raw)}")
    return RunConfig(
        data=data_cfg,
        split=split_spec,
        models=models,
        timing=timing,
        backtest=backtest,
        output_dir=out if out.is_absolute() else base_dir / out,
        seed=seed,
        n_jobs=n_jobs,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw, path.parent)
