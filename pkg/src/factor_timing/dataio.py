"""Ingestion of factor and predictor files into an aligned monthly panel.

Months are plain ``YYYYMM`` integers throughout. Return and yield columns are
stored as decimals (1% is ``0.01``).

The factor file is the monthly Fama-French five-factor CSV::

    ,Mkt-RF,SMB,HML,RMW,CMA,RF
    196307,-0.39,-0.41,-0.97,0.68,-1.18,0.27

with values in percent, either as downloaded (prose preamble and trailing
annual table included) or trimmed to the monthly table. The predictor file is the monthly Goyal-Welch sheet
exported to CSV (``yyyymm,Index,D12,...,tbl,AAA,BAA,lty,...,corpr,...``) with
values already in decimals.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DuplicateMonth,
    EmptyInput,
    EmptyPartition,
    InsufficientRows,
    MalformedRow,
    MissingColumn,
    NoOverlap,
    NonContiguousMonths,
)

MISSING_TOKENS = frozenset({"", "na", "nan", "n/a", "null", "-99.99", "-999", "-99.990"})

FACTOR_COLUMNS = ("Mkt-RF", "SMB", "HML", "RMW", "CMA", "RF")
PREDICTOR_COLUMNS = ("yyyymm", "tbl", "lty", "AAA", "BAA", "corpr")

DEFAULT_FEATURES = ("tms_lag1", "dfy_lag1", "cma_lag1")
DEFAULT_TARGET = "cma"
ALIGNED_DUMP_COLUMNS = (
    "cma", "mkt_rf", "tms", "dfy", "corpr", "tms_lag1", "dfy_lag1", "cma_lag1",
)

_LAG_RE = re.compile(r"^(?P<base>.+)_lag(?P<k>[1-9][0-9]*)$")


# ---------------------------------------------------------------------------
# month arithmetic

def is_valid_month(yyyymm: int) -> bool:
    year, month = divmod(int(yyyymm), 100)
    return 1000 <= year <= 9999 and 1 <= month <= 12


def month_ordinal(yyyymm) -> np.ndarray | int:
    """Months since year 0, so consecutive months differ by exactly one."""
    yyyymm = np.asarray(yyyymm, dtype=np.int64)
    out = (yyyymm // 100) * 12 + (yyyymm % 100 - 1)
    return int(out) if out.ndim == 0 else out


def from_ordinal(ordinal):
    ordinal = np.asarray(ordinal, dtype=np.int64)
    out = (ordinal // 12) * 100 + ordinal % 12 + 1
    return int(out) if out.ndim == 0 else out


def add_months(yyyymm: int, k: int) -> int:
    """``add_months(199912, 1) == 200001``."""
    return from_ordinal(month_ordinal(yyyymm) + k)


def month_range(start: int, end: int) -> np.ndarray:
    return from_ordinal(np.arange(month_ordinal(start), month_ordinal(end) + 1))


def normalize_name(name: str) -> str:
    """``'Mkt-RF' -> 'mkt_rf'``, ``'BAA' -> 'baa'``."""
    return name.strip().lower().replace("-", "_").replace(" ", "_")


# ---------------------------------------------------------------------------
# containers

@dataclass(frozen=True)
class MonthlyPanel:
    """Months (strictly increasing ``YYYYMM``) plus one float column per series."""

    months: np.ndarray
    columns: Mapping[str, np.ndarray]

    def __post_init__(self):
        months = np.asarray(self.months, dtype=np.int64).copy()
        months.setflags(write=False)
        cols = {}
        for name, values in self.columns.items():
            v = np.array(values, dtype=float)
            if v.shape != months.shape:
                raise ValueError(f"column {name!r} has {v.size} values for {months.size} months")
            v.setflags(write=False)
            cols[name] = v
        if months.size > 1 and np.any(np.diff(months) <= 0):
            raise ValueError("months must be strictly increasing")
        object.__setattr__(self, "months", months)
        object.__setattr__(self, "columns", cols)

    def __len__(self) -> int:
        return int(self.months.size)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def take(self, mask) -> "MonthlyPanel":
        mask = np.asarray(mask)
        return MonthlyPanel(self.months[mask], {k: v[mask] for k, v in self.columns.items()})

    def with_columns(self, **new) -> "MonthlyPanel":
        cols = dict(self.columns)
        cols.update(new)
        return MonthlyPanel(self.months, cols)

    def is_contiguous(self) -> bool:
        return bool(np.all(np.diff(month_ordinal(self.months)) == 1)) if len(self) > 1 else True

    def equals(self, other: "MonthlyPanel") -> bool:
        if not np.array_equal(self.months, other.months):
            return False
        if set(self.columns) != set(other.columns):
            return False
        return all(
            np.array_equal(v, other.columns[k], equal_nan=True) for k, v in self.columns.items()
        )


@dataclass(frozen=True)
class SplitSpec:
    train_start: int
    train_end: int
    test_start: int
    test_end: int

    def __post_init__(self):
        for name in ("train_start", "train_end", "test_start", "test_end"):
            if not is_valid_month(getattr(self, name)):
                raise ConfigError(f"{name}={getattr(self, name)} is not a YYYYMM month")
        if self.train_start > self.train_end or self.test_start > self.test_end:
            raise ConfigError("split ranges must be non-empty (start <= end)")
        if not self.train_end < self.test_start:
            raise ConfigError(
                f"train_end ({self.train_end}) must precede test_start ({self.test_start})"
            )

    @classmethod
    def default(cls) -> "SplitSpec":
        """Jul 1963 - Dec 2002 for training, Jan 2003 - Dec 2022 for testing."""
        return cls(196307, 200212, 200301, 202212)


@dataclass(frozen=True)
class AlignedDataset:
    """A merged panel with designated feature and target columns.

    Rows before ``first_usable_month`` belong to the merged table but have at
    least one undefined lag; models only ever see rows from
    ``first_usable_month`` on.
    """

    panel: MonthlyPanel
    feature_names: tuple[str, ...] = DEFAULT_FEATURES
    target_name: str = DEFAULT_TARGET
    first_usable_month: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        missing = [c for c in (*self.feature_names, self.target_name) if c not in self.panel]
        if missing:
            raise MissingColumn(f"dataset lacks columns {missing}")

    @property
    def months(self) -> np.ndarray:
        return self.panel.months

    @property
    def usable(self) -> np.ndarray:
        return self.panel.months >= self.first_usable_month

    def features(self, mask=None) -> np.ndarray:
        """Feature matrix, one row per month, restricted to ``mask`` if given."""
        X = np.column_stack([self.panel[c] for c in self.feature_names])
        return X if mask is None else X[np.asarray(mask)]

    def target(self, mask=None) -> np.ndarray:
        y = np.asarray(self.panel[self.target_name])
        return y if mask is None else y[np.asarray(mask)]

    def training_rows(self, before: int) -> np.ndarray:
        """Mask of usable rows strictly before month ``before``."""
        return self.usable & (self.panel.months < before)

    def replace_panel(self, panel: MonthlyPanel) -> "AlignedDataset":
        return AlignedDataset(panel, self.feature_names, self.target_name, self.first_usable_month)

    def __len__(self) -> int:
        return len(self.panel)


# ---------------------------------------------------------------------------
# parsing

def _parse_cell(text: str, line: int, column: str, source) -> float:
    token = text.strip()
    if token.lower() in MISSING_TOKENS:
        return math.nan
    try:
        return float(token.replace(",", ""))
    except ValueError:
        raise MalformedRow(f"non-numeric value {token!r} in column {column!r}", line, source) from None


def _parse_month(text: str, line: int, source) -> int:
    token = text.strip()
    if not re.fullmatch(r"[0-9]{6}", token) or not is_valid_month(int(token)):
        raise MalformedRow(f"bad YYYYMM date {token!r}", line, source)
    return int(token)


def _read_table(raw: str, source) -> tuple[list[str], list[tuple[int, list[str]]]]:
    rows = []
    header = None
    for lineno, row in enumerate(csv.reader(io.StringIO(raw)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if header is None:
            header = [c.strip() for c in row]
            continue
        rows.append((lineno, row))
    if header is None or not rows:
        raise EmptyInput(f"{source or 'input'}: no data rows")
    return header, rows


def _build_panel(header, rows, date_col, scale, source) -> MonthlyPanel:
    value_cols = [i for i in range(len(header)) if i != date_col]
    names = [normalize_name(header[i]) for i in value_cols]
    if len(set(names)) != len(names):
        raise MalformedRow("duplicate column names in header", 1, source)
    months = []
    data = [[] for _ in value_cols]
    for lineno, row in rows:
        if len(row) != len(header):
            raise MalformedRow(
                f"expected {len(header)} cells, found {len(row)}", lineno, source
            )
        months.append(_parse_month(row[date_col], lineno, source))
        for j, i in enumerate(value_cols):
            data[j].append(_parse_cell(row[i], lineno, header[i], source))
    months = np.asarray(months, dtype=np.int64)
    order = np.argsort(months, kind="stable")
    months = months[order]
    dup = np.flatnonzero(np.diff(months) == 0)
    if dup.size:
        raise DuplicateMonth(f"{source or 'input'}: month {months[dup[0]]} appears more than once")
    cols = {n: np.asarray(d, dtype=float)[order] / scale for n, d in zip(names, data)}
    return MonthlyPanel(months, cols)


def _unit_scale(unit: str) -> float:
    if unit == "percent":
        return 100.0
    if unit == "decimal":
        return 1.0
    raise ConfigError(f"unit must be 'percent' or 'decimal', got {unit!r}")


def monthly_table(raw: str) -> str:
    """Cut the monthly table out of a Fama-French download.

    The published files open with a few lines of prose and follow the monthly
    table with an annual one. If the first non-blank line already looks like
    the header, ``raw`` is returned unchanged; otherwise the lines from the
    first header containing ``Mkt-RF`` up to the next blank line are kept,
    with the leading line numbers preserved as blank lines so error messages
    still point at the right line.
    """
    lines = raw.splitlines()
    first = next((i for i, ln in enumerate(lines) if ln.strip()), None)
    if first is None or "Mkt-RF" in lines[first]:
        return raw
    start = next((i for i, ln in enumerate(lines) if "Mkt-RF" in ln), None)
    if start is None:
        return raw
    stop = next((i for i in range(start + 1, len(lines)) if not lines[i].strip(" ,")), len(lines))
    return "\n" * start + "\n".join(lines[start:stop]) + "\n"


def parse_factor_csv(raw: str, unit: str = "percent", source=None) -> MonthlyPanel:
    """Parse a Fama-French factor CSV.

    The first column holds ``YYYYMM`` dates (its header may be blank, ``date``
    or ``yyyymm``). Column names are normalized, so ``Mkt-RF`` becomes
    ``mkt_rf``. With ``unit="percent"`` every value is divided by 100. A raw
    download with its prose preamble and annual table is accepted as is; see
    :func:`monthly_table`.
    """
    scale = _unit_scale(unit)
    header, rows = _read_table(monthly_table(raw), source)
    present = {h.strip() for h in header}
    absent = [c for c in FACTOR_COLUMNS if c not in present]
    if absent:
        raise MissingColumn(f"{source or 'factor file'}: missing columns {absent}")
    return _build_panel(header, rows, 0, scale, source)


def parse_predictor_csv(raw: str, unit: str = "decimal", source=None) -> MonthlyPanel:
    """Parse a Goyal-Welch monthly predictor CSV.

    Requires ``yyyymm, tbl, lty, AAA, BAA, corpr`` (case-insensitive); any
    other columns are kept. Blank cells and sentinels become NaN.
    """
    scale = _unit_scale(unit)
    header, rows = _read_table(raw, source)
    lowered = [h.lower() for h in header]
    absent = [c for c in PREDICTOR_COLUMNS if c.lower() not in lowered]
    if absent:
        raise MissingColumn(f"{source or 'predictor file'}: missing columns {absent}")
    return _build_panel(header, rows, lowered.index("yyyymm"), scale, source)


def read_factor_file(path, unit: str = "percent") -> MonthlyPanel:
    path = Path(path)
    return parse_factor_csv(path.read_text(encoding="utf-8-sig"), unit, source=str(path))


def read_predictor_file(path, unit: str = "decimal") -> MonthlyPanel:
    path = Path(path)
    return parse_predictor_csv(path.read_text(encoding="utf-8-sig"), unit, source=str(path))


# ---------------------------------------------------------------------------
# merge

def _lag_parts(name: str):
    m = _LAG_RE.match(name)
    return (m.group("base"), int(m.group("k"))) if m else (name, 0)


def _lagged(months: np.ndarray, values: np.ndarray, k: int) -> np.ndarray:
    # calendar lookup, so a gap never shifts a value onto the wrong month
    ordinals = month_ordinal(months)
    pos = np.searchsorted(ordinals, ordinals - k)
    pos_c = np.clip(pos, 0, len(ordinals) - 1)
    hit = ordinals[pos_c] == ordinals - k
    return np.where(hit, values[pos_c], np.nan)


def build_dataset(
    factors: MonthlyPanel,
    predictors: MonthlyPanel,
    feature_names: Sequence[str] = DEFAULT_FEATURES,
    target_name: str = DEFAULT_TARGET,
) -> AlignedDataset:
    """Merge the two sources and construct spreads and lagged features.

    ``tms = lty - tbl`` and ``dfy = baa - aaa``. Any ``<col>_lag<k>`` feature
    is the value of ``<col>`` ``k`` calendar months earlier. Months missing a
    value needed by the target or a feature are dropped; the surviving months
    must be contiguous. Leading rows whose lags reach before the sample are
    retained and ``first_usable_month`` marks the first complete row.
    """
    for col in ("cma",):
        if col not in factors:
            raise MissingColumn(f"factor panel lacks {col!r}")
    for col in ("tbl", "lty", "aaa", "baa"):
        if col not in predictors:
            raise MissingColumn(f"predictor panel lacks {col!r}")

    common = np.intersect1d(factors.months, predictors.months)
    if common.size == 0:
        raise NoOverlap("factor and predictor files share no months")
    if common.size < 2:
        raise InsufficientRows("factor and predictor files overlap on fewer than 2 months")
    fi = np.searchsorted(factors.months, common)
    pi = np.searchsorted(predictors.months, common)

    cols: dict[str, np.ndarray] = {}
    for name, v in factors.columns.items():
        cols[name] = v[fi]
    for name, v in predictors.columns.items():
        if name not in cols:
            cols[name] = v[pi]
    cols["tms"] = cols["lty"] - cols["tbl"]
    cols["dfy"] = cols["baa"] - cols["aaa"]
    for optional in ("mkt_rf", "corpr", "rf"):
        cols.setdefault(optional, np.full(common.size, np.nan))

    required = {target_name} | {_lag_parts(f)[0] for f in feature_names}
    unknown = sorted(r for r in required if r not in cols)
    if unknown:
        raise MissingColumn(f"no source column for {unknown}")
    complete = np.ones(common.size, dtype=bool)
    for r in sorted(required):
        complete &= np.isfinite(cols[r])
    if complete.sum() < 2:
        raise InsufficientRows("fewer than 2 months with complete required values")
    months = common[complete]
    cols = {k: v[complete] for k, v in cols.items()}
    panel = MonthlyPanel(months, cols)
    if not panel.is_contiguous():
        ords = month_ordinal(months)
        gap = int(months[np.flatnonzero(np.diff(ords) != 1)[0]])
        raise NonContiguousMonths(
            f"merged months are not contiguous after month {gap}; "
            "fill or trim the sources so the sample has no holes"
        )

    lag_names = sorted({f for f in (*feature_names, *ALIGNED_DUMP_COLUMNS) if _lag_parts(f)[1]})
    new = {}
    for name in lag_names:
        base, k = _lag_parts(name)
        if base in panel:
            new[name] = _lagged(panel.months, np.asarray(panel[base]), k)
    panel = panel.with_columns(**new)

    defined = np.isfinite(panel[target_name])
    for f in feature_names:
        defined &= np.isfinite(panel[f])
    if not defined.any():
        raise InsufficientRows("no month has every feature defined")
    first = int(panel.months[np.argmax(defined)])
    if defined.sum() < 2:
        raise InsufficientRows("fewer than 2 usable months")
    return AlignedDataset(panel, tuple(feature_names), target_name, first)


def load_dataset(
    factor_path,
    predictor_path,
    factor_unit: str = "percent",
    predictor_unit: str = "decimal",
    feature_names: Sequence[str] = DEFAULT_FEATURES,
) -> AlignedDataset:
    return build_dataset(
        read_factor_file(factor_path, factor_unit),
        read_predictor_file(predictor_path, predictor_unit),
        feature_names,
    )


def split(ds: AlignedDataset, spec: SplitSpec) -> tuple[AlignedDataset, AlignedDataset]:
    """Partition ``ds`` into training and test datasets by month."""
    months = ds.months
    if spec.train_start < months[0] or spec.test_end > months[-1]:
        raise EmptyPartition(
            f"split {spec.train_start}-{spec.test_end} exceeds data range "
            f"{months[0]}-{months[-1]}"
        )
    parts = []
    for start, end, label in (
        (spec.train_start, spec.train_end, "training"),
        (spec.test_start, spec.test_end, "test"),
    ):
        mask = (months >= start) & (months <= end)
        if not mask.any():
            raise EmptyPartition(f"{label} partition {start}-{end} is empty")
        sub = ds.panel.take(mask)
        parts.append(
            AlignedDataset(sub, ds.feature_names, ds.target_name, max(ds.first_usable_month, int(sub.months[0])))
        )
    return parts[0], parts[1]


def concat(first: AlignedDataset, second: AlignedDataset) -> AlignedDataset:
    panel = MonthlyPanel(
        np.concatenate([first.months, second.months]),
        {k: np.concatenate([first.panel[k], second.panel[k]]) for k in first.panel.names},
    )
    return AlignedDataset(panel, first.feature_names, first.target_name, first.first_usable_month)


# ---------------------------------------------------------------------------
# CSV output

def fmt(x: float) -> str:
    """Shortest round-tripping representation; empty for NaN."""
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def write_csv(path, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([fmt(c) if isinstance(c, (float, np.floating)) else c for c in row])


def dump_aligned(ds: AlignedDataset, path) -> None:
    p = ds.panel
    cols = [p[c] if c in p else np.full(len(p), np.nan) for c in ALIGNED_DUMP_COLUMNS]
    write_csv(
        path,
        ("yyyymm", *ALIGNED_DUMP_COLUMNS),
        ([int(m), *(float(c[i]) for c in cols)] for i, m in enumerate(p.months)),
    )
