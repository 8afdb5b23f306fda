"""Shared loader for the demos: real files if available, synthetic otherwise."""

import os
from pathlib import Path

from factor_timing import load_dataset
from factor_timing.dataio import build_dataset, parse_factor_csv, parse_predictor_csv
from factor_timing.synthetic import synthetic_sources


def dataset():
    d = os.environ.get("FACTOR_TIMING_DATA")
    if d and (Path(d) / "factors.csv").is_file() and (Path(d) / "predictors.csv").is_file():
        print(f"using data files in {d}")
        return load_dataset(Path(d) / "factors.csv", Path(d) / "predictors.csv")
    print("FACTOR_TIMING_DATA not set; using synthetic data with the same calendar")
    f, p = synthetic_sources(seed=11)
    return build_dataset(parse_factor_csv(f), parse_predictor_csv(p))
