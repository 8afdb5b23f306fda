import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from factor_timing.dataio import SplitSpec, build_dataset, parse_factor_csv, parse_predictor_csv
from factor_timing.synthetic import synthetic_sources

_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""

    class _Recorder:
        def __init__(self):
            self.number = None

        def __call__(self, number, ok, detail=""):
            status = "PASS" if ok else "FAIL"
            _ACCEPTANCE_LINES.append(f"criterion {number:>2}: {status}  {detail}")
            print(f"criterion {number}: {status} {detail}")
            return ok

        def skip(self, number, reason):
            _ACCEPTANCE_LINES.append(f"criterion {number:>2}: NOT RUN  {reason}")
            pytest.skip(reason)

    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def synthetic_text():
    return synthetic_sources(seed=11)


@pytest.fixture(scope="session")
def full_dataset(synthetic_text):
    f, p = synthetic_text
    return build_dataset(parse_factor_csv(f), parse_predictor_csv(p))


@pytest.fixture(scope="session")
def small_sources():
    """Ten years of data: train 1990-1995, test 1996-2000."""
    return synthetic_sources(start=199001, end=200012, predictor_start=198901, seed=5)


@pytest.fixture(scope="session")
def small_dataset(small_sources):
    f, p = small_sources
    return build_dataset(parse_factor_csv(f), parse_predictor_csv(p))


@pytest.fixture(scope="session")
def small_split():
    return SplitSpec(199001, 199512, 199601, 200012)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def real_data_paths():
    """Paths to the public monthly files, if the user has supplied them.

    Looks in ``$FACTOR_TIMING_DATA`` (a directory) and then ``<repo>/data``
    for ``factors.csv`` and ``predictors.csv``.
    """
    candidates = []
    if os.environ.get("FACTOR_TIMING_DATA"):
        candidates.append(Path(os.environ["FACTOR_TIMING_DATA"]))
    candidates.append(Path(__file__).resolve().parents[1] / "data")
    for d in candidates:
        f, p = d / "factors.csv", d / "predictors.csv"
        if f.is_file() and p.is_file():
            return f, p
    return None
