"""Synthetic stand-ins for the factor and predictor files.

The generated CSVs follow the real layouts (factor file in percent with two
decimals, predictor file in decimals) so the whole pipeline can run without
the public data. CMA is simulated with a small loading on its own lag and on
the lagged spreads, so the timing models have something to find.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataio import month_range


def _ar1(rng, n, mean, phi, sigma, floor=None):
    x = np.empty(n)
    x[0] = mean
    for t in range(1, n):
        x[t] = mean + phi * (x[t - 1] - mean) + sigma * rng.normal()
        if floor is not None:
            x[t] = max(x[t], floor)
    return x


def synthetic_sources(
    start: int = 196307,
    end: int = 202212,
    seed: int = 0,
    predictor_start: int = 196001,
    signal: float = 1.0,
) -> tuple[str, str]:
    """Return ``(factor_csv, predictor_csv)`` text covering ``start``-``end``."""
    rng = np.random.default_rng(seed)
    months = month_range(predictor_start, end)
    n = months.size
    tbl = _ar1(rng, n, 0.045, 0.98, 0.003, floor=0.0001)
    tms = _ar1(rng, n, 0.017, 0.95, 0.003)
    aaa = _ar1(rng, n, 0.07, 0.99, 0.002, floor=0.02)
    dfy = _ar1(rng, n, 0.010, 0.95, 0.001, floor=0.003)
    lty = tbl + tms
    baa = aaa + dfy
    corpr = 0.006 + 0.025 * rng.normal(size=n)

    cma = np.empty(n)
    cma[0] = 0.003
    for t in range(1, n):
        mu = 0.002 + signal * (0.15 * cma[t - 1] + 0.12 * (tms[t - 1] - 0.017) + 0.4 * (dfy[t - 1] - 0.01))
        cma[t] = mu + 0.019 * rng.normal()
    mkt = 0.006 + 0.045 * rng.normal(size=n)
    smb, hml, rmw = (0.002 + 0.03 * rng.normal(size=n) for _ in range(3))
    rf = np.clip(tbl / 12, 0, None)

    f_rows = [",Mkt-RF,SMB,HML,RMW,CMA,RF"]
    p_rows = ["yyyymm,Index,D12,E12,b/m,tbl,AAA,BAA,lty,ntis,Rfree,infl,ltr,corpr,svar"]
    index = 100.0
    for i, m in enumerate(months):
        index *= 1 + mkt[i]
        if m >= start:
            vals = [mkt[i], smb[i], hml[i], rmw[i], cma[i], rf[i]]
            f_rows.append(f"{m}," + ",".join(f"{100 * v:.2f}" for v in vals))
        p_rows.append(
            f'{m},"{index:,.2f}",{index * 0.03:.4f},{index * 0.06:.4f},{0.5 + 0.1 * np.sin(i / 50):.6f},'
            f"{tbl[i]:.6f},{aaa[i]:.6f},{baa[i]:.6f},{lty[i]:.6f},{0.01 * rng.normal():.6f},"
            f"{rf[i]:.6f},{0.003 * rng.normal():.6f},{0.02 * rng.normal():.6f},{corpr[i]:.6f},"
            f"{0.002 + 0.001 * rng.random():.6f}"
        )
    return "\n".join(f_rows) + "\n", "\n".join(p_rows) + "\n"


def write_synthetic_sources(directory, **kwargs) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    factors, predictors = synthetic_sources(**kwargs)
    fp = directory / "factors.csv"
    pp = directory / "predictors.csv"
    fp.write_text(factors, encoding="utf-8")
    pp.write_text(predictors, encoding="utf-8")
    return fp, pp
