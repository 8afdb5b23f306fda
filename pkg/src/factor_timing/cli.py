"""Command line: ``factor-timing {ingest,run,report}``.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .errors import FactorTimingError, MissingArtifacts

log = logging.getLogger("factor_timing")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load(args):
    from .config import load_config

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def cmd_ingest(args) -> int:
    from .dataio import dump_aligned, load_dataset
    from .pipeline import summarize_dataset

    cfg = _load(args)
    cfg.check_paths()
    d = cfg.data
    ds = load_dataset(d.factors, d.predictors, d.factor_unit, d.predictor_unit, d.features)
    print(summarize_dataset(ds, cfg))
    if args.dump:
        out = Path(args.out) if args.out else cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        dump_aligned(ds, out / "aligned.csv")
        print(f"wrote {out / 'aligned.csv'}")
    return 0


def cmd_run(args) -> int:
    from .pipeline import mark_failed, run_pipeline, write_outputs

    cfg = _load(args)
    out = Path(args.out) if args.out else cfg.output_dir
    try:
        result = run_pipeline(cfg)
    except FactorTimingError as exc:
        mark_failed(out, exc)
        raise
    written = write_outputs(result, out)
    print(f"wrote {len(written)} files to {out}")
    _print_report(out)
    return 0


def _read_rows(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _fmt_cell(text: str, digits: int = 4) -> str:
    try:
        return f"{float(text):.{digits}f}" if text != "" else "nan"
    except ValueError:
        return text


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(str(h).ljust(w) if i == 0 else str(h).rjust(w) for i, (h, w) in enumerate(zip(header, widths)))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(str(c).ljust(w) if i == 0 else str(c).rjust(w) for i, (c, w) in enumerate(zip(r, widths))))
    return "\n".join(lines)


def render_report(out_dir) -> str:
    out = Path(out_dir)
    needed = [out / "oos_r2.csv", out / "sharpe_table.csv"]
    missing = [p.name for p in needed if not p.is_file()]
    if missing:
        raise MissingArtifacts(f"{out}: missing {', '.join(missing)}; run `factor-timing run` first")
    parts = []

    r2 = _read_rows(out / "oos_r2.csv")
    parts.append("Out-of-sample R^2 (zero-mean benchmark)")
    parts.append(_table(["model", "oos_r2"], [[r["model"], _fmt_cell(r["oos_r2"], 6)] for r in r2]))

    sharpe_rows = _read_rows(out / "sharpe_table.csv")
    periods = [c for c in sharpe_rows[0].keys() if c not in ("model", "cost")] if sharpe_rows else []
    for cost in dict.fromkeys(r["cost"] for r in sharpe_rows):
        rows = [[r["model"], *(_fmt_cell(r[p]) for p in periods)] for r in sharpe_rows if r["cost"] == cost]
        parts.append("")
        parts.append(f"Sharpe ratio by period, cost = {cost}")
        parts.append(_table(["model", *periods], rows))

    ipath = out / "intervals.csv"
    irows = _read_rows(ipath) if ipath.is_file() else []
    if irows:
        costs = list(dict.fromkeys(r["cost"] for r in irows))
        models = list(dict.fromkeys(r["model"] for r in irows))
        lookup = {(r["model"], r["cost"]): r["interval"] for r in irows}
        parts.append("")
        parts.append("Rebalancing interval chosen on the validation prefix (months)")
        parts.append(_table(["model", *costs], [[m, *(lookup.get((m, c), "") for c in costs)] for m in models]))
        parts.append("")
        parts.append("Holdout terminal wealth, monthly vs chosen interval")
        parts.append(_table(
            ["model", "cost", "monthly", "chosen", "extra/yr"],
            [[r["model"], r["cost"], _fmt_cell(r["holdout_wealth_monthly"]),
              _fmt_cell(r["holdout_wealth_optimal"]), _fmt_cell(r["extra_annual_return"], 5)] for r in irows],
        ))
    return "\n".join(parts)


def _print_report(out_dir) -> None:
    print(render_report(out_dir))


def cmd_report(args) -> int:
    out = args.out or args.dir
    if out is None:
        if args.config is None:
            raise MissingArtifacts("give an output directory or --config")
        out = _load(args).output_dir
    _print_report(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="factor-timing", description="CMA factor timing: forecasts, weights, backtests.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="TOML run configuration")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--seed", type=int, help="base seed (overrides the config)")

    ing = sub.add_parser("ingest", help="merge the source files and summarize the aligned panel")
    common(ing)
    ing.add_argument("--dump", action="store_true", help="write aligned.csv")
    ing.set_defaults(func=cmd_ingest)

    run = sub.add_parser("run", help="run the full pipeline and write all tables")
    common(run)
    run.add_argument("--dump", action="store_true", help="accepted for symmetry; run always writes outputs")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="print the tables of a finished run")
    common(rep, config_required=False)
    rep.add_argument("dir", nargs="?", help="output directory of a run")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except FactorTimingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
