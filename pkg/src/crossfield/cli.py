"""Command-line entry point: ``crossfield {score,standardize,analyze,simulate,percentile}``.

Report tables print 3 decimals with percentages on a 0-100 scale; score files
and CCDF series keep full precision so they can be read back losslessly.
Set ``CROSSFIELD_LOG`` (DEBUG, INFO, WARNING, ...) for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import re
import sys
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .analysis import (
    CCDF_OFFSET,
    MAD_THRESHOLD,
    DegenerateMADError,
    InsufficientDataError,
    FitError,
    ccdf_series,
    descriptive_stats,
    fit_gpd,
    incidence_range,
    ks_test,
    outlier_incidence,
)
from .indicator import MissingBaselineError, fss, fss_star, percentile_ranks
from .ingest import ParseError, filter_eligible_fields, load_dataset, write_baselines
from .model import ScoreKind, ScoreSet, load_stipend_table, stipend_coefficient
from .scaling import (
    ScalingFactorKind,
    ZeroDenominatorError,
    pooled_ranking,
    standardize,
    top_share,
)
from .synth import BENCHMARK_SEED, RAW, benchmark_specs, evaluate_scaling_factors, generate_population, generate_ranks, load_specs

log = logging.getLogger("crossfield")

SCORE_COLUMNS = ["researcher", "field", "rank", "t", "fss", "fss_star"]
STD_COLUMN = "fss_star_std"
SYNTH_YEARS = 5.0


class CliError(Exception):
    pass


@dataclass
class RunConfig:
    out: Path
    factor: ScalingFactorKind | None = None
    top: tuple[float, ...] = (0.05, 0.10, 0.20)
    band_n: float | None = None
    mad_threshold: float = MAD_THRESHOLD
    offset: float = CCDF_OFFSET
    stipend_table: Path | None = None
    seed: int = BENCHMARK_SEED
    strict: bool = False


# -- formatting ---------------------------------------------------------------

def _f3(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.3f}"


def _full(x: float) -> str:
    return repr(float(x))


def _pct(x) -> str:
    return "" if x is None else _f3(100.0 * x)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _safe_name(field_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", field_id)


# -- argument types -----------------------------------------------------------

def _p_list(text: str) -> tuple[float, ...]:
    try:
        ps = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not ps or any(not 0 < p < 1 for p in ps):
        raise argparse.ArgumentTypeError("top fractions must lie in (0, 1)")
    return ps


def _band_n(text: str) -> float | None:
    if text == "field":
        return None
    try:
        n = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--band-n takes a positive number or 'field'") from None
    if not n > 0:
        raise argparse.ArgumentTypeError("--band-n must be positive")
    return n


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer seed: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


# -- score file I/O -----------------------------------------------------------

def read_score_rows(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"researcher", "field", "fss_star"} - set(reader.fieldnames or ())
        if missing:
            raise CliError(f"{path}:1: missing columns {sorted(missing)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                row["fss_star"] = float(row["fss_star"])
                if row.get(STD_COLUMN) not in (None, ""):
                    row[STD_COLUMN] = float(row[STD_COLUMN])
            except ValueError:
                raise CliError(f"{path}:{lineno}: field {row.get('field')}: non-numeric score") from None
            if row["fss_star"] < 0:
                raise CliError(f"{path}:{lineno}: field {row['field']}: negative fss_star")
            rows.append(row)
    return rows


def score_sets_from_rows(rows, column: str, kind=ScoreKind.FSS_STAR, factor=None) -> list[ScoreSet]:
    grouped: dict[str, list[tuple[str, float]]] = defaultdict(list)
    for row in rows:
        value = row.get(column)
        if value in (None, ""):
            continue
        grouped[row["field"]].append((row["researcher"], value))
    return [ScoreSet.from_pairs(fid, pairs, kind=kind, factor=factor) for fid, pairs in grouped.items()]


# -- commands -----------------------------------------------------------------

def cmd_score(args, cfg: RunConfig) -> int:
    try:
        ds = load_dataset(args.researchers, args.publications, args.baselines)
    except (ParseError, ValueError) as exc:
        raise CliError(str(exc)) from None
    table = load_stipend_table(cfg.stipend_table) if cfg.stipend_table else None
    keep = None
    if args.min_cited_share is not None:
        keep = filter_eligible_fields(ds, args.min_cited_share)
        dropped = {r.field_id for r in ds.researchers} - keep
        for fid in sorted(dropped):
            log.warning("field %s dropped: below cited-share threshold %.2f", fid, args.min_cited_share)

    pubs = ds.publications_of()
    rows = []
    for r in ds.researchers:
        if keep is not None and r.field_id not in keep:
            continue
        try:
            value = fss(r, pubs[r.id], ds.baselines)
        except MissingBaselineError as exc:
            raise CliError(f"researcher {r.id} (field {r.field_id}): {exc.args[0]}") from None
        rows.append([r.id, r.field_id, r.rank.value, _full(r.years_active), _full(value),
                     _full(fss_star(value, r.rank, table))])
    _write_csv(cfg.out / "scores.csv", SCORE_COLUMNS, rows)
    with open(cfg.out / "baselines.csv", "w", newline="", encoding="utf-8") as fh:
        write_baselines(ds.baselines, fh)
    _write_json(cfg.out / "summary.json", {
        "command": "score", "researchers": len(rows), "publications": len(ds.publications),
        "baseline_cells": len(ds.baselines), "provenance": ds.provenance,
    })
    return 0


def cmd_standardize(args, cfg: RunConfig) -> int:
    rows = read_score_rows(args.scores)
    kind = cfg.factor or ScalingFactorKind.MEAN_NONZERO
    results: dict[str, dict[str, float]] = {}
    skipped = []
    for s in score_sets_from_rows(rows, "fss_star"):
        try:
            std = standardize(s, kind)
        except ZeroDenominatorError as exc:
            skipped.append(s.field_id)
            log.warning("%s: %s; field skipped", args.scores, exc)
            continue
        results[s.field_id] = dict(zip(std.ids, std.scores))
    if skipped and cfg.strict:
        print(f"crossfield: {args.scores}: zero {kind.value} denominator in fields: {', '.join(skipped)}",
              file=sys.stderr)
        return 1

    header = [c for c in rows[0] if c != STD_COLUMN] if rows else list(SCORE_COLUMNS)
    out_rows = []
    for row in rows:
        std = results.get(row["field"], {}).get(row["researcher"])
        vals = [_full(row[c]) if c == "fss_star" else row[c] for c in header]
        out_rows.append(vals + ["" if std is None else _full(std)])
    _write_csv(cfg.out / "standardized.csv", header + [STD_COLUMN], out_rows)
    _write_json(cfg.out / "summary.json", {
        "command": "standardize", "factor": kind.value, "rows": len(out_rows), "skipped_fields": skipped,
    })
    return 0


def analyze_sets(sets: list[ScoreSet], cfg: RunConfig) -> dict:
    """Write the report bundle for `sets` into cfg.out and return the JSON summary."""
    out = cfg.out
    desc_rows, fit_rows = [], []
    for s in sets:
        try:
            d = descriptive_stats(s)
            desc_rows.append([s.field_id, d.n, _f3(d.pct_zero), _f3(d.mean), _f3(d.coeff_variation),
                              _f3(d.median), _f3(d.iqr), _f3(d.skewness), int(d.degenerate), ""])
        except InsufficientDataError as exc:
            desc_rows.append([s.field_id, len(s)] + [""] * 7 + [str(exc)])
        try:
            fit = fit_gpd(s)
            ks = ks_test(s.scores, fit)
            fit_rows.append([s.field_id, len(s), _f3(fit.k), _f3(fit.sigma), _f3(fit.mu), _f3(fit.log_likelihood),
                             _f3(ks.statistic), _f3(ks.critical_value_5pct), int(ks.reject), ""])
        except (InsufficientDataError, FitError) as exc:
            fit_rows.append([s.field_id, len(s)] + [""] * 7 + [str(exc)])
        _write_csv(out / "ccdf" / f"{_safe_name(s.field_id)}.csv", ["x", "ccdf"],
                   [[_full(x), _full(y)] for x, y in ccdf_series(s, cfg.offset)])
    _write_csv(out / "descriptive.csv",
               ["field", "n", "pct_zero", "mean", "coeff_variation", "median", "iqr", "skewness", "degenerate", "error"],
               desc_rows)
    _write_csv(out / "gpd_fit.csv",
               ["field", "n", "k", "sigma", "mu", "log_likelihood", "ks_statistic", "critical_value_5pct", "reject", "error"],
               fit_rows)

    summary: dict = {"fields": len(sets), "researchers": sum(len(s) for s in sets), "top_share": {}}
    ranking = pooled_ranking(sets)
    top_rows = []
    if ranking:
        sizes = {s.field_id: len(s) for s in sets}
        for p in cfg.top:
            rows = top_share(ranking, p, sizes, band_n=cfg.band_n)
            top_rows += [[_f3(p), r.field_id, r.size, r.marked, _pct(r.share), _pct(r.band_low), _pct(r.band_high),
                          int(r.violation)] for r in rows]
            summary["top_share"][f"{p:g}"] = {"violations": sum(r.violation for r in rows),
                                              "max_deviation_pct": 100 * max(r.deviation for r in rows)}
    _write_csv(out / "top_share.csv",
               ["p", "field", "size", "marked", "share_pct", "band_low_pct", "band_high_pct", "violation"], top_rows)

    try:
        mad = outlier_incidence(sets, cfg.mad_threshold)
        _write_csv(out / "outliers.csv", ["field", "nonzero", "outliers", "incidence_pct", "error"],
                   [[fid, size, hit, _f3(mad.incidence[fid]), ""] for fid, (hit, size) in mad.counts.items()])
        summary["outliers"] = {"total": mad.n_outliers, "observations": int(mad.flags.size),
                               "median": mad.median, "mad": mad.mad, "incidence_range_pct": incidence_range(mad)}
    except (DegenerateMADError, InsufficientDataError, ValueError) as exc:
        _write_csv(out / "outliers.csv", ["field", "nonzero", "outliers", "incidence_pct", "error"],
                   [["", "", "", "", str(exc)]])
        summary["outliers"] = {"error": str(exc)}
    return summary


def cmd_analyze(args, cfg: RunConfig) -> int:
    rows = read_score_rows(args.scores)
    has_std = any(row.get(STD_COLUMN) not in (None, "") for row in rows)
    column = STD_COLUMN if has_std else "fss_star"
    kind = ScoreKind.STANDARDIZED if has_std else ScoreKind.FSS_STAR
    sets = score_sets_from_rows(rows, column, kind=kind)
    summary = analyze_sets(sets, cfg)
    summary.update(command="analyze", score_column=column, band_n=cfg.band_n or "field")
    _write_json(cfg.out / "summary.json", summary)
    return 0


def cmd_simulate(args, cfg: RunConfig) -> int:
    if args.specs:
        try:
            specs, settings = load_specs(args.specs)
        except (OSError, ValueError) as exc:
            raise CliError(f"{args.specs}: {exc}") from None
    else:
        specs, settings = benchmark_specs(), {}
    seed = args.seed if args.seed is not None else int(settings.get("seed", BENCHMARK_SEED))
    pop = generate_population(specs, seed)
    ranks = generate_ranks(specs, seed)

    raw_rows = []
    for s in pop:
        for rid, score, rank in zip(s.ids, s.scores, ranks[s.field_id]):
            raw_rows.append([rid, s.field_id, rank.value, _full(SYNTH_YEARS),
                             _full(score * stipend_coefficient(rank)), _full(score)])
    _write_csv(cfg.out / "scores.csv", SCORE_COLUMNS, raw_rows)

    for kind in ScalingFactorKind:
        std = {}
        for s in pop:
            try:
                std[s.field_id] = dict(zip(s.ids, standardize(s, kind).scores))
            except ZeroDenominatorError:
                log.warning("simulate: %s skipped for field %s", kind.value, s.field_id)
        _write_csv(cfg.out / f"standardized_{kind.value}.csv", SCORE_COLUMNS + [STD_COLUMN],
                   [row + [_full(std[row[1]][row[0]]) if row[1] in std else ""] for row in raw_rows])

    ev = evaluate_scaling_factors(pop, cfg.top, band_n=cfg.band_n, mad_threshold=cfg.mad_threshold)
    order = ev.ranking()
    eval_rows = []
    for name in order + [RAW]:
        f = ev.factors[name]
        place = order.index(name) + 1 if name in order else ""
        for p in cfg.top:
            t = f.top[p]
            eval_rows.append([place, name, _f3(p), t.violations, _pct(t.max_deviation), t.worst_field,
                              _f3(f.ccdf_spread), _f3(f.outlier_range), f.n_outliers, ";".join(f.skipped)])
    _write_csv(cfg.out / "evaluation.csv",
               ["place", "factor", "p", "band_violations", "max_deviation_pct", "worst_field",
                "ccdf_spread", "outlier_range_pct", "outliers", "skipped_fields"], eval_rows)
    _write_json(cfg.out / "summary.json", {
        "command": "simulate", "seed": seed, "rng": "PCG64", "fields": len(specs),
        "researchers": len(raw_rows), "ranking": order, "band_n": cfg.band_n or "field",
    })
    return 0


def cmd_percentile(args, cfg: RunConfig) -> int:
    rows = read_score_rows(args.scores)
    has_std = any(row.get(STD_COLUMN) not in (None, "") for row in rows)
    column = STD_COLUMN if has_std else "fss_star"
    out_rows, found = [], None
    for s in score_sets_from_rows(rows, column):
        pr = percentile_ranks(dict(zip(s.ids, s.scores)))
        for rid, score in zip(s.ids, s.scores):
            out_rows.append([rid, s.field_id, _full(score), _f3(pr[rid])])
            if rid == args.researcher:
                found = pr[rid]
    if args.researcher is not None:
        if found is None:
            raise CliError(f"{args.scores}: researcher {args.researcher!r} not found")
        print(f"{found:.3f}")
    _write_csv(cfg.out / "percentile.csv", ["researcher", "field", column, "percentile_rank"], out_rows)
    return 0


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--factor", choices=[k.value for k in ScalingFactorKind])
    common.add_argument("--top", type=_p_list, default=(0.05, 0.10, 0.20), help="comma-separated top fractions")
    common.add_argument("--band-n", type=_band_n, default=None,
                        help="reference size for top-share bands, or 'field' for per-field bands (default)")
    common.add_argument("--mad-threshold", type=float, default=MAD_THRESHOLD)
    common.add_argument("--offset", type=float, default=CCDF_OFFSET, help="x offset of CCDF series")
    common.add_argument("--stipend-table", type=Path)
    common.add_argument("--seed", type=_seed)
    common.add_argument("--strict", action="store_true", help="fail on zero-denominator fields")

    parser = argparse.ArgumentParser(prog="crossfield", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", parents=[common], help="compute FSS and FSS* per researcher")
    p.add_argument("--researchers", type=Path, required=True)
    p.add_argument("--publications", type=Path, required=True)
    p.add_argument("--baselines", type=Path, help="precomputed baselines (default: derived from the corpus)")
    p.add_argument("--min-cited-share", type=float, help="drop fields with a smaller share of cited members")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("standardize", parents=[common], help="divide FSS* by a field scaling factor")
    p.add_argument("scores", type=Path)
    p.set_defaults(func=cmd_standardize)

    p = sub.add_parser("analyze", parents=[common], help="distribution, top-share and outlier reports")
    p.add_argument("scores", type=Path)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", parents=[common], help="synthetic population and scaling-factor evaluation")
    p.add_argument("--specs", type=Path, help="field spec TOML (default: bundled 18-field benchmark)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("percentile", parents=[common], help="within-field percentile ranks")
    p.add_argument("scores", type=Path)
    p.add_argument("--researcher", help="print this researcher's percentile rank")
    p.set_defaults(func=cmd_percentile)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("CROSSFIELD_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        out=args.out,
        factor=ScalingFactorKind(args.factor) if args.factor else None,
        top=args.top,
        band_n=args.band_n,
        mad_threshold=args.mad_threshold,
        offset=args.offset,
        stipend_table=args.stipend_table,
        seed=args.seed if args.seed is not None else BENCHMARK_SEED,
        strict=args.strict,
    )
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
        return args.func(args, cfg)
    except (CliError, ParseError, OSError, ValueError) as exc:
        print(f"crossfield: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
