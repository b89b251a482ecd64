"""Seeded synthetic field populations and a harness comparing the scaling factors.

Each field gets a deterministic number of nil scores plus generalized Pareto
draws (negative draws clamp to zero).  Randomness comes from numpy's PCG64,
seeded per field from the run seed and a SHA-256 digest of the field id, so a
field's scores depend neither on generation order nor on its neighbours.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .analysis import DegenerateMADError, gpd_ppf, incidence_range, outlier_incidence
from .model import AcademicRank, ScoreKind, ScoreSet
from .scaling import (
    ScalingFactorKind,
    ZeroDenominatorError,
    field_scaling_stats,
    pooled_ranking,
    standardize,
    top_share,
)

log = logging.getLogger(__name__)

RNG_ALGORITHM = "PCG64"
DEFAULT_P = (0.05, 0.10, 0.20)
RAW = "raw"  # label of the unstandardized baseline in evaluations

DEFAULT_RANK_MIX = {
    AcademicRank.FULL_CONFIRMED: 0.27,
    AcademicRank.FULL_PROBATIONARY: 0.03,
    AcademicRank.ASSOCIATE_CONFIRMED: 0.27,
    AcademicRank.ASSOCIATE_PROBATIONARY: 0.03,
    AcademicRank.ASSISTANT_CONFIRMED: 0.35,
    AcademicRank.ASSISTANT_PROBATIONARY: 0.05,
}


@dataclass(frozen=True)
class FieldSpec:
    field_id: str
    n: int
    zero_share: float
    k: float
    sigma: float
    mu: float = 0.0
    rank_mix: Mapping[AcademicRank, float] = field(default_factory=lambda: dict(DEFAULT_RANK_MIX))

    def __post_init__(self):
        if not self.field_id:
            raise ValueError("field spec needs an id")
        if self.n < 1:
            raise ValueError(f"field {self.field_id}: n must be >= 1")
        if not 0 <= self.zero_share < 1:
            raise ValueError(f"field {self.field_id}: zero_share must lie in [0, 1)")
        if not self.sigma > 0:
            raise ValueError(f"field {self.field_id}: sigma must be positive")
        if not self.rank_mix or any(w < 0 for w in self.rank_mix.values()) or sum(self.rank_mix.values()) <= 0:
            raise ValueError(f"field {self.field_id}: rank_mix needs nonnegative weights with positive sum")

    @property
    def n_zero(self) -> int:
        return math.floor(self.zero_share * self.n + 1e-9)


def _field_rng(seed: int, field_id: str, stream: int = 0) -> np.random.Generator:
    digest = hashlib.sha256(field_id.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    seed = int(seed) & (2**64 - 1)
    ss = np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32, stream, *words])
    return np.random.Generator(np.random.PCG64(ss))


def generate_field(spec: FieldSpec, seed: int) -> ScoreSet:
    rng = _field_rng(seed, spec.field_id)
    n_draw = spec.n - spec.n_zero
    u = 1.0 - rng.random(n_draw)  # uniform on (0, 1]
    draws = np.maximum(gpd_ppf(u, spec.k, spec.sigma, spec.mu), 0.0)
    scores = np.concatenate([np.zeros(spec.n_zero), draws])
    ids = tuple(f"{spec.field_id}#{i:05d}" for i in range(spec.n))
    return ScoreSet(spec.field_id, ids, tuple(scores.tolist()), kind=ScoreKind.FSS_STAR)


def generate_population(specs: Sequence[FieldSpec], seed: int) -> list[ScoreSet]:
    ids = [s.field_id for s in specs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate field ids in specs")
    return [generate_field(spec, seed) for spec in specs]


def generate_ranks(specs: Sequence[FieldSpec], seed: int) -> dict[str, list[AcademicRank]]:
    """Academic ranks for the synthetic researchers, from a stream separate from the scores."""
    out = {}
    for spec in specs:
        rng = _field_rng(seed, spec.field_id, stream=1)
        ranks = list(spec.rank_mix)
        w = np.array([spec.rank_mix[r] for r in ranks], dtype=float)
        picks = rng.choice(len(ranks), size=spec.n, p=w / w.sum())
        out[spec.field_id] = [ranks[j] for j in picks]
    return out


# -- spec files ----------------------------------------------------------------

def parse_specs(doc: Mapping) -> tuple[list[FieldSpec], dict]:
    """Turn a parsed TOML document into field specs plus its top-level settings."""
    rows = doc.get("field")
    if not rows:
        raise ValueError("spec file has no [[field]] entries")
    if isinstance(rows, Mapping):
        rows = [rows]
    specs = []
    for i, row in enumerate(rows, start=1):
        try:
            mix = row.get("rank_mix")
            specs.append(FieldSpec(
                field_id=str(row["id"]),
                n=int(row["n"]),
                zero_share=float(row.get("zero_share", 0.0)),
                k=float(row["k"]),
                sigma=float(row["sigma"]),
                mu=float(row.get("mu", 0.0)),
                rank_mix={AcademicRank.parse(k): float(v) for k, v in mix.items()} if mix else dict(DEFAULT_RANK_MIX),
            ))
        except KeyError as exc:
            raise ValueError(f"field entry {i}: missing key {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ValueError(f"field entry {i}: {exc}") from None
    settings = {k: v for k, v in doc.items() if k != "field"}
    algo = settings.get("rng", RNG_ALGORITHM)
    if algo != RNG_ALGORITHM:
        raise ValueError(f"unsupported rng {algo!r}; this build uses {RNG_ALGORITHM}")
    return specs, settings


def load_specs(path: str | Path) -> tuple[list[FieldSpec], dict]:
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ValueError(f"{path}: {exc}") from None
    return parse_specs(doc)


def benchmark_specs() -> list[FieldSpec]:
    """The bundled 18-field benchmark population."""
    text = resources.files("crossfield").joinpath("data/benchmark18.toml").read_text(encoding="utf-8")
    return parse_specs(tomllib.loads(text))[0]


BENCHMARK_SEED = 2013


# -- evaluation ---------------------------------------------------------------

@dataclass
class TopShareSummary:
    p: float
    max_deviation: float
    violations: int
    worst_field: str
    rows: list


@dataclass
class FactorEvaluation:
    kind: str
    top: dict[float, TopShareSummary]
    ccdf_spread: float
    outlier_range: float
    n_outliers: int
    skipped: list[str] = field(default_factory=list)
    outlier_incidence: dict[str, float] = field(default_factory=dict)


@dataclass
class EvaluationResult:
    p_values: tuple[float, ...]
    factors: dict[str, FactorEvaluation]

    def __getitem__(self, kind) -> FactorEvaluation:
        return self.factors[getattr(kind, "value", kind)]

    def ranking(self, p: float | None = None) -> list[str]:
        """Scaling kinds ordered best first: fewest band violations, then CCDF spread."""
        p = self.p_values[0] if p is None else p
        kinds = [k for k in self.factors if k != RAW]
        return sorted(kinds, key=lambda k: (self.factors[k].top[p].violations, self.factors[k].ccdf_spread))


def ccdf_spread(score_sets: Sequence[ScoreSet], upper_quantile: float = 0.9, points: int = 64) -> float:
    """Largest cross-field gap between log10 CCDF curves.

    Curves are compared on a geometric grid from the smallest positive score to
    the lowest per-field `upper_quantile`, where every field's CCDF is at least
    ``1 - upper_quantile``; the sparse extreme tail is left out.
    """
    arrays = [np.sort(np.asarray(s.scores, dtype=float)) for s in score_sets]
    positive = [a[a > 0] for a in arrays]
    if len(arrays) < 2 or any(p.size == 0 for p in positive):
        return 0.0
    lo = min(float(p[0]) for p in positive)
    hi = min(float(np.quantile(a, upper_quantile)) for a in arrays)
    if not hi > lo:
        hi = lo
    grid = np.geomspace(lo, hi, points) if hi > lo else np.array([lo])
    curves = []
    for a in arrays:
        above = a.size - np.searchsorted(a, grid, side="left")
        curves.append(np.log10(np.maximum(above, 1) / a.size))
    curves = np.vstack(curves)
    return float(np.max(curves.max(axis=0) - curves.min(axis=0)))


def _evaluate(kind: str, sets: list[ScoreSet], p_values, band_n, mad_threshold, skipped) -> FactorEvaluation:
    ranking = pooled_ranking(sets)
    top = {}
    for p in p_values:
        rows = top_share(ranking, p, {s.field_id: len(s) for s in sets}, band_n=band_n)
        worst = max(rows, key=lambda r: r.deviation)
        top[p] = TopShareSummary(p, worst.deviation, sum(r.violation for r in rows), worst.field_id, rows)
    try:
        mad = outlier_incidence(sets, mad_threshold)
        spread, n_out, incidence = incidence_range(mad), mad.n_outliers, mad.incidence
    except (DegenerateMADError, ValueError) as exc:
        log.warning("%s: outlier analysis skipped (%s)", kind, exc)
        spread, n_out, incidence = float("nan"), 0, {}
    return FactorEvaluation(kind, top, ccdf_spread(sets), spread, n_out, skipped, incidence)


def evaluate_scaling_factors(score_sets: Sequence[ScoreSet], p_values: Iterable[float] = DEFAULT_P,
                             band_n: float | None = None, mad_threshold: float = 5.0,
                             include_raw: bool = True) -> EvaluationResult:
    """Standardize with each factor kind and score how comparable the fields become.

    A field whose denominator is zero for some kind is left out of that kind's
    evaluation with a warning.
    """
    score_sets = list(score_sets)
    p_values = tuple(p_values)
    if len(score_sets) < 2:
        raise ValueError("need at least two fields to compare")
    stats = {s.field_id: field_scaling_stats(s) for s in score_sets}
    factors: dict[str, FactorEvaluation] = {}
    if include_raw:
        factors[RAW] = _evaluate(RAW, score_sets, p_values, band_n, mad_threshold, [])
    for kind in ScalingFactorKind:
        sets, skipped = [], []
        for s in score_sets:
            try:
                sets.append(standardize(s, kind, stats[s.field_id]))
            except ZeroDenominatorError:
                log.warning("%s: field %s skipped, zero denominator", kind.value, s.field_id)
                skipped.append(s.field_id)
        factors[kind.value] = _evaluate(kind.value, sets, p_values, band_n, mad_threshold, skipped)
    return EvaluationResult(p_values, factors)
