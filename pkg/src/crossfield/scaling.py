"""Field standardization by the four candidate scaling factors, pooled rankings and top shares."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import ScoreKind, ScoreSet


class ScalingFactorKind(str, enum.Enum):
    MEAN_ALL = "mean_all"
    MEAN_NONZERO = "mean_nonzero"
    MEDIAN_ALL = "median_all"
    MEDIAN_NONZERO = "median_nonzero"


class ZeroDenominatorError(ValueError):
    def __init__(self, field_id: str, kind: ScalingFactorKind):
        self.field_id, self.kind = field_id, kind
        super().__init__(f"field {field_id}: {kind.value} denominator is zero or undefined")


@dataclass(frozen=True)
class FieldScalingStats:
    """Candidate denominators of one field; the nonzero variants are NaN for all-zero fields."""

    field_id: str
    n: int
    n_zero: int
    mean: float
    mean_nonzero: float
    median: float
    median_nonzero: float

    def denominator(self, kind: ScalingFactorKind) -> float:
        return {
            ScalingFactorKind.MEAN_ALL: self.mean,
            ScalingFactorKind.MEAN_NONZERO: self.mean_nonzero,
            ScalingFactorKind.MEDIAN_ALL: self.median,
            ScalingFactorKind.MEDIAN_NONZERO: self.median_nonzero,
        }[ScalingFactorKind(kind)]


def field_scaling_stats(scores: ScoreSet) -> FieldScalingStats:
    if not len(scores):
        raise ValueError(f"field {scores.field_id}: empty score set")
    x = np.asarray(scores.scores, dtype=float)
    pos = x[x > 0]
    nan = float("nan")
    return FieldScalingStats(
        field_id=scores.field_id,
        n=x.size,
        n_zero=int(x.size - pos.size),
        mean=float(x.mean()),
        mean_nonzero=float(pos.mean()) if pos.size else nan,
        median=float(np.median(x)),
        median_nonzero=float(np.median(pos)) if pos.size else nan,
    )


def standardize(scores: ScoreSet, kind: ScalingFactorKind,
                stats: FieldScalingStats | None = None) -> ScoreSet:
    """Divide every score of the field by the chosen field statistic."""
    kind = ScalingFactorKind(kind)
    stats = stats or field_scaling_stats(scores)
    denom = stats.denominator(kind)
    if not denom > 0:  # also catches NaN
        raise ZeroDenominatorError(scores.field_id, kind)
    return ScoreSet(scores.field_id, scores.ids, tuple(s / denom for s in scores.scores),
                    kind=ScoreKind.STANDARDIZED, factor=kind.value)


@dataclass(frozen=True)
class RankedEntry:
    rank: int
    researcher_id: str
    field_id: str
    score: float


def pooled_ranking(score_sets: Iterable[ScoreSet]) -> list[RankedEntry]:
    """Merge fields into one descending ranking with competition ranks.

    Every input must have been produced the same way (same kind and factor);
    otherwise the pooled order would compare different units.
    """
    score_sets = list(score_sets)
    flavours = {(s.kind, s.factor) for s in score_sets}
    if len(flavours) > 1:
        raise ValueError(f"cannot pool score sets of mixed kinds: {sorted(map(str, flavours))}")
    rows = [(score, rid, s.field_id) for s in score_sets for rid, score in zip(s.ids, s.scores)]
    # stable on input order for equal scores
    rows.sort(key=lambda r: -r[0])
    out: list[RankedEntry] = []
    for pos, (score, rid, fid) in enumerate(rows):
        rank = out[-1].rank if out and out[-1].score == score else pos + 1
        out.append(RankedEntry(rank, rid, fid, score))
    return out


def binomial_band(p: float, n_ref: float) -> tuple[float, float]:
    """p plus/minus one binomial standard deviation for a class of size n_ref."""
    sd = math.sqrt(p * (1 - p) / n_ref)
    return p - sd, p + sd


@dataclass(frozen=True)
class TopShareRow:
    field_id: str
    p: float
    size: int
    marked: int
    share: float
    band_low: float
    band_high: float

    @property
    def violation(self) -> bool:
        return not self.band_low <= self.share <= self.band_high

    @property
    def deviation(self) -> float:
        return abs(self.share - self.p)


def top_set(ranking: Sequence[RankedEntry], p: float) -> list[RankedEntry]:
    """The first floor(p*N) entries plus anything tied with the last of them."""
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    cut = math.floor(p * len(ranking) + 1e-9)
    if cut == 0:
        return []
    threshold = ranking[cut - 1].score
    return [e for e in ranking if e.score >= threshold]


def top_share(ranking: Sequence[RankedEntry], p: float,
              field_sizes: Mapping[str, int] | None = None,
              band_n: float | None = None) -> list[TopShareRow]:
    """Share of each field among the global top-p researchers, with admissible bands.

    `band_n` fixes the reference class size for every band; by default each
    field's band uses its own size.
    """
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if not ranking:
        raise ValueError("empty ranking")
    if field_sizes is None:
        field_sizes = {}
        for e in ranking:
            field_sizes[e.field_id] = field_sizes.get(e.field_id, 0) + 1
    marked: dict[str, int] = {f: 0 for f in field_sizes}
    for e in top_set(ranking, p):
        marked[e.field_id] = marked.get(e.field_id, 0) + 1
    rows = []
    for fid, size in field_sizes.items():
        low, high = binomial_band(p, band_n if band_n is not None else size)
        rows.append(TopShareRow(fid, p, size, marked[fid], marked[fid] / size, low, high))
    return rows
