"""Fractional contributions, normalized citations, FSS / FSS* and the percentile-rank foil."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .model import (
    AcademicRank,
    CitationBaseline,
    Convention,
    Publication,
    Researcher,
    stipend_coefficient,
)


class MissingBaselineError(KeyError):
    def __init__(self, publication_id: str, cells):
        self.publication_id = publication_id
        self.cells = sorted(cells)
        super().__init__(f"publication {publication_id}: no citation baseline for {self.cells}")


@dataclass(frozen=True)
class BylineWeights:
    """Shares used for positional (life-science) bylines with three or more authors."""

    intramural_anchor: float = 0.40  # first and last, same institution
    intramural_rest: float = 0.20
    extramural_anchor: float = 0.30  # first and last
    extramural_second: float = 0.15  # second and second-to-last
    extramural_rest: float = 0.10


DEFAULT_WEIGHTS = BylineWeights()


def byline_weights(publication: Publication, weights: BylineWeights = DEFAULT_WEIGHTS) -> list[float]:
    """Contribution of every byline position, in byline order; sums to 1."""
    n = publication.n_authors
    if n == 0:
        raise ValueError(f"publication {publication.id}: empty byline")
    if publication.convention is Convention.ALPHABETICAL or n <= 2:
        return [1.0 / n] * n

    by_pos = sorted(publication.byline, key=lambda a: a.position)
    raw = [0.0] * n
    if by_pos[0].institution_id == by_pos[-1].institution_id:
        raw[0] = raw[-1] = weights.intramural_anchor
        for i in range(1, n - 1):
            raw[i] = weights.intramural_rest / (n - 2)
    else:
        raw[0] = raw[-1] = weights.extramural_anchor
        # for n=3 the second and second-to-last slot coincide; n=4 leaves no "others"
        raw[1] = raw[-2] = weights.extramural_second
        inner = n - 4
        for i in range(2, n - 2):
            raw[i] = weights.extramural_rest / inner
    total = sum(raw)
    return [w / total for w in raw]


def fractional_contribution(publication: Publication, position: int,
                            weights: BylineWeights = DEFAULT_WEIGHTS) -> float:
    if not 1 <= position <= publication.n_authors:
        raise IndexError(f"publication {publication.id}: position {position} outside 1..{publication.n_authors}")
    return byline_weights(publication, weights)[position - 1]


def normalized_citation(publication: Publication, baselines: CitationBaseline) -> float:
    """Citations divided by the mean of the baseline cells of the publication's categories."""
    if publication.citations == 0:
        return 0.0
    cells = [(publication.year, c) for c in publication.subject_categories]
    means = [baselines[k] for k in cells if k in baselines]
    if not means:
        raise MissingBaselineError(publication.id, cells)
    return publication.citations / (sum(means) / len(means))


def fss(researcher: Researcher, publications: Iterable[Publication], baselines: CitationBaseline,
        weights: BylineWeights = DEFAULT_WEIGHTS) -> float:
    """Average yearly field-normalized, fractionally counted citation impact.

    Publications on which the researcher does not appear are ignored.
    """
    if not researcher.years_active > 0:
        raise ValueError(f"researcher {researcher.id}: years_active must be positive")
    total = 0.0
    for pub in publications:
        pos = pub.position_of(researcher.id)
        if pos is None:
            continue
        ratio = normalized_citation(pub, baselines)
        if ratio:
            total += ratio * fractional_contribution(pub, pos, weights)
    return total / researcher.years_active


def fss_star(fss_value: float, rank: AcademicRank,
             table: Mapping[AcademicRank, float] | None = None) -> float:
    if fss_value < 0:
        raise ValueError("fss must be nonnegative")
    return fss_value / stipend_coefficient(rank, table)


def gross_productivity(researcher: Researcher, publications: Iterable[Publication],
                       weights: BylineWeights = DEFAULT_WEIGHTS) -> float:
    """Fractional publication count per year of work."""
    if not researcher.years_active > 0:
        raise ValueError(f"researcher {researcher.id}: years_active must be positive")
    total = 0.0
    for pub in publications:
        pos = pub.position_of(researcher.id)
        if pos is not None:
            total += fractional_contribution(pub, pos, weights)
    return total / researcher.years_active


def competition_ranks(scores: Sequence[float]) -> list[int]:
    """1-based descending ranks; tied scores share the best rank ("1224" ranking)."""
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    ranks = [0] * len(scores)
    for pos, i in enumerate(order):
        if pos and scores[i] == scores[order[pos - 1]]:
            ranks[i] = ranks[order[pos - 1]]
        else:
            ranks[i] = pos + 1
    return ranks


def percentile_rank(scores: Mapping[str, float], researcher_id: str) -> float:
    """Share of the field ranked strictly below the researcher, in percent.

    >>> percentile_rank({f"r{i}": 10 - i for i in range(10)}, "r2")
    70.0
    """
    if researcher_id not in scores:
        raise KeyError(f"researcher {researcher_id!r} not in score list")
    mine = scores[researcher_id]
    rank = 1 + sum(1 for s in scores.values() if s > mine)
    n = len(scores)
    return 100.0 * (n - rank) / n


def percentile_ranks(scores: Mapping[str, float]) -> dict[str, float]:
    ids = list(scores)
    ranks = competition_ranks([scores[i] for i in ids])
    n = len(ids)
    return {i: 100.0 * (n - r) / n for i, r in zip(ids, ranks)}
