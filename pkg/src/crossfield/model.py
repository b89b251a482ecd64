"""Domain types shared across the package and the built-in stipend table."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping


class AcademicRank(str, enum.Enum):
    FULL_CONFIRMED = "full_confirmed"
    FULL_PROBATIONARY = "full_probationary"
    ASSOCIATE_CONFIRMED = "associate_confirmed"
    ASSOCIATE_PROBATIONARY = "associate_probationary"
    ASSISTANT_CONFIRMED = "assistant_confirmed"
    ASSISTANT_PROBATIONARY = "assistant_probationary"
    RESEARCH_ASSISTANT = "research_assistant"

    @classmethod
    def parse(cls, label: str) -> "AcademicRank":
        try:
            return cls(label.strip())
        except ValueError:
            valid = ", ".join(r.value for r in cls)
            raise ValueError(f"unknown rank {label!r} (expected one of: {valid})") from None


# Yearly average stipend 2004-2008, euro.
STIPENDS: dict[AcademicRank, int] = {
    AcademicRank.FULL_CONFIRMED: 124_939,
    AcademicRank.FULL_PROBATIONARY: 94_442,
    AcademicRank.ASSOCIATE_CONFIRMED: 90_622,
    AcademicRank.ASSOCIATE_PROBATIONARY: 68_469,
    AcademicRank.ASSISTANT_CONFIRMED: 68_844,
    AcademicRank.ASSISTANT_PROBATIONARY: 44_899,
    AcademicRank.RESEARCH_ASSISTANT: 81_721,
}

# Coefficients (ratio to the probationary assistant stipend), 3 decimals.
STIPEND_COEFFICIENTS: dict[AcademicRank, float] = {
    AcademicRank.FULL_CONFIRMED: 2.783,
    AcademicRank.FULL_PROBATIONARY: 2.103,
    AcademicRank.ASSOCIATE_CONFIRMED: 2.018,
    AcademicRank.ASSOCIATE_PROBATIONARY: 1.525,
    AcademicRank.ASSISTANT_CONFIRMED: 1.533,
    AcademicRank.ASSISTANT_PROBATIONARY: 1.0,
    AcademicRank.RESEARCH_ASSISTANT: 1.820,
}


def stipend_coefficient(rank: AcademicRank, table: Mapping[AcademicRank, float] | None = None) -> float:
    """Labor-cost coefficient of `rank`, from `table` or the built-in one."""
    table = STIPEND_COEFFICIENTS if table is None else table
    return table[AcademicRank(rank)]


def load_stipend_table(path: str | Path) -> dict[AcademicRank, float]:
    """Read a stipend-table override.

    The CSV has a ``rank`` column plus either ``coefficient`` (used as is) or
    ``stipend`` (converted to a ratio against ``assistant_probationary``).
    Ranks missing from the file keep their built-in coefficient.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty stipend table")
    cols = set(rows[0])
    if "rank" not in cols or not ({"coefficient", "stipend"} & cols):
        raise ValueError(f"{path}: need columns rank and coefficient or stipend")

    table = dict(STIPEND_COEFFICIENTS)
    if "coefficient" in cols:
        for lineno, row in enumerate(rows, start=2):
            value = float(row["coefficient"])
            if not value > 0:
                raise ValueError(f"{path}:{lineno}: coefficient must be positive")
            table[AcademicRank.parse(row["rank"])] = value
        return table

    stipends = {AcademicRank.parse(row["rank"]): float(row["stipend"]) for row in rows}
    anchor = stipends.get(AcademicRank.ASSISTANT_PROBATIONARY)
    if not anchor or anchor <= 0:
        raise ValueError(f"{path}: stipend table needs a positive assistant_probationary stipend")
    for rank, stipend in stipends.items():
        table[rank] = stipend / anchor
    return table


@dataclass(frozen=True)
class Researcher:
    id: str
    field_id: str
    uda_id: str
    rank: AcademicRank
    years_active: float
    institution_id: str = ""


@dataclass(frozen=True)
class Authorship:
    """One byline slot. `author_ref` is a researcher id or an external marker."""

    author_ref: str
    position: int
    institution_id: str = ""

    @property
    def is_external(self) -> bool:
        return self.author_ref.startswith(EXTERNAL_PREFIX)


# Byline refs with this prefix denote authors outside the evaluated roster.
EXTERNAL_PREFIX = "ext:"


class Convention(str, enum.Enum):
    ALPHABETICAL = "alphabetical"
    POSITIONAL = "positional"


@dataclass(frozen=True)
class Publication:
    id: str
    year: int
    subject_categories: frozenset[str]
    citations: int
    byline: tuple[Authorship, ...]
    convention: Convention = Convention.ALPHABETICAL

    @property
    def n_authors(self) -> int:
        return len(self.byline)

    def position_of(self, researcher_id: str) -> int | None:
        for a in self.byline:
            if a.author_ref == researcher_id:
                return a.position
        return None


# (year, subject category) -> mean citations of cited publications.
CitationBaseline = dict[tuple[int, str], float]


class ScoreKind(str, enum.Enum):
    RAW_FSS = "raw_fss"
    FSS_STAR = "fss_star"
    STANDARDIZED = "standardized"


@dataclass(frozen=True)
class ScoreSet:
    """Scores of one field. `factor` names the scaling kind when standardized."""

    field_id: str
    ids: tuple[str, ...]
    scores: tuple[float, ...]
    kind: ScoreKind = ScoreKind.FSS_STAR
    factor: str | None = None

    def __post_init__(self):
        if len(self.ids) != len(self.scores):
            raise ValueError("ids and scores differ in length")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError(f"field {self.field_id}: duplicate researcher ids")
        if any(not s >= 0 for s in self.scores):
            raise ValueError(f"field {self.field_id}: scores must be nonnegative")

    @classmethod
    def from_pairs(cls, field_id: str, pairs: Iterable[tuple[str, float]], **kw) -> "ScoreSet":
        pairs = list(pairs)
        return cls(field_id, tuple(p[0] for p in pairs), tuple(float(p[1]) for p in pairs), **kw)

    def __len__(self) -> int:
        return len(self.scores)

    @property
    def n_zero(self) -> int:
        return sum(1 for s in self.scores if s == 0)


@dataclass
class ValidationReport:
    dangling_refs: list[tuple[str, str]] = field(default_factory=list)
    duplicate_ids: list[str] = field(default_factory=list)
    invalid_years: list[str] = field(default_factory=list)
    empty_bylines: list[str] = field(default_factory=list)
    bad_positions: list[str] = field(default_factory=list)
    repeated_authors: list[tuple[str, str]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return any(vars(self).values())

    def lines(self) -> list[str]:
        out = [f"publication {p}: unknown author {a}" for p, a in self.dangling_refs]
        out += [f"duplicate id {i}" for i in self.duplicate_ids]
        out += [f"researcher {r}: years_active must be positive" for r in self.invalid_years]
        out += [f"publication {p}: empty byline" for p in self.empty_bylines]
        out += [f"publication {p}: byline positions are not 1..n" for p in self.bad_positions]
        out += [f"publication {p}: author {a} appears more than once" for p, a in self.repeated_authors]
        return out


def validate_roster(researchers: Iterable[Researcher], publications: Iterable[Publication]) -> ValidationReport:
    """Collect consistency problems; an empty (falsy) report means the data is usable."""
    report = ValidationReport()
    seen: set[str] = set()
    for r in researchers:
        if r.id in seen:
            report.duplicate_ids.append(r.id)
        seen.add(r.id)
        if not r.years_active > 0:
            report.invalid_years.append(r.id)

    pub_ids: set[str] = set()
    for p in publications:
        if p.id in pub_ids:
            report.duplicate_ids.append(p.id)
        pub_ids.add(p.id)
        if not p.byline:
            report.empty_bylines.append(p.id)
            continue
        if sorted(a.position for a in p.byline) != list(range(1, len(p.byline) + 1)):
            report.bad_positions.append(p.id)
        refs = [a.author_ref for a in p.byline]
        for ref in dict.fromkeys(r for r in refs if refs.count(r) > 1):
            report.repeated_authors.append((p.id, ref))
        for a in p.byline:
            if not a.is_external and a.author_ref not in seen:
                report.dangling_refs.append((p.id, a.author_ref))
    return report
