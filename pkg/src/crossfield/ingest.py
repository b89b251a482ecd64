"""Reading roster/publication CSVs, citation baselines and field eligibility.

File layouts (UTF-8, comma separated):

* researchers.csv: ``id,field,uda,rank,years_active,institution``
* publications.csv: ``id,year,categories,citations,convention,byline`` where
  ``categories`` is semicolon-joined and ``byline`` is a semicolon-joined list
  of ``author_ref@institution`` tokens in byline order
* baselines.csv: ``year,category,mean_cited``
"""

from __future__ import annotations

import csv
import hashlib
import io
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from .model import (
    AcademicRank,
    Authorship,
    CitationBaseline,
    Convention,
    Publication,
    Researcher,
    validate_roster,
)

RESEARCHER_COLUMNS = ("id", "field", "uda", "rank", "years_active", "institution")
PUBLICATION_COLUMNS = ("id", "year", "categories", "citations", "convention", "byline")
BASELINE_COLUMNS = ("year", "category", "mean_cited")
SUB_DELIMITER = ";"


class ParseError(ValueError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None, source: str = ""):
        self.row, self.column, self.source = row, column, source
        where = source or "<input>"
        if row is not None:
            where += f":{row}"
        if column:
            where += f" [{column}]"
        super().__init__(f"{where}: {message}")


class DuplicateKeyError(ParseError):
    pass


def _reader(source: IO[str], columns: tuple[str, ...], name: str) -> csv.DictReader:
    reader = csv.DictReader(source)
    header = tuple(h.strip() for h in (reader.fieldnames or ()))
    missing = [c for c in columns if c not in header]
    if missing:
        raise ParseError(f"missing columns {missing}", row=1, source=name)
    return reader


def _name(source) -> str:
    name = getattr(source, "name", "")
    return name if isinstance(name, str) else ""


def load_researchers(source: IO[str]) -> list[Researcher]:
    name = _name(source)
    out: list[Researcher] = []
    seen: set[str] = set()
    # row numbers count the header as line 1
    for lineno, row in enumerate(_reader(source, RESEARCHER_COLUMNS, name), start=2):
        rid = (row["id"] or "").strip()
        if not rid:
            raise ParseError("empty id", lineno, "id", name)
        if rid in seen:
            raise DuplicateKeyError(f"duplicate researcher id {rid!r}", lineno, "id", name)
        seen.add(rid)
        fid = (row["field"] or "").strip()
        if not fid:
            raise ParseError("empty field", lineno, "field", name)
        try:
            rank = AcademicRank.parse(row["rank"] or "")
        except ValueError as exc:
            raise ParseError(str(exc), lineno, "rank", name) from None
        try:
            years = float(row["years_active"])
        except (TypeError, ValueError):
            raise ParseError(f"not a number: {row['years_active']!r}", lineno, "years_active", name) from None
        out.append(Researcher(rid, fid, (row["uda"] or "").strip(), rank, years, (row["institution"] or "").strip()))
    return out


def _parse_byline(text: str, lineno: int, name: str) -> tuple[Authorship, ...]:
    tokens = [t.strip() for t in (text or "").split(SUB_DELIMITER) if t.strip()]
    if not tokens:
        raise ParseError("empty byline", lineno, "byline", name)
    byline = []
    for pos, tok in enumerate(tokens, start=1):
        ref, _, inst = tok.rpartition("@")
        if not _:
            ref, inst = tok, ""
        if not ref:
            raise ParseError(f"bad byline token {tok!r}", lineno, "byline", name)
        byline.append(Authorship(ref, pos, inst))
    return tuple(byline)


def load_publications(source: IO[str]) -> list[Publication]:
    name = _name(source)
    out: list[Publication] = []
    seen: set[str] = set()
    for lineno, row in enumerate(_reader(source, PUBLICATION_COLUMNS, name), start=2):
        pid = (row["id"] or "").strip()
        if not pid:
            raise ParseError("empty id", lineno, "id", name)
        if pid in seen:
            raise DuplicateKeyError(f"duplicate publication id {pid!r}", lineno, "id", name)
        seen.add(pid)
        try:
            year = int(row["year"])
        except (TypeError, ValueError):
            raise ParseError(f"not an integer: {row['year']!r}", lineno, "year", name) from None
        try:
            cites = int(row["citations"])
        except (TypeError, ValueError):
            raise ParseError(f"not an integer: {row['citations']!r}", lineno, "citations", name) from None
        if cites < 0:
            raise ParseError("negative citations", lineno, "citations", name)
        cats = frozenset(c.strip() for c in (row["categories"] or "").split(SUB_DELIMITER) if c.strip())
        if not cats:
            raise ParseError("no subject categories", lineno, "categories", name)
        try:
            conv = Convention((row["convention"] or "").strip())
        except ValueError:
            raise ParseError(f"unknown convention {row['convention']!r}", lineno, "convention", name) from None
        out.append(Publication(pid, year, cats, cites, _parse_byline(row["byline"], lineno, name), conv))
    return out


def load_baselines(source: IO[str]) -> CitationBaseline:
    name = _name(source)
    out: CitationBaseline = {}
    for lineno, row in enumerate(_reader(source, BASELINE_COLUMNS, name), start=2):
        try:
            key = (int(row["year"]), row["category"].strip())
            mean = float(row["mean_cited"])
        except (TypeError, ValueError, AttributeError):
            raise ParseError("malformed baseline row", lineno, source=name) from None
        if not mean > 0:
            raise ParseError("mean_cited must be positive", lineno, "mean_cited", name)
        if key in out:
            raise DuplicateKeyError(f"duplicate baseline cell {key}", lineno, source=name)
        out[key] = mean
    return out


def write_baselines(baselines: CitationBaseline, dest: IO[str]) -> None:
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(BASELINE_COLUMNS)
    for (year, cat), mean in sorted(baselines.items()):
        w.writerow([year, cat, repr(mean)])


def compute_baselines(publications: Iterable[Publication]) -> CitationBaseline:
    """Mean citations of cited publications per (year, subject category).

    A publication listed under several categories counts toward each of them.
    Uncited publications are ignored, so cells without any cited paper are
    absent rather than zero.
    """
    totals: dict[tuple[int, str], list[int]] = defaultdict(lambda: [0, 0])
    for pub in publications:
        if pub.citations < 1:
            continue
        for cat in pub.subject_categories:
            cell = totals[(pub.year, cat)]
            cell[0] += pub.citations
            cell[1] += 1
    return {key: s / n for key, (s, n) in totals.items()}


@dataclass
class Dataset:
    researchers: list[Researcher]
    publications: list[Publication]
    baselines: CitationBaseline
    provenance: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        report = validate_roster(self.researchers, self.publications)
        if report:
            raise ValueError("inconsistent dataset:\n  " + "\n  ".join(report.lines()))

    def publications_of(self) -> dict[str, list[Publication]]:
        """Map researcher id -> publications carrying that id in the byline."""
        out: dict[str, list[Publication]] = {r.id: [] for r in self.researchers}
        for pub in self.publications:
            for a in pub.byline:
                if a.author_ref in out:
                    out[a.author_ref].append(pub)
        return out


def _read_text(path: str | Path) -> tuple[str, str]:
    data = Path(path).read_bytes()
    return data.decode("utf-8"), "sha256:" + hashlib.sha256(data).hexdigest()


def _stream(text: str, path) -> io.StringIO:
    buf = io.StringIO(text, newline="")
    buf.name = str(path)
    return buf


def load_dataset(researchers_path, publications_path, baselines_path=None) -> Dataset:
    """Load and validate a dataset; baselines are derived from the corpus when no file is given."""
    provenance = {}
    text, provenance[str(researchers_path)] = _read_text(researchers_path)
    researchers = load_researchers(_stream(text, researchers_path))
    text, provenance[str(publications_path)] = _read_text(publications_path)
    publications = load_publications(_stream(text, publications_path))
    if baselines_path is not None:
        text, provenance[str(baselines_path)] = _read_text(baselines_path)
        baselines = load_baselines(_stream(text, baselines_path))
    else:
        baselines = compute_baselines(publications)
    return Dataset(researchers, publications, baselines, provenance)


def filter_eligible_fields(dataset: Dataset, min_cited_share: float = 0.5) -> set[str]:
    """Fields where at least `min_cited_share` of members have a cited publication."""
    cited = {a.author_ref for p in dataset.publications if p.citations >= 1 for a in p.byline}
    members: dict[str, list[str]] = defaultdict(list)
    for r in dataset.researchers:
        members[r.field_id].append(r.id)
    return {
        fid for fid, ids in members.items()
        if sum(rid in cited for rid in ids) / len(ids) >= min_cited_share
    }
