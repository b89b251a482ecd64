"""Score a toy department and compare two ways of ranking it.

Three researchers share a handful of papers.  We compute field-normalized,
fractionally counted yearly impact (FSS), divide it by the rank's stipend
coefficient (FSS*), and contrast the result with a plain percentile rank.
"""

from crossfield.indicator import byline_weights, fss, fss_star, percentile_ranks
from crossfield.ingest import compute_baselines
from crossfield.model import AcademicRank, Authorship, Convention, Publication, Researcher

people = [
    Researcher("ada", "BIO/10", "AREA05", AcademicRank.FULL_CONFIRMED, 5.0, "uniA"),
    Researcher("bo", "BIO/10", "AREA05", AcademicRank.ASSISTANT_PROBATIONARY, 5.0, "uniA"),
    Researcher("cy", "BIO/10", "AREA05", AcademicRank.ASSOCIATE_CONFIRMED, 3.0, "uniA"),
]


def paper(pid, citations, authors, convention=Convention.POSITIONAL, year=2005, cats=("BIOCHEM",)):
    byline = tuple(Authorship(ref, i + 1, inst) for i, (ref, inst) in enumerate(authors))
    return Publication(pid, year, frozenset(cats), citations, byline, convention)


pubs = [
    # intramural: first and last author at the same institution
    paper("p1", 30, [("bo", "uniA"), ("cy", "uniA"), ("ada", "uniA")]),
    # extramural six-author byline
    paper("p2", 12, [("ext:k", "uniB"), ("bo", "uniA"), ("ext:l", "uniB"), ("ext:m", "uniB"),
                     ("cy", "uniA"), ("ext:n", "uniC")]),
    paper("p3", 4, [("ada", "uniA"), ("ext:z", "uniD")], cats=("BIOCHEM", "GENETICS")),
    paper("p4", 0, [("cy", "uniA")]),
    paper("p5", 9, [("ext:q", "uniE"), ("ext:r", "uniE")], cats=("GENETICS",)),
]

for p in pubs[:2]:
    print(p.id, "byline shares:", [round(w, 3) for w in byline_weights(p)])

baselines = compute_baselines(pubs)
print("\nmean citations of cited papers per (year, category):", baselines)

print("\nresearcher   FSS     FSS*")
star = {}
for r in people:
    value = fss(r, pubs, baselines)
    star[r.id] = fss_star(value, r.rank)
    print(f"{r.id:<10} {value:6.3f} {star[r.id]:7.3f}")

# Percentile ranks only say who is ahead, not by how much.
print("\npercentile rank by FSS*:", {k: round(v, 1) for k, v in percentile_ranks(star).items()})
