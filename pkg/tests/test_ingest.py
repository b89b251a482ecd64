import io
import random

import pytest

from crossfield.ingest import (
    Dataset,
    DuplicateKeyError,
    ParseError,
    compute_baselines,
    filter_eligible_fields,
    load_baselines,
    load_dataset,
    load_publications,
    load_researchers,
    write_baselines,
)
from crossfield.model import AcademicRank, Convention, stipend_coefficient

R_HEADER = "id,field,uda,rank,years_active,institution\n"
P_HEADER = "id,year,categories,citations,convention,byline\n"


def test_load_researcher_row():
    [r] = load_researchers(io.StringIO(R_HEADER + "r1,MAT/05,AREA01,assistant_probationary,5.0,uniA\n"))
    assert (r.id, r.field_id, r.uda_id, r.institution_id) == ("r1", "MAT/05", "AREA01", "uniA")
    assert r.years_active == 5.0
    assert stipend_coefficient(r.rank) == 1.0


def test_header_only_is_empty():
    assert load_researchers(io.StringIO(R_HEADER)) == []
    assert load_publications(io.StringIO(P_HEADER)) == []


def test_unknown_rank_cites_row():
    src = io.StringIO(R_HEADER + "r1,MAT/05,A,full_confirmed,5,u\nr2,MAT/05,A,wizard,5,u\n")
    with pytest.raises(ParseError) as err:
        load_researchers(src)
    assert err.value.row == 3 and err.value.column == "rank"
    assert "wizard" in str(err.value)


def test_duplicate_researcher():
    src = io.StringIO(R_HEADER + "r1,F,A,full_confirmed,5,u\nr1,F,A,full_confirmed,5,u\n")
    with pytest.raises(DuplicateKeyError):
        load_researchers(src)


def test_bad_years_and_missing_column():
    with pytest.raises(ParseError, match="years_active"):
        load_researchers(io.StringIO(R_HEADER + "r1,F,A,full_confirmed,five,u\n"))
    with pytest.raises(ParseError, match="missing columns"):
        load_researchers(io.StringIO("id,field\nr1,F\n"))


def test_publication_row_parsing():
    text = P_HEADER + "p1,2005,SC1;SC2;SC3,4,positional,r1@uniA;ext:x@uniB;r2@uniA\n"
    [p] = load_publications(io.StringIO(text))
    assert p.subject_categories == {"SC1", "SC2", "SC3"}
    assert p.convention is Convention.POSITIONAL
    assert [(a.author_ref, a.position, a.institution_id) for a in p.byline] == [
        ("r1", 1, "uniA"), ("ext:x", 2, "uniB"), ("r2", 3, "uniA")]
    assert p.byline[1].is_external


@pytest.mark.parametrize("row, column", [
    ("p1,2005,SC1,-1,alphabetical,r1@u\n", "citations"),
    ("p1,2005,SC1,3,alphabetical,\n", "byline"),
    ("p1,2005,,3,alphabetical,r1@u\n", "categories"),
    ("p1,2005,SC1,3,chronological,r1@u\n", "convention"),
])
def test_publication_errors(row, column):
    with pytest.raises(ParseError) as err:
        load_publications(io.StringIO(P_HEADER + row))
    assert err.value.column == column and err.value.row == 2


def test_duplicate_publication():
    text = P_HEADER + "p1,2005,SC1,1,alphabetical,r1@u\np1,2006,SC1,1,alphabetical,r1@u\n"
    with pytest.raises(DuplicateKeyError):
        load_publications(io.StringIO(text))


def test_baseline_excludes_uncited(pub):
    pubs = [pub("a", ["r"], 4, 2004, ["SC1"]), pub("b", ["r"], 2, 2004, ["SC1"]), pub("c", ["r"], 0, 2004, ["SC1"])]
    assert compute_baselines(pubs) == {(2004, "SC1"): 3.0}


def test_baseline_singleton_and_uncited_cell(pub):
    assert compute_baselines([pub("a", ["r"], 7, 2005, ["SC2"])]) == {(2005, "SC2"): 7.0}
    assert compute_baselines([pub("a", ["r"], 0, 2006, ["SC3"]), pub("b", ["r"], 0, 2006, ["SC3"])]) == {}


def test_multi_category_publication_feeds_every_cell(pub):
    b = compute_baselines([pub("a", ["r"], 6, 2004, ["SC1", "SC2"]), pub("b", ["r"], 2, 2004, ["SC1"])])
    assert b == {(2004, "SC1"): 4.0, (2004, "SC2"): 6.0}


def _random_pubs(rng, n):
    from conftest import make_pub
    return [make_pub(f"p{i}", ["r"], rng.choice([0, 0, 1, 2, 5, 13]), rng.choice([2004, 2005]),
                     rng.sample(["A", "B", "C"], rng.randint(1, 3))) for i in range(n)]


def test_baseline_properties():
    rng = random.Random(7)
    for _ in range(50):
        pubs = _random_pubs(rng, rng.randint(1, 15))
        base = compute_baselines(pubs)
        shuffled = pubs[:]
        rng.shuffle(shuffled)
        assert compute_baselines(shuffled) == pytest.approx(base)
        from conftest import make_pub
        extra = make_pub("uncited", ["r"], 0, 2004, ["A", "B"])
        assert compute_baselines(pubs + [extra]) == base
        assert all(v >= 1 for v in base.values())


def test_baselines_round_trip():
    base = {(2004, "SC1"): 3.0, (2005, "SC2"): 7.25, (2004, "SC0"): 1 / 3}
    buf = io.StringIO()
    write_baselines(base, buf)
    assert load_baselines(io.StringIO(buf.getvalue())) == base


def test_dataset_rejects_inconsistent(researcher, pub):
    with pytest.raises(ValueError, match="ghost"):
        Dataset([researcher("r1")], [pub("p1", ["ghost"])], {})


def _field_dataset(researcher, pub, cited, total):
    rs = [researcher(f"r{i}", field="F") for i in range(total)]
    ps = [pub(f"p{i}", [f"r{i}"], citations=1 if i < cited else 0) for i in range(total)]
    return Dataset(rs, ps, compute_baselines(ps))


def test_field_eligibility(researcher, pub):
    assert filter_eligible_fields(_field_dataset(researcher, pub, 6, 10), 0.5) == {"F"}
    assert filter_eligible_fields(_field_dataset(researcher, pub, 4, 10), 0.5) == set()
    assert filter_eligible_fields(_field_dataset(researcher, pub, 0, 10), 0.0) == {"F"}


def test_load_dataset_from_files(tmp_path):
    (tmp_path / "r.csv").write_text(R_HEADER + "r1,F,A,full_confirmed,5,u\n", encoding="utf-8")
    (tmp_path / "p.csv").write_text(P_HEADER + "p1,2004,SC1,4,alphabetical,r1@u\n", encoding="utf-8")
    ds = load_dataset(tmp_path / "r.csv", tmp_path / "p.csv")
    assert ds.baselines == {(2004, "SC1"): 4.0}
    assert all(v.startswith("sha256:") for v in ds.provenance.values())
    assert ds.researchers[0].rank is AcademicRank.FULL_CONFIRMED
