"""Parsing, validation, assembly and snapshot round-trips."""

from __future__ import annotations

import datetime
import io

import pytest

from citeval.corpus import (
    CitationEdge,
    GroupKey,
    PublicationRecord,
    build_corpus,
    corpus_to_snapshot,
    load_snapshot,
    parse_citations,
    parse_publications,
    snapshot_to_corpus,
    write_snapshot,
)
from citeval.errors import ValidationError

from conftest import small_corpus


def _pubs(text: str):
    return parse_publications(io.StringIO(text))


def _edges(text: str):
    return parse_citations(io.StringIO(text))


def test_parse_publications_basic_fields():
    recs = _pubs(
        "id,year,subject_categories,doc_type,date\n"
        "p1,2005,Chemistry; Physics,article,2005-03-14\n"
        "p2,2006,Biology,,\n"
    )
    assert recs[0].id == "p1"
    assert recs[0].subject_categories == ("Chemistry", "Physics")
    assert recs[0].date == datetime.date(2005, 3, 14)
    assert recs[1].doc_type is None
    assert recs[1].date is None


def test_parse_publications_duplicate_id_names_it():
    with pytest.raises(ValidationError, match="duplicate publication id p1"):
        _pubs("id,year,subject_categories\np1,2005,A\np1,2006,B\n")


def test_parse_publications_reports_row_numbers():
    with pytest.raises(ValidationError, match="row 3"):
        _pubs("id,year,subject_categories\np1,2005,A\np2,noyear,B\n")


def test_parse_publications_requires_subject_category():
    with pytest.raises(ValidationError, match="publication p1 has no subject category"):
        _pubs("id,year,subject_categories\np1,2005, ; \n")


def test_parse_publications_rejects_missing_columns():
    with pytest.raises(ValidationError, match="missing columns"):
        _pubs("id,year\np1,2005\n")


def test_parse_citations_dedupes_and_counts():
    edges, dupes = _edges("citing_id,cited_id\na,b\na,b\nb,c\n")
    assert edges == [CitationEdge("a", "b"), CitationEdge("b", "c")]
    assert dupes == 1


def test_parse_citations_rejects_self_loop_with_row():
    with pytest.raises(ValidationError, match="self-citation edge rejected at row 2"):
        _edges("citing_id,cited_id\nx,x\n")


def test_parse_citations_rejects_bad_header():
    with pytest.raises(ValidationError, match="citing_id,cited_id"):
        _edges("from,to\na,b\n")


def test_publication_record_validation():
    with pytest.raises(ValidationError):
        PublicationRecord("", 2005, ("A",))
    with pytest.raises(ValidationError):
        PublicationRecord("p", 2005, ())


def test_build_corpus_counts_degrees_and_groups(golden_corpus):
    assert len(golden_corpus.publications) == 14
    assert len(golden_corpus.edges) == 16
    assert len(golden_corpus.groups) == 1
    assert golden_corpus.in_degree["alpha"] == 3
    assert golden_corpus.in_degree["E"] == 3
    assert golden_corpus.in_degree["a"] == 0
    assert sorted(golden_corpus.citers["alpha"]) == ["A", "B", "C"]
    assert golden_corpus.groups[GroupKey(2012, "SC1")] == tuple(
        sorted(p.id for p in golden_corpus.publications.values())
    )
    assert len(golden_corpus.cited_ids()) == 8
    assert len(golden_corpus.uncited_ids()) == 6


def test_build_corpus_rejects_unknown_endpoint():
    pubs = [PublicationRecord("p1", 2005, ("A",))]
    with pytest.raises(ValidationError, match="unknown publication ghost"):
        build_corpus(pubs, [CitationEdge("ghost", "p1")])


def test_build_corpus_stub_policy_creates_marked_records():
    pubs = [PublicationRecord("p1", 2005, ("A",))]
    corpus = build_corpus(pubs, [CitationEdge("ghost", "p1")], policy="stub")
    stub = corpus.publications["ghost"]
    assert stub.synthetic
    assert stub.year == 2005
    assert stub.subject_categories == ("A",)


def test_build_corpus_stub_policy_resolves_chains():
    # g2 -> g1 is stubbed on the second pass, once g1 exists from g1 -> p1.
    pubs = [PublicationRecord("p1", 2005, ("A",))]
    edges = [CitationEdge("g2", "g1"), CitationEdge("g1", "p1")]
    corpus = build_corpus(pubs, edges, policy="stub")
    assert set(corpus.publications) == {"p1", "g1", "g2"}


def test_build_corpus_stub_policy_disconnected_pair_fails():
    pubs = [PublicationRecord("p1", 2005, ("A",))]
    with pytest.raises(ValidationError, match="both endpoints unknown"):
        build_corpus(pubs, [CitationEdge("g1", "g2")], policy="stub")


def test_build_corpus_is_input_order_independent():
    pubs = [
        PublicationRecord("p1", 2005, ("A",)),
        PublicationRecord("p2", 2005, ("A",)),
        PublicationRecord("p3", 2005, ("A",)),
    ]
    edges = [CitationEdge("p2", "p1"), CitationEdge("p3", "p1")]
    forward = build_corpus(pubs, edges)
    backward = build_corpus(list(reversed(pubs)), list(reversed(edges)))
    assert forward.edges == backward.edges
    assert forward.groups == backward.groups
    assert forward.in_degree == backward.in_degree


def test_citation_window_drops_late_citing_publications():
    pubs = [
        PublicationRecord("old", 2005, ("A",), date=datetime.date(2005, 1, 1)),
        PublicationRecord("late", 2008, ("A",), date=datetime.date(2008, 6, 1)),
        PublicationRecord("target", 2004, ("A",)),
    ]
    edges = [CitationEdge("old", "target"), CitationEdge("late", "target")]
    corpus = build_corpus(pubs, edges, observed_until=datetime.date(2007, 12, 31))
    assert corpus.in_degree["target"] == 1
    assert corpus.n_window_filtered == 1
    # Publications without a date are never filtered.
    undated = build_corpus(pubs[2:] + pubs[:1], edges[:1], observed_until=datetime.date(2004, 1, 1))
    assert undated.n_window_filtered == 1  # "old" carries a 2005 date


def test_snapshot_round_trip_preserves_everything():
    for seed in (3, 7, 11):
        corpus = small_corpus(seed, multi_sc=True)
        rebuilt = snapshot_to_corpus(corpus_to_snapshot(corpus))
        assert rebuilt == corpus


def test_snapshot_files_are_byte_deterministic(tmp_path):
    corpus = small_corpus(5)
    first = tmp_path / "one.json"
    second = tmp_path / "two.json"
    write_snapshot(corpus, first)
    write_snapshot(corpus, second)
    assert first.read_bytes() == second.read_bytes()
    assert load_snapshot(first) == corpus


def test_snapshot_rejects_unknown_schema_version():
    with pytest.raises(ValidationError, match="schema_version"):
        snapshot_to_corpus({"schema_version": 99, "publications": [], "edges": []})
