"""Group statistics and the conversion-rate convention."""

from __future__ import annotations

import math

import pytest

from citeval.baselines import (
    beta_from_ratio,
    compute_group_baselines,
    derive_beta,
    write_baseline_report,
)
from citeval.corpus import CitationEdge, GroupKey, PublicationRecord, build_corpus
from citeval.errors import DegenerateDataError, ValidationError

KEY = GroupKey(2012, "SC1")


def test_fixture_baselines_population_all(golden_corpus):
    base = compute_group_baselines(golden_corpus, "all")[KEY]
    assert base.n_pubs == 14
    assert base.n_cited == 8
    assert math.isclose(base.c_exp, 16 / 14, rel_tol=1e-12)
    assert base.c_max == 3
    assert base.c_median == 1.0
    assert not base.degenerate
    assert base.cv_star_exp is None


def test_fixture_baselines_population_cited_only(golden_corpus):
    base = compute_group_baselines(golden_corpus, "cited_only")[KEY]
    assert base.n_pubs == 14
    assert base.n_cited == 8
    assert base.c_exp == 2.0
    assert base.c_max == 3
    assert base.c_median == 2.0


def test_unknown_population_mode_rejected(golden_corpus):
    with pytest.raises(ValidationError, match="population mode"):
        compute_group_baselines(golden_corpus, "everything")


def test_group_with_no_citations_is_degenerate():
    pubs = [
        PublicationRecord("p1", 2005, ("A",)),
        PublicationRecord("p2", 2005, ("A",)),
        PublicationRecord("q1", 2005, ("B",)),
        PublicationRecord("q2", 2005, ("B",)),
    ]
    edges = [CitationEdge("p2", "p1")]
    corpus = build_corpus(pubs, edges)
    for population in ("all", "cited_only"):
        baselines = compute_group_baselines(corpus, population)
        assert not baselines[GroupKey(2005, "A")].degenerate
        assert baselines[GroupKey(2005, "B")].degenerate
        assert baselines[GroupKey(2005, "B")].c_max == 0


def test_beta_from_ratio_reference_value():
    beta = beta_from_ratio(0.05, 1.5)
    assert math.isclose(beta, math.log(2) / 19, rel_tol=1e-15)
    assert abs(beta - 0.0364814) < 1e-6


def test_beta_from_ratio_hits_target_weight():
    for ratio in (0.02, 0.05, 0.3, 0.9):
        for target in (1.1, 1.5, 1.9):
            beta = beta_from_ratio(ratio, target)
            c_max = 1000.0
            c_i = ratio * c_max
            worth = 1.0 + math.exp(beta * (1.0 - c_max / c_i))
            assert math.isclose(worth, target, rel_tol=1e-12)


def test_beta_from_ratio_rejects_bad_inputs():
    with pytest.raises(ValidationError, match="target weight"):
        beta_from_ratio(0.05, 2.5)
    with pytest.raises(ValidationError, match="target weight"):
        beta_from_ratio(0.05, 1.0)
    with pytest.raises(ValidationError, match="ratio"):
        beta_from_ratio(0.0)
    with pytest.raises(ValidationError, match="ratio"):
        beta_from_ratio(1.2)
    with pytest.raises(DegenerateDataError, match="degenerate ratio"):
        beta_from_ratio(1.0)


def test_derive_beta_uses_mean_ratio(golden_corpus):
    convention = derive_beta(compute_group_baselines(golden_corpus, "all"))
    assert math.isclose(convention.median_max_ratio, 1 / 3, rel_tol=1e-12)
    assert math.isclose(convention.beta, math.log(2) / 2, rel_tol=1e-12)
    assert convention.target_weight_at_ratio == 1.5


def test_derive_beta_without_citations_fails():
    pubs = [PublicationRecord("p1", 2005, ("A",))]
    corpus = build_corpus(pubs, [])
    baselines = compute_group_baselines(corpus, "all")
    with pytest.raises(DegenerateDataError, match="no cited publications"):
        derive_beta(baselines)


def test_baseline_report_format(golden_corpus, tmp_path):
    baselines = compute_group_baselines(golden_corpus, "all")
    path = tmp_path / "baselines.csv"
    write_baseline_report(baselines, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "year,subject_category,n_pubs,n_cited,c_exp,c_max,c_median,cv_star_exp"
    assert lines[1] == "2012,SC1,14,8,1.142857143,3,1,"
