"""Generator determinism, spec validation and stream correctness."""

from __future__ import annotations

import json
import math
import statistics

import pytest

from citeval.baselines import compute_group_baselines, derive_beta
from citeval.corpus import corpus_to_snapshot
from citeval.errors import ValidationError
from citeval.synth import SplitMix64, SynthSpec, generate


def test_splitmix64_reference_vector():
    # Canonical outputs of the published algorithm for seed 0.
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]
    rng = SplitMix64(1234567)
    assert rng.next_u64() == 6457827717110365317
    assert rng.next_u64() == 3203168211198807973


def test_splitmix64_uniform_and_bounds():
    rng = SplitMix64(99)
    values = [rng.uniform() for _ in range(2000)]
    assert all(0.0 <= v < 1.0 for v in values)
    assert 0.4 < statistics.fmean(values) < 0.6
    draws = [rng.randint_below(7) for _ in range(2000)]
    assert set(draws) == set(range(7))
    with pytest.raises(ValidationError):
        rng.randint_below(0)


def test_splitmix64_normal_moments():
    rng = SplitMix64(7)
    values = [rng.normal() for _ in range(20000)]
    assert all(math.isfinite(v) for v in values)
    assert abs(statistics.fmean(values)) < 0.03
    assert 0.95 < statistics.pstdev(values) < 1.05


def test_spec_validation():
    ok = dict(seed=1, n_pubs=10, year_min=2004, year_max=2005, n_groups=2, edge_budget=5)
    SynthSpec(**ok)
    with pytest.raises(ValidationError):
        SynthSpec(**{**ok, "n_pubs": 0})
    with pytest.raises(ValidationError):
        SynthSpec(**{**ok, "year_min": 2006})
    with pytest.raises(ValidationError):
        SynthSpec(**{**ok, "n_groups": 0})
    with pytest.raises(ValidationError):
        SynthSpec(**{**ok, "edge_budget": 91})  # above n*(n-1)
    with pytest.raises(ValidationError):
        SynthSpec(**{**ok, "degree_model": "zipf"})
    with pytest.raises(ValidationError):
        SynthSpec(**{**ok, "degree_model": "powerlaw", "exponent": 1.0})
    with pytest.raises(ValidationError):
        SynthSpec(**{**ok, "multi_sc_fraction": 1.5})


def test_spec_from_dict_json_forms():
    doc = {
        "seed": 11,
        "n_pubs": 20,
        "years": [2004, 2006],
        "n_groups": 3,
        "edge_budget": 30,
        "degree_model": {"kind": "powerlaw", "exponent": 2.2},
    }
    spec = SynthSpec.from_dict(doc)
    assert (spec.year_min, spec.year_max) == (2004, 2006)
    assert spec.degree_model == "powerlaw"
    assert spec.exponent == 2.2
    with pytest.raises(ValidationError, match="unknown synth spec fields"):
        SynthSpec.from_dict({**doc, "color": "red"})
    with pytest.raises(ValidationError, match="explicit seed"):
        SynthSpec.from_dict({k: v for k, v in doc.items() if k != "seed"})


def test_generate_meets_edge_budget_exactly():
    spec = SynthSpec(seed=42, n_pubs=100, year_min=2004, year_max=2008,
                     n_groups=3, edge_budget=250)
    corpus = generate(spec)
    assert len(corpus.publications) == 100
    assert len(corpus.edges) == 250
    assert len(set(corpus.edges)) == 250
    assert all(e.citing_id != e.cited_id for e in corpus.edges)


def test_generate_is_deterministic():
    spec = SynthSpec(seed=42, n_pubs=100, year_min=2004, year_max=2008,
                     n_groups=3, edge_budget=250)
    one = json.dumps(corpus_to_snapshot(generate(spec)), sort_keys=True)
    two = json.dumps(corpus_to_snapshot(generate(spec)), sort_keys=True)
    assert one == two
    other = json.dumps(corpus_to_snapshot(generate(
        SynthSpec(seed=43, n_pubs=100, year_min=2004, year_max=2008,
                  n_groups=3, edge_budget=250))), sort_keys=True)
    assert one != other


def test_generate_zero_budget():
    spec = SynthSpec(seed=5, n_pubs=25, year_min=2004, year_max=2004,
                     n_groups=2, edge_budget=0)
    corpus = generate(spec)
    assert all(d == 0 for d in corpus.in_degree.values())
    assert corpus.cited_ids() == []


def test_generate_respects_citing_age_rule():
    spec = SynthSpec(seed=9, n_pubs=200, year_min=2004, year_max=2010,
                     n_groups=2, edge_budget=500)
    corpus = generate(spec)
    for edge in corpus.edges:
        citing = corpus.publications[edge.citing_id]
        cited = corpus.publications[edge.cited_id]
        assert citing.year >= cited.year


def test_generate_age_rule_off_allows_backward_edges():
    spec = SynthSpec(seed=9, n_pubs=200, year_min=2004, year_max=2010,
                     n_groups=2, edge_budget=500, citing_age_rule=False)
    corpus = generate(spec)
    backward = [
        e for e in corpus.edges
        if corpus.publications[e.citing_id].year < corpus.publications[e.cited_id].year
    ]
    assert backward  # with seven cohorts some draws must point backward


def test_generate_multi_sc_fraction():
    spec = SynthSpec(seed=4, n_pubs=300, year_min=2004, year_max=2005,
                     n_groups=4, edge_budget=100, multi_sc_fraction=0.5)
    corpus = generate(spec)
    multi = [p for p in corpus.publications.values() if len(p.subject_categories) == 2]
    assert 80 < len(multi) < 220
    for p in multi:
        assert p.subject_categories[0] != p.subject_categories[1]


def test_generate_infeasible_budget_hits_attempt_cap():
    # Two publications in different years: only the newer->older edge exists,
    # so a budget of 2 can never be met under the age rule.
    spec = SynthSpec(seed=3, n_pubs=2, year_min=2004, year_max=2020,
                     n_groups=1, edge_budget=2)
    years = {p.year for p in generate(
        SynthSpec(seed=3, n_pubs=2, year_min=2004, year_max=2020,
                  n_groups=1, edge_budget=0)).publications.values()}
    assert len(years) == 2  # seed chosen to give distinct years
    with pytest.raises(ValidationError, match="infeasible"):
        generate(spec)


def test_degree_models_produce_valid_weights():
    for model in ("lognormal", "powerlaw", "uniform"):
        spec = SynthSpec(seed=8, n_pubs=150, year_min=2004, year_max=2006,
                         n_groups=2, edge_budget=300, degree_model=model)
        corpus = generate(spec)
        assert len(corpus.edges) == 300


def test_lognormal_corpus_supports_beta_derivation():
    spec = SynthSpec(seed=12, n_pubs=10000, year_min=2005, year_max=2005,
                     n_groups=4, edge_budget=30000)
    corpus = generate(spec)
    baselines = compute_group_baselines(corpus, "cited_only")
    for base in baselines.values():
        assert 0.0 < base.c_median / base.c_max < 0.5
    convention = derive_beta(baselines)
    assert convention.beta > 0.0
