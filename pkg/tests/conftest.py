"""Shared fixtures: the 14-node worked-example network and corpus builders."""

from __future__ import annotations

from pathlib import Path

import pytest

from citeval.corpus import (
    CitationCorpus,
    build_corpus,
    parse_citations,
    parse_publications,
)
from citeval.synth import SynthSpec, generate

DATA_DIR = Path(__file__).parent / "data"
PUBLICATIONS_CSV = DATA_DIR / "publications.csv"
CITATIONS_CSV = DATA_DIR / "citations.csv"


def load_fixture_corpus() -> CitationCorpus:
    with open(PUBLICATIONS_CSV, newline="", encoding="utf-8") as fh:
        pubs = parse_publications(fh)
    with open(CITATIONS_CSV, newline="", encoding="utf-8") as fh:
        edges, _ = parse_citations(fh)
    return build_corpus(pubs, edges)


@pytest.fixture(scope="session")
def golden_corpus() -> CitationCorpus:
    """The 14-publication, 16-edge example network (one year, one SC)."""
    return load_fixture_corpus()


def small_corpus(seed: int, max_pubs: int = 50, multi_sc: bool = False) -> CitationCorpus:
    """A quick synthetic corpus whose shape varies with the seed."""
    n_pubs = 10 + seed % (max_pubs - 9)
    budget = min(3 * n_pubs, n_pubs * (n_pubs - 1))
    spec = SynthSpec(
        seed=seed,
        n_pubs=n_pubs,
        year_min=2004,
        year_max=2004 + seed % 3,
        n_groups=1 + seed % 3,
        edge_budget=budget,
        degree_model=("lognormal", "powerlaw", "uniform")[seed % 3],
        multi_sc_fraction=0.3 if multi_sc else 0.0,
    )
    return generate(spec)


def corpus_as_rows(corpus: CitationCorpus):
    """(records, edges) in the plain-tuple form the naive oracle consumes."""
    records = [
        (p.id, p.year, p.subject_categories) for p in corpus.publications.values()
    ]
    edges = [(e.citing_id, e.cited_id) for e in corpus.edges]
    return records, edges
