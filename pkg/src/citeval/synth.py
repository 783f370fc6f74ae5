"""Deterministic synthetic citation corpora for tests and desk-scale runs.

The generator embeds its own pseudo-random stream with fully specified
integer arithmetic (SplitMix64) instead of relying on a runtime's random
module, so a given seed reproduces the identical corpus across runs and can
be re-derived from the documented algorithm alone.

Citation targets are drawn proportionally to per-publication attractiveness
weights sampled from a configurable skewed distribution (lognormal, power
law, or uniform); citing publications are drawn uniformly among those
published no earlier than the cited one (configurable). Self-loops and
duplicate pairs are rejected and redrawn until the edge budget is met.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path

from .corpus import CitationCorpus, CitationEdge, PublicationRecord, build_corpus
from .errors import ValidationError

_MASK64 = (1 << 64) - 1
DEGREE_MODELS = ("lognormal", "powerlaw", "uniform")


class SplitMix64:
    """SplitMix64 pseudo-random stream (Steele, Lea & Flood's mixer).

    Each step adds the 64-bit golden-ratio constant 0x9E3779B97F4A7C15 to the
    state and scrambles a copy with two xor-shift-multiply rounds
    (0xBF58476D1CE4E5B9, 0x94D049BB133111EB) and a final 31-bit xor-shift.
    Unit floats take the top 53 bits; bounded ints reduce modulo the bound;
    normals use Box-Muller over two unit floats (the sine partner discarded).
    """

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Unit float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randint_below(self, n: int) -> int:
        """Integer in [0, n)."""
        if n <= 0:
            raise ValidationError(f"randint_below requires n >= 1, got {n}")
        return self.next_u64() % n

    def normal(self) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        if u1 == 0.0:
            u1 = 2.0**-53
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic corpus.

    ``degree_model`` selects the attractiveness-weight distribution:
    ``lognormal`` uses (mu, sigma), ``powerlaw`` a Pareto tail with the given
    exponent (> 1), ``uniform`` a flat draw on (0, max_weight]. A fraction of
    publications can carry a second subject category.
    """

    seed: int
    n_pubs: int
    year_min: int
    year_max: int
    n_groups: int
    edge_budget: int
    degree_model: str = "lognormal"
    mu: float = 0.0
    sigma: float = 1.0
    exponent: float = 2.5
    max_weight: float = 10.0
    multi_sc_fraction: float = 0.0
    citing_age_rule: bool = True

    def __post_init__(self) -> None:
        if self.n_pubs < 1:
            raise ValidationError(f"n_pubs must be >= 1, got {self.n_pubs}")
        if self.year_min > self.year_max:
            raise ValidationError(f"empty year range [{self.year_min}, {self.year_max}]")
        if self.n_groups < 1:
            raise ValidationError(f"n_groups must be >= 1, got {self.n_groups}")
        if self.edge_budget < 0 or self.edge_budget > self.n_pubs * (self.n_pubs - 1):
            raise ValidationError(
                f"edge_budget {self.edge_budget} infeasible for {self.n_pubs} publications"
            )
        if self.degree_model not in DEGREE_MODELS:
            raise ValidationError(f"unknown degree model {self.degree_model!r}")
        if self.degree_model == "powerlaw" and self.exponent <= 1.0:
            raise ValidationError(f"powerlaw exponent must exceed 1, got {self.exponent}")
        if not 0.0 <= self.multi_sc_fraction <= 1.0:
            raise ValidationError(
                f"multi_sc_fraction must lie in [0, 1], got {self.multi_sc_fraction}"
            )

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthSpec":
        """Build a spec from its JSON document form.

        ``years`` may be given as a two-element [min, max] list; the degree
        model as a plain name or as {"kind": ..., <params>}.
        """
        doc = dict(doc)
        if "years" in doc:
            year_min, year_max = doc.pop("years")
            doc["year_min"], doc["year_max"] = int(year_min), int(year_max)
        model = doc.get("degree_model")
        if isinstance(model, dict):
            params = dict(model)
            doc["degree_model"] = params.pop("kind")
            doc.update(params)
        known = cls.__dataclass_fields__
        unknown = set(doc) - set(known)
        if unknown:
            raise ValidationError(f"unknown synth spec fields: {sorted(unknown)}")
        if "seed" not in doc:
            raise ValidationError("synth spec requires an explicit seed")
        return cls(**doc)

    @classmethod
    def from_json(cls, path: Path | str) -> "SynthSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _draw_weight(spec: SynthSpec, rng: SplitMix64) -> float:
    if spec.degree_model == "lognormal":
        return math.exp(spec.mu + spec.sigma * rng.normal())
    if spec.degree_model == "powerlaw":
        return (1.0 - rng.uniform()) ** (-1.0 / (spec.exponent - 1.0))
    return rng.uniform() * spec.max_weight


def generate(spec: SynthSpec) -> CitationCorpus:
    """Generate the corpus the parameters determine (same seed, same corpus).

    Raises :class:`ValidationError` when the edge budget cannot be met under
    the self-loop, duplicate and age constraints.
    """
    rng = SplitMix64(spec.seed)
    n_years = spec.year_max - spec.year_min + 1
    sc_labels = [f"SC{j + 1:02d}" for j in range(spec.n_groups)]

    records: list[PublicationRecord] = []
    for i in range(spec.n_pubs):
        year = spec.year_min + rng.randint_below(n_years)
        primary = rng.randint_below(spec.n_groups)
        scs = [sc_labels[primary]]
        if spec.multi_sc_fraction > 0.0 and spec.n_groups >= 2:
            if rng.uniform() < spec.multi_sc_fraction:
                other = (primary + 1 + rng.randint_below(spec.n_groups - 1)) % spec.n_groups
                scs.append(sc_labels[other])
        records.append(PublicationRecord(f"P{i + 1:06d}", year, tuple(scs), synthetic=True))

    weights = [_draw_weight(spec, rng) for _ in range(spec.n_pubs)]
    cumulative: list[float] = []
    running = 0.0
    for w in weights:
        running += w
        cumulative.append(running)
    total = running

    by_year = sorted(range(spec.n_pubs), key=lambda i: (records[i].year, i))
    years_sorted = [records[i].year for i in by_year]

    edges: list[CitationEdge] = []
    seen: set[tuple[int, int]] = set()
    attempts = 0
    max_attempts = 50 * spec.edge_budget + 1000
    while len(edges) < spec.edge_budget:
        if attempts >= max_attempts:
            raise ValidationError(
                f"edge budget {spec.edge_budget} infeasible: only {len(edges)} edges "
                f"placed after {attempts} attempts"
            )
        attempts += 1
        cited = bisect_left(cumulative, rng.uniform() * total)
        if cited >= spec.n_pubs:
            cited = spec.n_pubs - 1
        if spec.citing_age_rule:
            start = bisect_left(years_sorted, records[cited].year)
            citing = by_year[start + rng.randint_below(spec.n_pubs - start)]
        else:
            citing = rng.randint_below(spec.n_pubs)
        if citing == cited or (citing, cited) in seen:
            continue
        seen.add((citing, cited))
        edges.append(CitationEdge(records[citing].id, records[cited].id))

    return build_corpus(records, edges, policy="reject")
