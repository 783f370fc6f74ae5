"""Per-publication impact scores under plain and valued citation counting.

Three scores are computed for every cited publication:

* ``c``: citation count divided by the group mean (the traditional
  field-normalized score).
* ``cv_star``: the raw valued score. Under the exponential model each
  citation contributes 1 plus a bonus in [0, alpha] that grows with how
  close the citing publication's own citation count sits to the maximum of
  its (year, subject category) group; an uncited citing publication
  contributes exactly 1. Under the power model each citation contributes
  ``(1 + c_i/center)**gamma`` with no upper bound.
* ``cv``: ``cv_star`` divided by the group mean of ``cv_star`` over members
  with a nonzero raw score.

Group statistics entering a citation's weight always come from the CITING
publication's groups; the cited publication's groups only enter at
normalization time. A publication belonging to several groups contributes
the mean of its group-specific weight terms when citing, and receives the
mean of its group-specific normalized scores as its publication-level score.

The pipeline runs in two passes over an immutable corpus: pass 1 computes
raw valued scores, pass 2 fills per-group means and normalizes. All
accumulations use exact summation (``math.fsum``) so results do not depend
on iteration or thread order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .baselines import GroupBaseline, POPULATION_MODES, derive_beta
from .corpus import CitationCorpus, GroupKey
from .errors import DegenerateDataError, ValidationError

MODELS = ("exponential", "power")
POWER_CENTERS = ("mean", "median")
SC_JOIN = ";"


@dataclass(frozen=True)
class ModelConfig:
    """Scoring-model parameters.

    ``beta=None`` means the conversion rate is derived from the corpus
    baselines using ``target_weight``; a fixed value bypasses derivation.
    ``alpha`` scales the exponential bonus (a single citation is then worth
    at most ``1 + alpha``). ``gamma`` and ``power_center`` apply to the
    power model only; ``gamma=0`` reduces it to plain counting.
    """

    model: str = "exponential"
    beta: float | None = None
    target_weight: float = 1.5
    alpha: float = 1.0
    gamma: float = 0.0
    population: str = "cited_only"
    power_center: str = "mean"

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}")
        if self.beta is not None and self.beta <= 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")
        if self.alpha <= 0:
            raise ValidationError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValidationError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.population not in POPULATION_MODES:
            raise ValidationError(f"unknown baseline population mode {self.population!r}")
        if self.power_center not in POWER_CENTERS:
            raise ValidationError(f"unknown power-model center {self.power_center!r}")


class GroupScores(NamedTuple):
    c: float
    cv_star: float
    cv: float


@dataclass
class IndicatorScores:
    """Scores for one cited publication.

    ``c``, ``cv_star`` and ``cv`` are the publication-level values (the
    arithmetic mean over the publication's groups); ``per_group`` carries
    the group-specific triples behind them.
    """

    pub_id: str
    n: int
    c: float
    cv_star: float
    cv: float
    per_group: dict[GroupKey, GroupScores]


def f_gain(c_i: int, c_max: int) -> float:
    """Map a citing publication's citation count into (-inf, 0].

    Returns ``1 - c_max/c_i``: zero when the citing publication tops its
    group's distribution, increasingly negative as it falls behind, and
    negative infinity for an uncited citing publication (which forces its
    exponential bonus to exactly zero).
    """
    if c_max < 1:
        raise ValidationError(f"group maximum must be >= 1, got {c_max}")
    if c_i == 0:
        return float("-inf")
    return 1.0 - c_max / c_i


def cv_star_exponential(
    citing_degrees: Sequence[tuple[int, int]], beta: float, alpha: float = 1.0
) -> float:
    """Raw valued score of a publication cited by the given (c_i, c_max) pairs.

    Each pair holds the citing publication's citation count and the maximum
    of its group's distribution. A pair with a degenerate group (c_max = 0)
    contributes a zero bonus, exactly like an uncited citing publication.
    The result lies in [N, (1+alpha)*N] for N citations.
    """
    if not citing_degrees:
        raise DegenerateDataError("cv_star undefined for uncited publication")
    if beta <= 0:
        raise ValidationError(f"beta must be positive, got {beta}")
    if alpha <= 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    bonuses = [
        0.0 if c_max < 1 else math.exp(beta * f_gain(c_i, c_max))
        for c_i, c_max in citing_degrees
    ]
    return len(citing_degrees) + alpha * math.fsum(bonuses)


def cv_star_power(citing_degrees: Sequence[tuple[int, float]], gamma: float) -> float:
    """Raw valued score under the unbounded power model.

    Each (c_i, center) pair contributes ``(1 + c_i/center)**gamma`` where
    ``center`` is the mean or median of the citing publication's group
    distribution; a degenerate pair (center <= 0) counts as a plain
    citation worth 1. ``gamma=0`` makes every citation worth exactly 1.
    """
    if not citing_degrees:
        raise DegenerateDataError("cv_star undefined for uncited publication")
    if not 0.0 <= gamma <= 1.0:
        raise ValidationError(f"gamma must lie in [0, 1], got {gamma}")
    terms = [
        1.0 if center <= 0 else (1.0 + c_i / center) ** gamma
        for c_i, center in citing_degrees
    ]
    return math.fsum(terms)


def compute_c(n: int, c_exp: float) -> float:
    """Traditional field-normalized score: citation count over the group mean."""
    if c_exp <= 0:
        raise DegenerateDataError(f"c undefined for degenerate group (c_exp = {c_exp})")
    return n / c_exp


def resolve_beta(baselines: dict[GroupKey, GroupBaseline], config: ModelConfig) -> float:
    """The conversion rate actually used: the fixed value, or the derived one."""
    if config.beta is not None:
        return config.beta
    return derive_beta(baselines, config.target_weight).beta


def _chunks(items: Sequence, n: int) -> Iterable[Sequence]:
    size = max(1, -(-len(items) // n))
    for start in range(0, len(items), size):
        yield items[start : start + size]


def _citing_weight_terms(
    corpus: CitationCorpus,
    baselines: dict[GroupKey, GroupBaseline],
    config: ModelConfig,
    beta: float | None,
    threads: int = 1,
) -> dict[str, float]:
    """One weight term per distinct citing publication.

    The term is averaged over the citing publication's own groups, so it is
    independent of whatever it cites and can be computed once per citer.
    """

    def term_for(pid: str) -> float:
        c_i = corpus.in_degree[pid]
        group_terms = []
        for key in corpus.publications[pid].group_keys():
            base = baselines[key]
            if config.model == "exponential":
                if base.c_max < 1 or c_i == 0:
                    group_terms.append(0.0)
                else:
                    group_terms.append(math.exp(beta * f_gain(c_i, base.c_max)))
            else:
                center = base.c_exp if config.power_center == "mean" else base.c_median
                group_terms.append(1.0 if center <= 0 else (1.0 + c_i / center) ** config.gamma)
        return math.fsum(group_terms) / len(group_terms)

    citing_ids = sorted(pid for pid, refs in corpus.references.items() if refs)
    if threads <= 1 or len(citing_ids) < 2 * threads:
        return {pid: term_for(pid) for pid in citing_ids}
    chunk_list = list(_chunks(citing_ids, threads * 4))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        out: dict[str, float] = {}
        for chunk, terms in zip(chunk_list, pool.map(lambda c: [term_for(p) for p in c], chunk_list)):
            out.update(zip(chunk, terms))
        return out


def compute_all(
    corpus: CitationCorpus,
    baselines: dict[GroupKey, GroupBaseline],
    config: ModelConfig,
    threads: int = 1,
) -> dict[str, IndicatorScores]:
    """Run the two-pass scoring pipeline over every cited publication.

    Pass 1 computes the raw valued score of each cited publication; pass 2
    fills each baseline's ``cv_star_exp`` (the group mean of raw scores
    over members with a nonzero score, i.e. the cited members) and divides.
    Uncited publications are excluded from the result set. The ``threads``
    setting changes scheduling only, never values.
    """
    beta = resolve_beta(baselines, config) if config.model == "exponential" else None
    terms = _citing_weight_terms(corpus, baselines, config, beta, threads=threads)

    cited = [pid for pid in corpus.publications if corpus.in_degree[pid] > 0]
    cv_star: dict[str, float] = {}
    for pid in cited:
        citer_terms = [terms[c] for c in corpus.citers[pid]]
        if config.model == "exponential":
            cv_star[pid] = len(citer_terms) + config.alpha * math.fsum(citer_terms)
        else:
            cv_star[pid] = math.fsum(citer_terms)

    for key, members in corpus.groups.items():
        member_stars = [cv_star[pid] for pid in members if pid in cv_star]
        baselines[key].cv_star_exp = (
            math.fsum(member_stars) / len(member_stars) if member_stars else None
        )

    scores: dict[str, IndicatorScores] = {}
    for pid in cited:
        n = corpus.in_degree[pid]
        star = cv_star[pid]
        per_group: dict[GroupKey, GroupScores] = {}
        for key in corpus.publications[pid].group_keys():
            base = baselines[key]
            if base.degenerate or not base.cv_star_exp:
                continue
            per_group[key] = GroupScores(
                c=compute_c(n, base.c_exp), cv_star=star, cv=star / base.cv_star_exp
            )
        if not per_group:
            raise DegenerateDataError(f"no non-degenerate group for cited publication {pid}")
        k = len(per_group)
        scores[pid] = IndicatorScores(
            pub_id=pid,
            n=n,
            c=math.fsum(g.c for g in per_group.values()) / k,
            cv_star=star,
            cv=math.fsum(g.cv for g in per_group.values()) / k,
            per_group=per_group,
        )
    return scores


def write_scores(
    corpus: CitationCorpus,
    scores: dict[str, IndicatorScores],
    path: Path | str,
    by_group_path: Path | str | None = None,
) -> None:
    """Write publication-level scores, and optionally the per-group companion file."""
    lines = ["id,year,subject_categories,n,c,cv_star,cv"]
    for pid in sorted(scores):
        s = scores[pid]
        rec = corpus.publications[pid]
        scs = SC_JOIN.join(rec.subject_categories)
        lines.append(f"{pid},{rec.year},{scs},{s.n},{s.c:.10g},{s.cv_star:.10g},{s.cv:.10g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    if by_group_path is None:
        return
    lines = ["id,year,sc,n,c,cv_star,cv"]
    for pid in sorted(scores):
        s = scores[pid]
        for key in sorted(s.per_group):
            g = s.per_group[key]
            lines.append(
                f"{pid},{key.year},{key.subject_category},{s.n},"
                f"{g.c:.10g},{g.cv_star:.10g},{g.cv:.10g}"
            )
    Path(by_group_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_scores(path: Path | str) -> dict[str, dict]:
    """Load a publication-level score file back into plain dicts."""
    out: dict[str, dict] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            row = dict(zip(header, line.rstrip("\n").split(",")))
            out[row["id"]] = {
                "year": int(row["year"]),
                "subject_categories": tuple(row["subject_categories"].split(SC_JOIN)),
                "n": int(row["n"]),
                "c": float(row["c"]),
                "cv_star": float(row["cv_star"]),
                "cv": float(row["cv"]),
            }
    return out


def read_scores_by_group(path: Path | str) -> dict[GroupKey, dict[str, dict]]:
    """Load the per-group score file, keyed by group then publication id."""
    out: dict[GroupKey, dict[str, dict]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            row = dict(zip(header, line.rstrip("\n").split(",")))
            key = GroupKey(int(row["year"]), row["sc"])
            out.setdefault(key, {})[row["id"]] = {
                "n": int(row["n"]),
                "c": float(row["c"]),
                "cv_star": float(row["cv_star"]),
                "cv": float(row["cv"]),
            }
    return out
