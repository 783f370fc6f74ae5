"""Group-level citation statistics and the exponential conversion-rate parameter.

Each (year, subject category) group gets a baseline holding the mean, median
and maximum of its citation distribution. The distribution can be taken over
``all`` member publications or over ``cited_only`` members; the two readings
of "the group" disagree in the presence of uncited publications and the mode
is therefore explicit everywhere.

The conversion-rate parameter of the exponential citation-valuing model is
fixed by one corpus-wide convention: a citing publication whose own citation
count sits at the group-typical median/max ratio must carry a configurable
total weight (1.5 by default, i.e. 50% above an uncited citing publication).
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from pathlib import Path

from .corpus import CitationCorpus, GroupKey
from .errors import DegenerateDataError, ValidationError

POPULATION_MODES = ("all", "cited_only")


@dataclass
class GroupBaseline:
    """Citation-distribution statistics for one (year, subject category) group.

    ``degenerate`` marks groups whose baseline population is empty or entirely
    uncited; downstream computations skip them. ``cv_star_exp`` stays ``None``
    until the indicator pipeline's second pass fills it with the group mean of
    the raw valued score.
    """

    key: GroupKey
    n_pubs: int
    n_cited: int
    c_exp: float
    c_max: int
    c_median: float
    degenerate: bool
    cv_star_exp: float | None = None


@dataclass(frozen=True)
class BetaConvention:
    """The derived conversion rate together with the convention that fixed it."""

    median_max_ratio: float
    target_weight_at_ratio: float
    beta: float


def compute_group_baselines(
    corpus: CitationCorpus, population: str = "cited_only"
) -> dict[GroupKey, GroupBaseline]:
    """Compute per-group citation statistics over the chosen population.

    Groups whose population is empty (or all-uncited under ``all``) are
    emitted with zeroed statistics and flagged degenerate rather than
    dropped, so reports stay complete.
    """
    if population not in POPULATION_MODES:
        raise ValidationError(f"unknown baseline population mode {population!r}")
    baselines: dict[GroupKey, GroupBaseline] = {}
    for key, members in corpus.groups.items():
        degrees = [corpus.in_degree[pid] for pid in members]
        n_cited = sum(1 for d in degrees if d > 0)
        pop = degrees if population == "all" else [d for d in degrees if d > 0]
        if pop:
            c_exp = math.fsum(pop) / len(pop)
            c_max = max(pop)
            c_median = float(statistics.median(pop))
        else:
            c_exp, c_max, c_median = 0.0, 0, 0.0
        baselines[key] = GroupBaseline(
            key=key,
            n_pubs=len(members),
            n_cited=n_cited,
            c_exp=c_exp,
            c_max=c_max,
            c_median=c_median,
            degenerate=(c_exp == 0.0),
        )
    return baselines


def beta_from_ratio(ratio: float, target_weight_at_ratio: float = 1.5) -> float:
    """Solve for the conversion rate given a median/max ratio and target weight.

    The convention: a citing publication with citation count ratio*c_max must
    carry weight ``target_weight_at_ratio``, i.e. its exponential bonus term
    equals ``target_weight_at_ratio - 1``. Solving
    exp(beta * (1 - 1/ratio)) = target - 1 gives the rate.
    """
    if not 1.0 < target_weight_at_ratio < 2.0:
        raise ValidationError(
            f"target weight must lie strictly between 1 and 2, got {target_weight_at_ratio}"
        )
    if not 0.0 < ratio <= 1.0:
        raise ValidationError(f"median/max ratio must lie in (0, 1], got {ratio}")
    if ratio == 1.0:
        raise DegenerateDataError("degenerate ratio r = 1")
    return math.log(1.0 / (target_weight_at_ratio - 1.0)) / (1.0 / ratio - 1.0)


def derive_beta(
    baselines: dict[GroupKey, GroupBaseline], target_weight_at_ratio: float = 1.5
) -> BetaConvention:
    """Derive the exponential conversion rate from group median/max ratios.

    The ratio is the unweighted mean of c_median/c_max over non-degenerate
    groups; groups with c_max = 0 contribute nothing.
    """
    ratios = [
        b.c_median / b.c_max for b in baselines.values() if not b.degenerate and b.c_max > 0
    ]
    if not ratios:
        raise DegenerateDataError("cannot derive beta: no cited publications")
    ratio = math.fsum(ratios) / len(ratios)
    return BetaConvention(
        median_max_ratio=ratio,
        target_weight_at_ratio=target_weight_at_ratio,
        beta=beta_from_ratio(ratio, target_weight_at_ratio),
    )


def write_baseline_report(baselines: dict[GroupKey, GroupBaseline], path: Path | str) -> None:
    """Write the per-group baseline CSV, sorted by (year, subject_category)."""
    lines = ["year,subject_category,n_pubs,n_cited,c_exp,c_max,c_median,cv_star_exp"]
    for key in sorted(baselines):
        b = baselines[key]
        cv_star_exp = "" if b.cv_star_exp is None else f"{b.cv_star_exp:.10g}"
        lines.append(
            f"{key.year},{key.subject_category},{b.n_pubs},{b.n_cited},"
            f"{b.c_exp:.10g},{b.c_max},{b.c_median:.10g},{cv_star_exp}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
