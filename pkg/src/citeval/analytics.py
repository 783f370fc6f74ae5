"""Comparative statistics between the plain and valued citation scores.

Everything here is a pure function of score maps: per-group least-squares
agreement, coefficient-of-variation comparisons, percentile top sets and the
shifts between them, per-group top-share dispersion, and the cap-parameter
sensitivity sweep. Reports are assembled in sorted group order so output is
deterministic regardless of how the inputs were produced.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .baselines import compute_group_baselines
from .corpus import CitationCorpus, GroupKey
from .errors import DegenerateDataError, ValidationError
from .indicators import IndicatorScores, ModelConfig, compute_all


@dataclass(frozen=True)
class RegressionResult:
    """Ordinary least squares of one score on another within a group."""

    n_points: int
    r_squared: float
    slope: float
    intercept: float
    key: GroupKey | None = None


@dataclass(frozen=True)
class DispersionStats:
    """Coefficient-of-variation comparison for one group; ties go to ``c``."""

    key: GroupKey
    cv_of_c: float
    cv_of_cv: float
    winner: str


@dataclass
class TopSetReport:
    """Top sets of both indicators at one percentile, and the shifts between them.

    ``per_group_share_*`` maps each group to the fraction of its scored
    members inside the top set; ``group_sizes`` holds the denominators so
    share statistics can be size-thresholded later.
    """

    percentile: float
    set_c: set[str]
    set_cv: set[str]
    shift_rate_c_to_cv: float
    shift_rate_cv_to_c: float
    per_group_share_c: dict[GroupKey, float]
    per_group_share_cv: dict[GroupKey, float]
    group_sizes: dict[GroupKey, int]


@dataclass(frozen=True)
class ShareDispersion:
    """Population statistics over per-group top-set shares."""

    n_groups: int
    mean: float
    min: float
    max: float
    stdev: float


@dataclass
class SensitivityEntry:
    """Summaries for one cap value. ``cv_scores`` is kept in memory for

    exact comparisons but never serialized."""

    alpha: float
    cv_mean: float
    cv_min: float
    cv_max: float
    cv_stdev: float
    r2_by_group: dict[GroupKey, float]
    cv_winner_share: float | None
    top_set_size: int
    shift_from_alpha1: float
    shift_to_alpha1: float
    cv_scores: dict[str, float] = field(repr=False, default_factory=dict)


@dataclass
class SensitivityReport:
    alphas: list[float]
    percentile: float
    per_alpha: dict[float, SensitivityEntry]


def linear_r2(
    xs: Sequence[float], ys: Sequence[float], key: GroupKey | None = None
) -> RegressionResult | None:
    """Least squares of ys on xs; r_squared = 1 - SS_res/SS_tot.

    Returns ``None`` (undefined, excluded from summaries) for fewer than 3
    points or zero variance in either variable.
    """
    n = len(xs)
    if n != len(ys):
        raise ValidationError(f"length mismatch: {n} xs vs {len(ys)} ys")
    if n < 3:
        return None
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    ss_xx = math.fsum((x - mean_x) ** 2 for x in xs)
    ss_yy = math.fsum((y - mean_y) ** 2 for y in ys)
    if ss_xx == 0.0 or ss_yy == 0.0:
        return None
    ss_xy = math.fsum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = ss_xy / ss_xx
    intercept = mean_y - slope * mean_x
    ss_res = math.fsum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_yy))
    return RegressionResult(n, r_squared, slope, intercept, key)


def coefficient_of_variation(xs: Sequence[float]) -> float | None:
    """Population standard deviation over the mean; ``None`` when the mean is zero."""
    if not xs:
        raise ValidationError("coefficient of variation of an empty vector")
    mean = math.fsum(xs) / len(xs)
    if mean == 0.0:
        return None
    return statistics.pstdev(xs) / mean


def group_score_pairs(
    scores: Mapping[str, IndicatorScores]
) -> dict[GroupKey, list[tuple[float, float]]]:
    """Group-level (c, cv) pairs, ordered by publication id within each group."""
    pairs: dict[GroupKey, list[tuple[float, float]]] = {}
    for pid in sorted(scores):
        for key, g in scores[pid].per_group.items():
            pairs.setdefault(key, []).append((g.c, g.cv))
    return dict(sorted(pairs.items()))


def group_pairs_from_rows(
    by_group: Mapping[GroupKey, Mapping[str, Mapping[str, float]]]
) -> dict[GroupKey, list[tuple[float, float]]]:
    """Same pairing as :func:`group_score_pairs`, from a re-read score file."""
    pairs: dict[GroupKey, list[tuple[float, float]]] = {}
    for key in sorted(by_group):
        rows = by_group[key]
        pairs[key] = [(rows[pid]["c"], rows[pid]["cv"]) for pid in sorted(rows)]
    return pairs


def regressions_by_group(
    group_pairs: Mapping[GroupKey, Sequence[tuple[float, float]]]
) -> dict[GroupKey, RegressionResult]:
    """Per-group regressions of the valued score on the plain one.

    Groups where the regression is undefined are dropped.
    """
    out: dict[GroupKey, RegressionResult] = {}
    for key in sorted(group_pairs):
        pairs = group_pairs[key]
        result = linear_r2([p[0] for p in pairs], [p[1] for p in pairs], key)
        if result is not None:
            out[key] = result
    return out


def dispersion_by_group(
    group_pairs: Mapping[GroupKey, Sequence[tuple[float, float]]]
) -> dict[GroupKey, DispersionStats]:
    """Per-group coefficient-of-variation comparison; undefined groups dropped."""
    out: dict[GroupKey, DispersionStats] = {}
    for key in sorted(group_pairs):
        pairs = group_pairs[key]
        cv_of_c = coefficient_of_variation([p[0] for p in pairs])
        cv_of_cv = coefficient_of_variation([p[1] for p in pairs])
        if cv_of_c is None or cv_of_cv is None:
            continue
        winner = "cv" if cv_of_cv > cv_of_c else "c"
        out[key] = DispersionStats(key, cv_of_c, cv_of_cv, winner)
    return out


def cv_winner_share(
    group_pairs: Mapping[GroupKey, Sequence[tuple[float, float]]], min_group_size: int = 30
) -> float:
    """Fraction of size-qualified groups where the valued score varies more.

    Strict inequality: a tie counts for the plain score.
    """
    if min_group_size < 1:
        raise ValidationError(f"min_group_size must be >= 1, got {min_group_size}")
    qualifying = {
        key: pairs for key, pairs in group_pairs.items() if len(pairs) >= min_group_size
    }
    stats = dispersion_by_group(qualifying)
    if not stats:
        raise DegenerateDataError(
            f"no groups meet size threshold {min_group_size}"
        )
    wins = sum(1 for s in stats.values() if s.winner == "cv")
    return wins / len(stats)


def top_set(scores: Mapping[str, float], percentile: float) -> set[str]:
    """Ids scoring strictly above the nearest-rank percentile threshold.

    The threshold is the ceil(percentile/100 * n)-th smallest score, so ties
    at the threshold never inflate the set.
    """
    if not scores:
        raise ValidationError("top_set of an empty score map")
    if not 0.0 < percentile < 100.0:
        raise ValidationError(f"percentile must lie in (0, 100), got {percentile}")
    ordered = sorted(scores.values())
    rank = math.ceil(percentile * len(ordered) / 100.0)
    threshold = ordered[rank - 1]
    return {pid for pid, value in scores.items() if value > threshold}


def _shift_rate(src: set[str], dst: set[str]) -> float:
    return len(src - dst) / len(src) if src else 0.0


def shift_report(
    scores_c: Mapping[str, float],
    scores_cv: Mapping[str, float],
    percentiles: Sequence[float],
    group_members: Mapping[GroupKey, Sequence[str]],
) -> list[TopSetReport]:
    """Top sets and shift rates at each percentile, with per-group shares.

    Both shift rates are computed independently; they coincide only when the
    two sets happen to have equal size.
    """
    if set(scores_c) != set(scores_cv):
        raise ValidationError("score maps cover different publication sets")
    reports = []
    for percentile in percentiles:
        set_c = top_set(scores_c, percentile)
        set_cv = top_set(scores_cv, percentile)
        share_c: dict[GroupKey, float] = {}
        share_cv: dict[GroupKey, float] = {}
        sizes: dict[GroupKey, int] = {}
        for key in sorted(group_members):
            members = group_members[key]
            if not members:
                continue
            sizes[key] = len(members)
            share_c[key] = sum(1 for m in members if m in set_c) / len(members)
            share_cv[key] = sum(1 for m in members if m in set_cv) / len(members)
        reports.append(
            TopSetReport(
                percentile=percentile,
                set_c=set_c,
                set_cv=set_cv,
                shift_rate_c_to_cv=_shift_rate(set_c, set_cv),
                shift_rate_cv_to_c=_shift_rate(set_cv, set_c),
                per_group_share_c=share_c,
                per_group_share_cv=share_cv,
                group_sizes=sizes,
            )
        )
    return reports


def top_share_dispersion(
    report: TopSetReport, by: str = "c", min_group_size: int = 30
) -> ShareDispersion:
    """Mean, min, max and population stdev of per-group shares for one indicator."""
    if by not in ("c", "cv"):
        raise ValidationError(f"indicator selector must be 'c' or 'cv', got {by!r}")
    shares_map = report.per_group_share_c if by == "c" else report.per_group_share_cv
    shares = [
        shares_map[key]
        for key in sorted(shares_map)
        if report.group_sizes[key] >= min_group_size
    ]
    if not shares:
        raise DegenerateDataError(f"no groups meet size threshold {min_group_size}")
    return ShareDispersion(
        n_groups=len(shares),
        mean=math.fsum(shares) / len(shares),
        min=min(shares),
        max=max(shares),
        stdev=statistics.pstdev(shares),
    )


def top_share_dispersion_by_year(
    report: TopSetReport, by: str = "c", min_group_size: int = 30
) -> dict[int, ShareDispersion]:
    """Share statistics computed separately per publication year."""
    years = sorted({key.year for key in report.per_group_share_c})
    out: dict[int, ShareDispersion] = {}
    for year in years:
        shares_map = report.per_group_share_c if by == "c" else report.per_group_share_cv
        shares = [
            shares_map[key]
            for key in sorted(shares_map)
            if key.year == year and report.group_sizes[key] >= min_group_size
        ]
        if shares:
            out[year] = ShareDispersion(
                n_groups=len(shares),
                mean=math.fsum(shares) / len(shares),
                min=min(shares),
                max=max(shares),
                stdev=statistics.pstdev(shares),
            )
    return out


def alpha_sweep(
    corpus: CitationCorpus,
    base_config: ModelConfig,
    alphas: Sequence[float],
    percentile: float = 90.0,
    min_group_size: int = 30,
    threads: int = 1,
) -> SensitivityReport:
    """Recompute scores and summaries per cap value, anchored at alpha = 1.

    Each sweep point reruns the full two-pass pipeline (baselines included,
    since the valued-score group means move with alpha) and records the
    regression, dispersion-winner and top-set comparisons against the
    alpha = 1 run. The alpha = 1 entry is the base run itself.
    """
    if base_config.model != "exponential":
        raise ValidationError("sensitivity sweep applies to the exponential model only")
    if not alphas:
        raise ValidationError("sweep requires at least one alpha")
    for alpha in alphas:
        if alpha <= 0:
            raise ValidationError(f"alpha must be positive, got {alpha}")

    def run(alpha: float) -> tuple[dict[str, IndicatorScores], dict[str, float]]:
        config = ModelConfig(
            model="exponential",
            beta=base_config.beta,
            target_weight=base_config.target_weight,
            alpha=alpha,
            population=base_config.population,
        )
        baselines = compute_group_baselines(corpus, config.population)
        scores = compute_all(corpus, baselines, config, threads=threads)
        return scores, {pid: s.cv for pid, s in scores.items()}

    base_scores, base_cv = run(1.0)
    base_top = top_set(base_cv, percentile)

    per_alpha: dict[float, SensitivityEntry] = {}
    for alpha in alphas:
        scores, cv_map = (base_scores, base_cv) if alpha == 1.0 else run(alpha)
        pairs = group_score_pairs(scores)
        try:
            winner_share = cv_winner_share(pairs, min_group_size)
        except DegenerateDataError:
            winner_share = None
        top = top_set(cv_map, percentile)
        values = [cv_map[pid] for pid in sorted(cv_map)]
        per_alpha[alpha] = SensitivityEntry(
            alpha=alpha,
            cv_mean=math.fsum(values) / len(values),
            cv_min=min(values),
            cv_max=max(values),
            cv_stdev=statistics.pstdev(values),
            r2_by_group={k: r.r_squared for k, r in regressions_by_group(pairs).items()},
            cv_winner_share=winner_share,
            top_set_size=len(top),
            shift_from_alpha1=_shift_rate(base_top, top),
            shift_to_alpha1=_shift_rate(top, base_top),
            cv_scores=cv_map,
        )
    return SensitivityReport(list(alphas), percentile, per_alpha)


def _sig6(x: float) -> str:
    return f"{x:.6g}"


def write_r2_report(results: Mapping[GroupKey, RegressionResult], path: Path | str) -> None:
    lines = ["year,subject_category,n_points,r_squared,slope,intercept"]
    for key in sorted(results):
        r = results[key]
        lines.append(
            f"{key.year},{key.subject_category},{r.n_points},"
            f"{_sig6(r.r_squared)},{_sig6(r.slope)},{_sig6(r.intercept)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_dispersion_report(stats: Mapping[GroupKey, DispersionStats], path: Path | str) -> None:
    lines = ["year,subject_category,cv_c,cv_cv,winner"]
    for key in sorted(stats):
        s = stats[key]
        lines.append(
            f"{key.year},{key.subject_category},{_sig6(s.cv_of_c)},{_sig6(s.cv_of_cv)},{s.winner}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_topk_report(reports: Sequence[TopSetReport], path: Path | str) -> None:
    lines = ["percentile,shift_c_to_cv,shift_cv_to_c,set_size_c,set_size_cv"]
    for r in sorted(reports, key=lambda r: r.percentile):
        lines.append(
            f"{_sig6(r.percentile)},{_sig6(r.shift_rate_c_to_cv)},"
            f"{_sig6(r.shift_rate_cv_to_c)},{len(r.set_c)},{len(r.set_cv)}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_top_share_report(
    report: TopSetReport, path: Path | str, min_group_size: int = 30
) -> None:
    lines = ["indicator,year,mean,min,max,stdev"]
    for indicator in ("c", "cv"):
        by_year = top_share_dispersion_by_year(report, indicator, min_group_size)
        for year in sorted(by_year):
            d = by_year[year]
            lines.append(
                f"{indicator},{year},{_sig6(d.mean)},{_sig6(d.min)},{_sig6(d.max)},{_sig6(d.stdev)}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_sensitivity_json(report: SensitivityReport, path: Path | str) -> None:
    """Serialize the sweep summaries (score vectors are deliberately omitted)."""

    def round6(x: float | None) -> float | None:
        return None if x is None else float(f"{x:.6g}")

    doc = {
        "percentile": report.percentile,
        "alphas": [round6(a) for a in report.alphas],
        "per_alpha": {
            _sig6(alpha): {
                "cv_mean": round6(entry.cv_mean),
                "cv_min": round6(entry.cv_min),
                "cv_max": round6(entry.cv_max),
                "cv_stdev": round6(entry.cv_stdev),
                "cv_winner_share": round6(entry.cv_winner_share),
                "top_set_size": entry.top_set_size,
                "shift_from_alpha1": round6(entry.shift_from_alpha1),
                "shift_to_alpha1": round6(entry.shift_to_alpha1),
                "r2_by_group": {
                    f"{k.year}:{k.subject_category}": round6(v)
                    for k, v in entry.r2_by_group.items()
                },
            }
            for alpha, entry in report.per_alpha.items()
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
