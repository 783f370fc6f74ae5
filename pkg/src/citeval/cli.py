"""Command-line pipeline driver.

Subcommands mirror the processing stages::

    citeval synth   --spec spec.json --out-dir runs/demo
    citeval ingest  --publications pubs.csv --citations cites.csv --out-dir runs/demo
    citeval compute --snapshot runs/demo/snapshot.json --out-dir runs/demo
    citeval analyze --snapshot runs/demo/snapshot.json --out-dir runs/demo
    citeval sweep   --snapshot runs/demo/snapshot.json --alphas 1,2,3,5

Options come from flags, an optional TOML/JSON config file (``--config``),
and the ``CITEVAL_OUT`` environment variable for the output directory; flags
win over the file, the file over the environment. Every command appends its
resolved parameters to ``run_manifest.json`` in the output directory. The
manifest deliberately carries no timestamps and no thread count, so reruns
of the same configuration are byte-identical regardless of ``--threads``.

Exit codes: 0 success, 2 validation error, 3 degenerate data, 4 I/O error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import analytics, baselines, corpus, indicators, synth
from .errors import DegenerateDataError, ValidationError

MANIFEST_NAME = "run_manifest.json"
SNAPSHOT_NAME = "snapshot.json"


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved parameters of one command invocation.

    This is what lands in the manifest: one value per knob, none optional
    once resolution has run, so a report can be regenerated from the
    manifest and the input files alone. ``beta`` holds the numeric value
    actually used when ``beta_mode`` is ``fixed``; in ``auto`` mode the
    derived value is echoed separately as ``resolved_beta``.
    """

    command: str
    out_dir: str
    publications: str | None = None
    citations: str | None = None
    snapshot: str | None = None
    scores: str | None = None
    scores_by_group: str | None = None
    synth_spec: str | None = None
    policy: str = "reject"
    observed_until: str | None = None
    model: str = "exponential"
    beta_mode: str = "auto"
    beta: float | None = None
    target_weight: float = 1.5
    alpha: float = 1.0
    gamma: float = 0.0
    power_center: str = "mean"
    population: str = "cited_only"
    percentiles: tuple[float, ...] = (90.0, 95.0, 99.0)
    min_group_size: int = 30
    share_min_size: int = 600
    alphas: tuple[float, ...] = (1.0, 2.0, 3.0, 5.0)
    seed: int | None = None


def _load_config_file(path: str) -> dict:
    suffix = Path(path).suffix.lower()
    if suffix == ".toml":
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    if suffix == ".json":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ValidationError(f"config file {path} must hold a JSON object")
        return doc
    raise ValidationError(f"config file {path} must be .toml or .json")


def _load_manifest_model(path: str) -> dict:
    """Model parameters recorded by a previous compute run, as a config layer."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    section = doc.get("compute", {})
    keys = ("model", "beta_mode", "beta", "target_weight", "alpha", "gamma",
            "power_center", "population")
    return {k: section[k] for k in keys if k in section}


def _float_list(raw) -> tuple[float, ...]:
    if isinstance(raw, str):
        parts = [p for p in raw.split(",") if p.strip()]
    else:
        parts = list(raw)
    try:
        values = tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        raise ValidationError(f"expected a comma-separated number list, got {raw!r}") from None
    if not values:
        raise ValidationError("number list is empty")
    return values


class _Resolver:
    """Layered option lookup: CLI flag, then config file, then default."""

    def __init__(self, args: argparse.Namespace, layers: list[dict]):
        self.args = args
        self.layers = layers

    def get(self, name: str, default=None):
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        for layer in self.layers:
            if layer.get(name) is not None:
                return layer[name]
        return default


def _resolver(args: argparse.Namespace) -> _Resolver:
    layers = []
    if getattr(args, "config", None):
        layers.append(_load_config_file(args.config))
    if getattr(args, "manifest", None):
        layers.append(_load_manifest_model(args.manifest))
    return _Resolver(args, layers)


def _out_dir(res: _Resolver) -> Path:
    out = res.get("out_dir") or os.environ.get("CITEVAL_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(config: RunConfig, out_dir: Path, extra: dict | None = None) -> None:
    manifest_path = out_dir / MANIFEST_NAME
    doc: dict = {}
    if manifest_path.exists():
        with open(manifest_path, encoding="utf-8") as fh:
            doc = json.load(fh)
    section = {k: v for k, v in asdict(config).items() if k != "command" and v is not None}
    if extra:
        section.update(extra)
    doc[config.command] = section
    manifest_path.write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _model_config(res: _Resolver) -> tuple[indicators.ModelConfig, RunConfig]:
    """Shared model/baseline option resolution for compute, analyze and sweep."""
    beta_raw = res.get("beta", "auto")
    if isinstance(beta_raw, str) and beta_raw.lower() == "auto":
        beta_mode, beta = "auto", None
    else:
        try:
            beta = float(beta_raw)
        except (TypeError, ValueError):
            raise ValidationError(f"beta must be a number or 'auto', got {beta_raw!r}") from None
        beta_mode = "fixed"
    model = indicators.ModelConfig(
        model=res.get("model", "exponential"),
        beta=beta,
        target_weight=float(res.get("target_weight", 1.5)),
        alpha=float(res.get("alpha", 1.0)),
        gamma=float(res.get("gamma", 0.0)),
        population=res.get("population", "cited_only"),
        power_center=res.get("power_center", "mean"),
    )
    partial = RunConfig(
        command="",
        out_dir="",
        model=model.model,
        beta_mode=beta_mode,
        beta=beta,
        target_weight=model.target_weight,
        alpha=model.alpha,
        gamma=model.gamma,
        power_center=model.power_center,
        population=model.population,
    )
    return model, partial


def cmd_ingest(args: argparse.Namespace) -> int:
    res = _resolver(args)
    out_dir = _out_dir(res)
    pub_path = res.get("publications")
    cite_path = res.get("citations")
    if not pub_path or not cite_path:
        raise ValidationError("ingest requires --publications and --citations")
    if res.get("synth_spec"):
        raise ValidationError("config mixes corpus input paths with a synthetic spec")
    policy = res.get("policy", "reject")
    observed_raw = res.get("observed_until")
    observed = None
    if observed_raw:
        try:
            observed = datetime.date.fromisoformat(str(observed_raw))
        except ValueError as exc:
            raise ValidationError(f"bad --observed-until value: {exc}") from None

    with open(pub_path, newline="", encoding="utf-8") as fh:
        pubs = corpus.parse_publications(fh)
    with open(cite_path, newline="", encoding="utf-8") as fh:
        edges, duplicates = corpus.parse_citations(fh)
    built = corpus.build_corpus(pubs, edges, policy=policy, observed_until=observed)

    snapshot_path = out_dir / SNAPSHOT_NAME
    corpus.write_snapshot(built, snapshot_path)
    config = RunConfig(
        command="ingest",
        out_dir=str(out_dir),
        publications=str(pub_path),
        citations=str(cite_path),
        snapshot=str(snapshot_path),
        policy=policy,
        observed_until=str(observed_raw) if observed_raw else None,
    )
    _write_manifest(config, out_dir)
    print(
        f"ingest: {len(built.publications)} publications, {len(built.edges)} edges, "
        f"{len(built.groups)} groups ({duplicates} duplicate rows dropped, "
        f"{built.n_window_filtered} edges outside window)"
    )
    print(f"snapshot written to {snapshot_path}")
    return 0


def cmd_compute(args: argparse.Namespace) -> int:
    res = _resolver(args)
    out_dir = _out_dir(res)
    snapshot_path = res.get("snapshot") or str(out_dir / SNAPSHOT_NAME)
    built = corpus.load_snapshot(snapshot_path)
    if not built.cited_ids():
        raise DegenerateDataError("corpus has no cited publications")

    model, partial = _model_config(res)
    threads = int(res.get("threads", 1))
    group_baselines = baselines.compute_group_baselines(built, model.population)
    resolved_beta = (
        indicators.resolve_beta(group_baselines, model)
        if model.model == "exponential"
        else None
    )
    scores = indicators.compute_all(built, group_baselines, model, threads=threads)

    scores_path = out_dir / "scores.csv"
    by_group_path = out_dir / "scores_by_group.csv"
    baselines_path = out_dir / "baselines.csv"
    indicators.write_scores(built, scores, scores_path, by_group_path)
    baselines.write_baseline_report(group_baselines, baselines_path)

    config = RunConfig(
        command="compute",
        out_dir=str(out_dir),
        snapshot=str(snapshot_path),
        scores=str(scores_path),
        scores_by_group=str(by_group_path),
        model=partial.model,
        beta_mode=partial.beta_mode,
        beta=partial.beta,
        target_weight=partial.target_weight,
        alpha=partial.alpha,
        gamma=partial.gamma,
        power_center=partial.power_center,
        population=partial.population,
    )
    extra = {"resolved_beta": resolved_beta} if resolved_beta is not None else {}
    _write_manifest(config, out_dir, extra)
    beta_note = f", beta={resolved_beta:.10g}" if resolved_beta is not None else ""
    print(
        f"compute: scored {len(scores)} cited publications "
        f"(model={model.model}, alpha={model.alpha:g}, gamma={model.gamma:g}, "
        f"population={model.population}{beta_note})"
    )
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    res = _resolver(args)
    out_dir = _out_dir(res)
    snapshot_path = res.get("snapshot") or str(out_dir / SNAPSHOT_NAME)
    scores_path = res.get("scores") or str(out_dir / "scores.csv")
    by_group_path = res.get("scores_by_group") or str(out_dir / "scores_by_group.csv")

    built = corpus.load_snapshot(snapshot_path)
    scores = indicators.read_scores(scores_path)
    by_group = indicators.read_scores_by_group(by_group_path)
    percentiles = _float_list(res.get("percentiles", (90.0, 95.0, 99.0)))
    min_group_size = int(res.get("min_group_size", 30))
    share_min_size = int(res.get("share_min_size", 600))
    alphas = _float_list(res.get("alphas", (1.0, 2.0, 3.0, 5.0)))
    threads = int(res.get("threads", 1))

    pairs = analytics.group_pairs_from_rows(by_group)
    qualifying = {k: v for k, v in pairs.items() if len(v) >= min_group_size}
    if not qualifying:
        raise DegenerateDataError(
            f"no groups meet size threshold {min_group_size} "
            f"(largest group has {max(map(len, pairs.values()), default=0)} scored publications)"
        )

    analytics.write_r2_report(
        analytics.regressions_by_group(qualifying), out_dir / "report_r2.csv"
    )
    analytics.write_dispersion_report(
        analytics.dispersion_by_group(qualifying), out_dir / "report_dispersion.csv"
    )

    c_map = {pid: row["c"] for pid, row in scores.items()}
    cv_map = {pid: row["cv"] for pid, row in scores.items()}
    shift_reports = analytics.shift_report(c_map, cv_map, percentiles, built.groups)
    analytics.write_topk_report(shift_reports, out_dir / "report_topk.csv")
    analytics.write_top_share_report(
        shift_reports[0], out_dir / "report_top_share.csv", share_min_size
    )

    model, partial = _model_config(res)
    sweep_config = indicators.ModelConfig(
        model="exponential",
        beta=model.beta,
        target_weight=model.target_weight,
        population=model.population,
    )
    sweep = analytics.alpha_sweep(
        built, sweep_config, alphas, percentiles[0], min_group_size, threads=threads
    )
    analytics.write_sensitivity_json(sweep, out_dir / "report_sensitivity.json")

    config = RunConfig(
        command="analyze",
        out_dir=str(out_dir),
        snapshot=str(snapshot_path),
        scores=str(scores_path),
        scores_by_group=str(by_group_path),
        model=partial.model,
        beta_mode=partial.beta_mode,
        beta=partial.beta,
        target_weight=partial.target_weight,
        alpha=partial.alpha,
        gamma=partial.gamma,
        power_center=partial.power_center,
        population=partial.population,
        percentiles=percentiles,
        min_group_size=min_group_size,
        share_min_size=share_min_size,
        alphas=alphas,
    )
    _write_manifest(config, out_dir)
    print(
        f"analyze: {len(qualifying)} groups over threshold {min_group_size}; "
        f"wrote report_r2.csv, report_dispersion.csv, report_topk.csv, "
        f"report_top_share.csv, report_sensitivity.json to {out_dir}"
    )
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    res = _resolver(args)
    out_dir = _out_dir(res)
    snapshot_path = res.get("snapshot") or str(out_dir / SNAPSHOT_NAME)
    built = corpus.load_snapshot(snapshot_path)
    percentiles = _float_list(res.get("percentiles", (90.0, 95.0, 99.0)))
    alphas = _float_list(res.get("alphas", (1.0, 2.0, 3.0, 5.0)))
    min_group_size = int(res.get("min_group_size", 30))
    threads = int(res.get("threads", 1))

    model, partial = _model_config(res)
    sweep_config = indicators.ModelConfig(
        model="exponential",
        beta=model.beta,
        target_weight=model.target_weight,
        population=model.population,
    )
    sweep = analytics.alpha_sweep(
        built, sweep_config, alphas, percentiles[0], min_group_size, threads=threads
    )
    report_path = out_dir / "report_sensitivity.json"
    analytics.write_sensitivity_json(sweep, report_path)

    config = RunConfig(
        command="sweep",
        out_dir=str(out_dir),
        snapshot=str(snapshot_path),
        model="exponential",
        beta_mode=partial.beta_mode,
        beta=partial.beta,
        target_weight=partial.target_weight,
        population=partial.population,
        percentiles=percentiles,
        min_group_size=min_group_size,
        alphas=alphas,
    )
    _write_manifest(config, out_dir)
    print(f"sweep: {len(alphas)} cap values at percentile {percentiles[0]:g}; wrote {report_path}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    res = _resolver(args)
    out_dir = _out_dir(res)
    if res.get("publications") or res.get("citations"):
        raise ValidationError("config mixes corpus input paths with a synthetic spec")

    spec_doc: dict = {}
    spec_path = res.get("synth_spec")
    if spec_path:
        with open(spec_path, encoding="utf-8") as fh:
            try:
                spec_doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"synth spec {spec_path} is not valid JSON: {exc}") from None
    for name in ("seed", "n_pubs", "year_min", "year_max", "n_groups", "edge_budget",
                 "degree_model", "mu", "sigma", "exponent", "max_weight",
                 "multi_sc_fraction"):
        value = res.get(name)
        if value is not None:
            spec_doc[name] = value
    if "seed" not in spec_doc:
        raise ValidationError("synth requires an explicit --seed (or a seed in the --spec file)")

    spec = synth.SynthSpec.from_dict(spec_doc)
    built = synth.generate(spec)
    snapshot_path = out_dir / SNAPSHOT_NAME
    corpus.write_snapshot(built, snapshot_path)

    config = RunConfig(
        command="synth",
        out_dir=str(out_dir),
        snapshot=str(snapshot_path),
        synth_spec=str(spec_path) if spec_path else None,
        seed=spec.seed,
    )
    _write_manifest(config, out_dir, extra={"spec": asdict(spec)})
    print(
        f"synth: seed {spec.seed} -> {len(built.publications)} publications, "
        f"{len(built.edges)} edges, {len(built.groups)} groups"
    )
    print(f"snapshot written to {snapshot_path}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML or JSON config file; flags override it")
    parser.add_argument("--out-dir", dest="out_dir",
                        help="output directory (default: $CITEVAL_OUT or .)")


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=indicators.MODELS)
    parser.add_argument("--beta", help="fixed conversion rate, or 'auto' to derive it")
    parser.add_argument("--target-weight", dest="target_weight", type=float,
                        help="weight assigned at the median/max anchor point")
    parser.add_argument("--alpha", type=float, help="bonus cap multiplier")
    parser.add_argument("--gamma", type=float, help="power-model exponent in [0, 1]")
    parser.add_argument("--power-center", dest="power_center", choices=indicators.POWER_CENTERS)
    parser.add_argument("--population", choices=baselines.POPULATION_MODES,
                        help="publications counted in group baselines")
    parser.add_argument("--threads", type=int, help="worker threads (never changes values)")
    parser.add_argument("--manifest", help="reuse model parameters from a prior run manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citeval",
        description="Citation-impact scoring with value-weighted citations.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest", help="validate raw CSV inputs and write a corpus snapshot")
    _add_common(p)
    p.add_argument("--publications", help="publications CSV path")
    p.add_argument("--citations", help="citation edge CSV path")
    p.add_argument("--policy", choices=("reject", "stub"),
                   help="treatment of edges naming unknown publications")
    p.add_argument("--observed-until", dest="observed_until",
                   help="citation window end date (YYYY-MM-DD)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("compute", help="score every cited publication")
    _add_common(p)
    p.add_argument("--snapshot", help="corpus snapshot path (default: OUT/snapshot.json)")
    _add_model_flags(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("analyze", help="write comparison reports from score files")
    _add_common(p)
    p.add_argument("--snapshot", help="corpus snapshot path (default: OUT/snapshot.json)")
    p.add_argument("--scores", help="publication-level score CSV (default: OUT/scores.csv)")
    p.add_argument("--scores-by-group", dest="scores_by_group",
                   help="per-group score CSV (default: OUT/scores_by_group.csv)")
    p.add_argument("--percentiles", help="comma-separated percentile list (default 90,95,99)")
    p.add_argument("--min-group-size", dest="min_group_size", type=int,
                   help="smallest group admitted to regression/dispersion reports")
    p.add_argument("--share-min-size", dest="share_min_size", type=int,
                   help="smallest group admitted to the top-share report")
    p.add_argument("--alphas", help="comma-separated cap values for the sensitivity sweep")
    _add_model_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="recompute scores across cap values only")
    _add_common(p)
    p.add_argument("--snapshot", help="corpus snapshot path (default: OUT/snapshot.json)")
    p.add_argument("--alphas", help="comma-separated cap values (default 1,2,3,5)")
    p.add_argument("--percentiles", help="top-set percentile list; the first is used")
    p.add_argument("--min-group-size", dest="min_group_size", type=int)
    _add_model_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate a deterministic synthetic corpus snapshot")
    _add_common(p)
    p.add_argument("--spec", dest="synth_spec", help="synthetic corpus spec (JSON)")
    p.add_argument("--seed", type=int, help="PRNG seed (required unless the --spec file has one)")
    p.add_argument("--n-pubs", dest="n_pubs", type=int)
    p.add_argument("--year-min", dest="year_min", type=int)
    p.add_argument("--year-max", dest="year_max", type=int)
    p.add_argument("--n-groups", dest="n_groups", type=int)
    p.add_argument("--edge-budget", dest="edge_budget", type=int)
    p.add_argument("--degree-model", dest="degree_model", choices=synth.DEGREE_MODELS)
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--exponent", type=float)
    p.add_argument("--max-weight", dest="max_weight", type=float)
    p.add_argument("--multi-sc-fraction", dest="multi_sc_fraction", type=float)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
