"""Command-line pipeline: mine, score, eval, sweep.

Configuration precedence is explicit: command-line flags override values from
a JSON config file (--config, or the LINETROPY_CONFIG environment variable),
which override built-in defaults. The resolved, result-affecting settings are
echoed into every output's header; execution-only knobs (worker count, output
paths) are excluded so reruns produce byte-identical files.
"""

from __future__ import annotations

import json
import os
import sys
from datetime import date
from pathlib import Path, PurePosixPath

import click
import numpy as np
from click.core import ParameterSource

from . import evaluate, mining, normalize, scoring
from .lexer import BUILTIN_PROFILES, LanguageProfile, load_profile, tokenize_file
from .ngram import CacheConfig

CONFIG_ENV_VAR = "LINETROPY_CONFIG"

# not part of provenance: these never change the computed results
_HEADER_EXCLUDED = {"jobs", "out", "curves_dir", "write_bug_weights", "config"}


def _resolve_config(ctx: click.Context, command: str) -> dict:
    """Apply config-file values under explicit flags; return the effective map."""
    path = ctx.params.get("config") or os.environ.get(CONFIG_ENV_VAR)
    file_cfg: dict = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise click.ClickException(f"cannot read config file {path}: {exc}")
    effective: dict = {"command": command}
    for key, value in ctx.params.items():
        if key == "config":
            continue
        if ctx.get_parameter_source(key) == ParameterSource.DEFAULT and key in file_cfg:
            value = file_cfg[key]
        ctx.params[key] = value
        if key not in _HEADER_EXCLUDED:
            effective[key] = value
    return effective


def _header(effective: dict) -> dict:
    return {k: v for k, v in sorted(effective.items()) if v is not None}


@click.group()
def main() -> None:
    """Rank source lines by statistical surprise for defect localization."""


_config_option = click.option(
    "--config", type=click.Path(), default=None,
    help=f"JSON config file; defaults to ${CONFIG_ENV_VAR} when set.",
)


# --- mine -----------------------------------------------------------------


@main.command()
@click.option("--snapshots", required=True, type=click.Path(exists=True, file_okay=False),
              help="Directory of <ISO-date>/ snapshot trees.")
@click.option("--commits", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSON-lines commit manifest.")
@click.option("--out", required=True, type=click.Path(), help="Output linesets JSONL.")
@click.option("--max-delete", default=mining.DEFAULT_MAX_DELETE, show_default=True,
              help="Retain per-file changes deleting at most this many lines.")
@_config_option
@click.pass_context
def mine(ctx: click.Context, **_: object) -> None:
    """Label old-boundary lines (unchanged/buggy/fixed) from history."""
    cfg = _resolve_config(ctx, "mine")
    p = ctx.params

    root = Path(p["snapshots"])
    boundaries = sorted(d for d in root.iterdir() if d.is_dir())
    if not boundaries:
        raise click.ClickException(f"no snapshot directories under {root}")
    try:
        dates = [date.fromisoformat(d.name) for d in boundaries]
    except ValueError as exc:
        raise click.ClickException(f"snapshot directory is not an ISO date: {exc}")

    try:
        commits = mining.read_commit_manifest(p["commits"])
    except ValueError as exc:
        raise click.ClickException(str(exc))

    records: list[dict] = []
    for (old_dir, old_date), (_, new_date) in zip(
        zip(boundaries, dates), zip(boundaries[1:], dates[1:])
    ):
        in_between = [
            c for c in commits if old_date < c.timestamp.date() <= new_date
        ]
        old_files = {
            str(PurePosixPath(f.relative_to(old_dir))): f.read_text(encoding="utf-8")
            for f in sorted(old_dir.rglob("*"))
            if f.is_file()
        }
        sets = mining.build_line_sets(old_files, in_between, p["max_delete"])
        records.extend(mining.lineset_records(old_date.isoformat(), sets))

    mining.write_linesets(records, p["out"], header=_header(cfg))
    click.echo(f"wrote {len(records)} line labels to {p['out']}")


# --- score ----------------------------------------------------------------


def _get_profile(name_or_path: str) -> LanguageProfile:
    if name_or_path in BUILTIN_PROFILES:
        return BUILTIN_PROFILES[name_or_path]
    if not Path(name_or_path).exists():
        raise click.ClickException(f"unknown language profile: {name_or_path}")
    return load_profile(name_or_path)


def _tokenize_tree(root: Path, include: str, profile: LanguageProfile):
    files = []
    for f in sorted(root.glob(include)):
        if not f.is_file():
            continue
        rel = str(PurePosixPath(f.relative_to(root)))
        files.append(tokenize_file(f.read_text(encoding="utf-8"), profile, path=rel))
    return files


_model_options = [
    click.option("--profile", default="java", show_default=True,
                 help="Built-in profile name (java, c) or path to a profile JSON."),
    click.option("--include", default="**/*.java", show_default=True,
                 help="Glob selecting the files of the snapshot tree to score."),
    click.option("--max-order", default=3, show_default=True,
                 help="Order of the global n-gram model."),
    click.option("--max-cache-order", default=10, show_default=True),
    click.option("--min-backoff-order", default=4, show_default=True),
    click.option("--backoff-weight", default=1.0, show_default=True),
    click.option("--gamma", default=1.0, show_default=True,
                 help="Concentration of the cache interpolation."),
    click.option("--bins", default=10, show_default=True,
                 help="Leave-one-bin-out bin count."),
    click.option("--no-epilog", is_flag=True, default=False,
                 help="Score with the preceding context only."),
]


def _add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


def _cache_config(p: dict) -> CacheConfig:
    return CacheConfig(
        max_cache_order=p["max_cache_order"],
        min_backoff_order=p["min_backoff_order"],
        backoff_weight=p["backoff_weight"],
        gamma=p["gamma"],
    )


@main.command()
@click.option("--snapshot", required=True, type=click.Path(exists=True, file_okay=False),
              help="Directory tree of source files to score.")
@click.option("--out", required=True, type=click.Path(), help="Output scores JSONL.")
@_add_options(_model_options)
@click.option("--bug-weights", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Serialized per-type bug-weight table.")
@click.option("--history-scores", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Scores of prior snapshots, for training bug weights.")
@click.option("--history-linesets", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Line labels of prior snapshots, for training bug weights.")
@click.option("--write-bug-weights", type=click.Path(), default=None,
              help="Also write the trained bug-weight table here.")
@click.option("--jobs", default=1, show_default=True, help="Worker thread cap.")
@_config_option
@click.pass_context
def score(ctx: click.Context, **_: object) -> None:
    """Compute per-line entropy, z, and weighted scores for a snapshot."""
    cfg = _resolve_config(ctx, "score")
    p = ctx.params

    profile = _get_profile(p["profile"])
    files = _tokenize_tree(Path(p["snapshot"]), p["include"], profile)
    if not files:
        raise click.ClickException(
            f"no files matched {p['include']} under {p['snapshot']}"
        )

    weights = None
    if p["bug_weights"]:
        weights = normalize.load_bug_weights(p["bug_weights"])
    elif p["history_scores"] and p["history_linesets"]:
        history = scoring.read_scores(p["history_scores"])
        labels = mining.read_linesets(p["history_linesets"])
        buggy = {(r["path"], r["line"]) for r in labels if r["label"] == "buggy"}
        snapshots = sorted({r["snapshot"] for r in labels})
        trained_on = f"{snapshots[0]}..{snapshots[-1]}" if snapshots else ""
        try:
            weights = normalize.train_bug_weights(history, buggy, trained_on)
        except ValueError as exc:
            raise click.ClickException(str(exc))
        if p["write_bug_weights"]:
            normalize.save_bug_weights(weights, p["write_bug_weights"])
    elif p["history_scores"] or p["history_linesets"]:
        raise click.ClickException(
            "--history-scores and --history-linesets must be given together"
        )

    bins = scoring.partition_bins([f.path for f in files], p["bins"])
    scores = scoring.score_snapshot(
        files,
        _cache_config(p),
        bins,
        max_order=p["max_order"],
        bidirectional=not p["no_epilog"],
        jobs=p["jobs"],
    )
    scores = normalize.apply_normalization(scores, weights)
    scoring.write_scores(scores, p["out"], header=_header(cfg))
    click.echo(f"scored {len(scores)} lines from {len(files)} files into {p['out']}")


# --- eval -----------------------------------------------------------------


def _load_bugs(
    linesets_path: str,
    snapshot_tag: str | None,
    population: set[tuple[str, int]],
    max_bug_lines: int,
) -> tuple[dict[str, frozenset], int]:
    """Bugs grouped by id, clipped to the scored population and size-filtered.

    A bug is dropped when its buggy-line count is >= max_bug_lines, or when
    none of its lines is in the population (e.g. comment-only lines, which
    are never scored). Returns the bug map and the dropped-bug count.
    """
    records = mining.read_linesets(linesets_path)
    grouped: dict[str, set] = {}
    for r in records:
        if r["label"] != "buggy":
            continue
        if snapshot_tag is not None and r["snapshot"] != snapshot_tag:
            continue
        grouped.setdefault(r["bug_id"], set()).add((r["path"], r["line"]))
    bugs: dict[str, frozenset] = {}
    dropped = 0
    for bug_id, lines in grouped.items():
        if len(lines) >= max_bug_lines:
            dropped += 1
            continue
        clipped = frozenset(lines & population)
        if not clipped:
            dropped += 1
            continue
        bugs[bug_id] = clipped
    return bugs, dropped


_RANK_KEYS = {
    "entropy": lambda s: s.entropy,
    "z": lambda s: s.z,
    "weighted": lambda s: s.weighted,
}


@main.command(name="eval")
@click.option("--scores", "scores_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--linesets", "linesets_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(), help="Summary JSON.")
@click.option("--snapshot-tag", default=None,
              help="Restrict bug labels to this snapshot tag.")
@click.option("--warnings", "warnings_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Warning JSONL for SBF comparison.")
@click.option("--seed", type=int, default=None,
              help="Master seed for the SBF simulation (required with --warnings).")
@click.option("--sbf-runs", default=100, show_default=True,
              help="Monte-Carlo repetitions of the SBF simulation.")
@click.option("--budget", default=0.05, show_default=True,
              help="Inspection budget as a fraction of lines.")
@click.option("--credit", type=click.Choice(["full", "partial"]), default="partial",
              show_default=True)
@click.option("--max-bug-lines", default=15, show_default=True,
              help="Drop bugs with at least this many buggy lines.")
@click.option("--rank-by", type=click.Choice(sorted(_RANK_KEYS)), default="weighted",
              show_default=True)
@click.option("--curves-dir", type=click.Path(file_okay=False), default=None,
              help="Also write lift-curve point files here.")
@click.option("--jobs", default=1, show_default=True, help="Worker thread cap.")
@_config_option
@click.pass_context
def eval_cmd(ctx: click.Context, **_: object) -> None:
    """Evaluate orderings of the scored lines against mined bug labels."""
    cfg = _resolve_config(ctx, "eval")
    p = ctx.params

    scores = scoring.read_scores(p["scores_path"])
    if not scores:
        raise click.ClickException(f"no scores in {p['scores_path']}")
    population = {(s.path, s.line) for s in scores}
    credit = evaluate.CreditMode(p["credit"])
    budget = p["budget"]

    bugs, dropped = _load_bugs(
        p["linesets_path"], p["snapshot_tag"], population, p["max_bug_lines"]
    )

    rank_key = _RANK_KEYS[p["rank_by"]]
    nbf_ordering = [
        (s.path, s.line)
        for s in sorted(scores, key=lambda s: (-rank_key(s), s.path, s.line))
    ]

    summary: dict = {
        "config": _header(cfg),
        "population_lines": len(nbf_ordering),
        "bug_count": len(bugs),
        "dropped_bugs": dropped,
    }
    curves: dict[str, evaluate.EvalCurve] = {}

    if not bugs:
        summary["warning"] = "no bugs after filtering; all scores are zero"
        summary["aucec"] = {"nbf": 0.0}
    else:
        nbf_curve = evaluate.lift_curve(nbf_ordering, bugs, credit)
        curves["nbf"] = nbf_curve
        summary["aucec"] = {"nbf": evaluate.aucec(nbf_curve, budget)}

    if p["warnings_path"]:
        if p["seed"] is None:
            raise click.ClickException("--seed is required with --warnings")
        raw_warnings = evaluate.read_warnings(p["warnings_path"])
        values = evaluate.expand_warnings(raw_warnings)
        clipped = [
            evaluate.Warning("any", path, ln, ln, pri)
            for (path, ln), pri in sorted(values.items())
            if (path, ln) in population
        ]
        warned_count = len(clipped)
        summary["warned_lines"] = warned_count

        if bugs and warned_count:
            mix_ordering = evaluate.mix_order(clipped, scores, rank_key=rank_key)
            mix_curve = evaluate.lift_curve(mix_ordering, bugs, credit)
            curves["mix"] = mix_curve

            seeds = [int(s) for s in np.random.SeedSequence(p["seed"]).generate_state(p["sbf_runs"])]

            def run(seed: int) -> tuple[float, float]:
                ordering = evaluate.simulate_sbf_order(clipped, nbf_ordering, seed)
                curve = evaluate.lift_curve(ordering, bugs, credit)
                l_budget = min(1.0, warned_count / len(nbf_ordering))
                return evaluate.aucec(curve, budget), evaluate.aucec(curve, l_budget)

            if p["jobs"] > 1:
                from concurrent.futures import ThreadPoolExecutor

                with ThreadPoolExecutor(max_workers=p["jobs"]) as pool:
                    results = list(pool.map(run, seeds))
            else:
                results = [run(s) for s in seeds]
            sbf_at_budget = [r[0] for r in results]
            sbf_at_lbudget = [r[1] for r in results]

            l_budget = min(1.0, warned_count / len(nbf_ordering))
            summary["aucec"]["sbf_mean"] = float(np.mean(sbf_at_budget))
            summary["aucec"]["sbf_sd"] = float(np.std(sbf_at_budget))
            summary["aucec"]["mix"] = evaluate.aucec(mix_curve, budget)
            summary["aucecl"] = {
                "budget": l_budget,
                "nbf": evaluate.aucec(curves["nbf"], l_budget),
                "sbf_mean": float(np.mean(sbf_at_lbudget)),
                "mix": evaluate.aucec(mix_curve, l_budget),
            }

    if p["curves_dir"]:
        out_dir = Path(p["curves_dir"])
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, curve in curves.items():
            evaluate.write_curve(curve, out_dir / f"curve_{name}.tsv", header=_header(cfg))

    with open(p["out"], "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"wrote evaluation summary to {p['out']}")


# --- sweep ------------------------------------------------------------------


@main.command()
@click.option("--snapshot", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--linesets", "linesets_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Labels providing the buggy lines.")
@click.option("--out", required=True, type=click.Path(), help="Output TSV table.")
@click.option("--snapshot-tag", default=None,
              help="Restrict bug labels to this snapshot tag.")
@click.option("--orders", default="2,4,6", show_default=True,
              help="Comma-separated minimum backoff orders to try.")
@click.option("--weights", default="0.5,1.0,2.0", show_default=True,
              help="Comma-separated backoff weights to try.")
@_add_options(_model_options)
@_config_option
@click.pass_context
def sweep(ctx: click.Context, **_: object) -> None:
    """Grid of cache parameters vs. the buggy/non-buggy entropy gap."""
    cfg = _resolve_config(ctx, "sweep")
    p = ctx.params

    profile = _get_profile(p["profile"])
    files = _tokenize_tree(Path(p["snapshot"]), p["include"], profile)
    if not files:
        raise click.ClickException(f"no files matched {p['include']} under {p['snapshot']}")

    records = mining.read_linesets(p["linesets_path"])
    buggy = {
        (r["path"], r["line"])
        for r in records
        if r["label"] == "buggy"
        and (p["snapshot_tag"] is None or r["snapshot"] == p["snapshot_tag"])
    }
    if not buggy:
        raise click.ClickException("no buggy lines in the provided labels")

    try:
        orders = [int(x) for x in p["orders"].split(",") if x]
        weights = [float(x) for x in p["weights"].split(",") if x]
    except ValueError as exc:
        raise click.ClickException(f"bad sweep grid: {exc}")

    try:
        rows = scoring.sweep_cache_params(
            files,
            buggy,
            orders,
            weights,
            _cache_config(p),
            max_order=p["max_order"],
            bins=scoring.partition_bins([f.path for f in files], p["bins"]),
            bidirectional=not p["no_epilog"],
        )
    except ValueError as exc:
        raise click.ClickException(str(exc))

    with open(p["out"], "w", encoding="utf-8") as fh:
        fh.write("# config: " + json.dumps(_header(cfg), sort_keys=True) + "\n")
        fh.write("min_backoff_order\tbackoff_weight\tentropy_gap\n")
        for order, weight, gap in rows:
            fh.write(f"{order}\t{weight!r}\t{gap!r}\n")
    click.echo(f"wrote {len(rows)} sweep rows to {p['out']}")


if __name__ == "__main__":
    sys.exit(main())
