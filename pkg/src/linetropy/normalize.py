"""Turning raw line entropies into type-normalized, bug-weighted scores.

Raw entropy varies systematically with what a line *is*: declaration-heavy
lines run hot, stereotyped control-flow lines run cold. Normalizing within
line types (z-score against the type's own mean and spread) removes that
structural component, and scaling by each type's historically observed
bug rate concentrates the ranking on types that actually produce bugs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Collection, Iterable, Mapping, Sequence

from .lexer import LineType
from .scoring import LineScore


@dataclass(frozen=True)
class TypeStats:
    """Per-type entropy mean, population standard deviation, and pool size."""

    mean: Mapping[LineType, float]
    sd: Mapping[LineType, float]
    count: Mapping[LineType, int]


@dataclass(frozen=True)
class BugWeightTable:
    """Per-type bug and line counts plus the normalized bug-proneness weight."""

    bugs: Mapping[LineType, int]
    lines: Mapping[LineType, int]
    weight: Mapping[LineType, float]
    trained_on: str = ""


def compute_type_stats(scores: Sequence[LineScore]) -> TypeStats:
    """Sample mean and population standard deviation of entropy per line type.

    Parameters
    ----------
    scores : sequence of LineScore
        The reference population; must be non-empty.
    """
    if not scores:
        raise ValueError("empty score population")
    by_type: dict[LineType, list[float]] = {}
    for s in scores:
        by_type.setdefault(s.line_type, []).append(s.entropy)
    mean: dict[LineType, float] = {}
    sd: dict[LineType, float] = {}
    count: dict[LineType, int] = {}
    for lt, vals in by_type.items():
        n = len(vals)
        mu = sum(vals) / n
        var = sum((v - mu) ** 2 for v in vals) / n
        mean[lt] = mu
        sd[lt] = math.sqrt(var)
        count[lt] = n
    return TypeStats(mean=mean, sd=sd, count=count)


def zscore(score: LineScore, stats: TypeStats) -> float:
    """(entropy - type mean) / type SD; 0 for degenerate pools.

    A pool with zero spread or fewer than two members gives every line a
    z of 0 ("exactly typical"), so rare types are never flagged on the
    strength of one sample.
    """
    lt = score.line_type
    if lt not in stats.mean:
        raise KeyError(f"unknown line type {lt.value}")
    if stats.count[lt] < 2 or stats.sd[lt] == 0.0:
        return 0.0
    return (score.entropy - stats.mean[lt]) / stats.sd[lt]


def train_bug_weights(
    scores: Sequence[LineScore],
    buggy: Collection[tuple[str, int]],
    trained_on: str = "",
) -> BugWeightTable:
    """Estimate per-type bug-proneness weights from labeled history.

    Parameters
    ----------
    scores : sequence of LineScore
        Every scored line of the training snapshots.
    buggy : collection of (path, line)
        The lines labeled buggy in that history; must be non-empty.

    Each observed type's rate is bugs/lines, normalized by the sum of the
    observed rates (so the observed weights sum to 1). A type never seen in
    the history is imputed the mean of the observed rates, over the same
    denominator.
    """
    buggy_set = set(buggy)
    bugs: dict[LineType, int] = {}
    lines: dict[LineType, int] = {}
    for s in scores:
        lines[s.line_type] = lines.get(s.line_type, 0) + 1
        if (s.path, s.line) in buggy_set:
            bugs[s.line_type] = bugs.get(s.line_type, 0) + 1
    if not bugs:
        raise ValueError("no training signal: history contains no buggy lines")

    rates: dict[LineType, float] = {
        lt: bugs.get(lt, 0) / n for lt, n in lines.items() if n > 0
    }
    total = sum(rates.values())
    mean_rate = total / len(rates)
    weight = {lt: rates.get(lt, mean_rate) / total for lt in LineType}
    return BugWeightTable(
        bugs={lt: bugs.get(lt, 0) for lt in LineType},
        lines={lt: lines.get(lt, 0) for lt in LineType},
        weight=weight,
        trained_on=trained_on,
    )


def weighted_score(z: float, weights: BugWeightTable, line_type: LineType) -> float:
    """z scaled by the type's bug-proneness weight: the final ranking key."""
    if line_type not in weights.weight:
        raise KeyError(f"line type {line_type.value} missing from weight table")
    return z * weights.weight[line_type]


def apply_normalization(
    scores: Sequence[LineScore],
    weights: BugWeightTable | None = None,
) -> list[LineScore]:
    """Fill z (and, given weights, the weighted score) on a score population.

    Type statistics come from the population being normalized. Returns new
    LineScore objects; the inputs are untouched.
    """
    stats = compute_type_stats(scores)
    out: list[LineScore] = []
    for s in scores:
        z = zscore(s, stats)
        w = weighted_score(z, weights, s.line_type) if weights is not None else 0.0
        out.append(replace_score(s, z=z, weighted=w))
    return out


def replace_score(score: LineScore, **kw) -> LineScore:
    return replace(score, **kw)  # LineScore is a plain dataclass


# --- bug-weight serialization -------------------------------------------------
#
#   # trained-on: <snapshot range>
#   type <TAB> bugs <TAB> lines <TAB> weight


def save_bug_weights(table: BugWeightTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# trained-on: {table.trained_on}\n")
        for lt in LineType:
            fh.write(
                f"{lt.value}\t{table.bugs.get(lt, 0)}\t{table.lines.get(lt, 0)}"
                f"\t{table.weight[lt]!r}\n"
            )


def load_bug_weights(path: str | Path) -> BugWeightTable:
    bugs: dict[LineType, int] = {}
    lines: dict[LineType, int] = {}
    weight: dict[LineType, float] = {}
    trained_on = ""
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.rstrip("\n")
            if raw.startswith("# trained-on:"):
                trained_on = raw.split(":", 1)[1].strip()
                continue
            if not raw or raw.startswith("#"):
                continue
            name, b, n, w = raw.split("\t")
            lt = LineType(name)
            bugs[lt] = int(b)
            lines[lt] = int(n)
            weight[lt] = float(w)
    return BugWeightTable(bugs=bugs, lines=lines, weight=weight, trained_on=trained_on)
