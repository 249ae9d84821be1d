"""Cost-effectiveness evaluation of line orderings against known bugs.

An ordering of the whole line population is turned into a lift curve: x is
the fraction of lines inspected, y the fraction of bug credit earned. Credit
is either full (a bug pays out entirely as soon as any of its lines is
inspected) or partial (each inspected line of a bug pays 1/size of the bug's
point). AUCEC is the un-normalized area under that curve up to an inspection
budget; inspecting at random earns an expected 0.5*b*b at budget b.

Also here: a seeded simulation of how a developer walks warning-tool output
(priority first, random within a priority), the deterministic mix ordering
that re-ranks lines inside each priority bucket by their naturalness score,
the budget-matched AUCECL comparison, and bootstrap/Cohen's-d comparison of
entropy distributions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .scoring import LineScore

Line = tuple[str, int]


@dataclass(frozen=True)
class Warning:
    """One static-bug-finder warning covering a line range of a file."""

    tool: str
    path: str
    start_line: int
    end_line: int
    priority: int

    def __post_init__(self) -> None:
        if self.start_line > self.end_line:
            raise ValueError(f"warning range inverted: {self}")
        if self.priority < 1:
            raise ValueError(f"priority must be >= 1: {self}")


class CreditMode(Enum):
    FULL = "full"
    PARTIAL = "partial"


@dataclass(frozen=True)
class EvalCurve:
    """Lift-chart points: (fraction inspected, fraction of credit earned)."""

    points: tuple[tuple[float, float], ...]

    def y_at(self, x: float) -> float:
        """Curve height at x, linearly interpolated between points."""
        points = self.points
        if x <= points[0][0]:
            return points[0][1]
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            if x <= x1:
                if x1 == x0:
                    return y1
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        return points[-1][1]


def lift_curve(
    ordering: Sequence[Line],
    bugs: Mapping[str, frozenset[Line] | set[Line]],
    credit: CreditMode = CreditMode.PARTIAL,
) -> EvalCurve:
    """Cumulative bug credit as the ordering is inspected line by line.

    ``ordering`` must be the full line population, ranked; every bug line
    must appear in it. Each bug is worth one point under either credit mode;
    y is normalized by the number of bugs. With zero bugs the curve is flat
    zero.
    """
    if not ordering:
        raise ValueError("empty line population")
    population = set(ordering)
    for bug_id, lines in bugs.items():
        missing = set(lines) - population
        if missing:
            raise ValueError(f"bug {bug_id} has lines outside the population: {sorted(missing)[:3]}")

    n = len(ordering)
    total_bugs = len(bugs)
    if total_bugs == 0:
        points = [(0.0, 0.0)] + [((i + 1) / n, 0.0) for i in range(n)]
        return EvalCurve(tuple(points))

    line_to_bugs: dict[Line, list[str]] = {}
    for bug_id, lines in bugs.items():
        for line in lines:
            line_to_bugs.setdefault(line, []).append(bug_id)
    bug_size = {bug_id: len(lines) for bug_id, lines in bugs.items()}

    seen: set[str] = set()
    earned = 0.0
    points = [(0.0, 0.0)]
    for i, line in enumerate(ordering):
        for bug_id in line_to_bugs.get(line, ()):
            if credit is CreditMode.FULL:
                if bug_id not in seen:
                    seen.add(bug_id)
                    earned += 1.0
            else:
                earned += 1.0 / bug_size[bug_id]
        points.append(((i + 1) / n, earned / total_bugs))
    return EvalCurve(tuple(points))


def aucec(curve: EvalCurve, budget: float) -> float:
    """Trapezoidal area under the curve from 0 to ``budget`` (un-normalized)."""
    if not (0.0 < budget <= 1.0):
        raise ValueError(f"budget must be in (0, 1]: {budget}")
    area = 0.0
    points = curve.points
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if x1 <= budget:
            area += (x1 - x0) * (y0 + y1) / 2.0
            if x1 == budget:
                return area
        else:
            yb = curve.y_at(budget)
            area += (budget - x0) * (y0 + yb) / 2.0
            return area
    return area


def expand_warnings(warnings: Iterable[Warning]) -> dict[Line, int]:
    """Per-line warning priority; overlapping warnings keep the max priority."""
    values: dict[Line, int] = {}
    for w in warnings:
        for ln in range(w.start_line, w.end_line + 1):
            key = (w.path, ln)
            values[key] = max(values.get(key, 0), w.priority)
    return values


def simulate_sbf_order(
    warnings: Sequence[Warning],
    population: Sequence[Line],
    seed: int,
) -> list[Line]:
    """One simulated inspection order for warning-tool output.

    Each line's value is its warning priority (0 when unwarned) plus a seeded
    uniform [0,1) tie-breaker, sorted descending: priorities dominate, order
    within a priority is random. Deterministic for a fixed seed.
    """
    values = expand_warnings(warnings)
    warned = set(values) - set(population)
    if warned:
        raise ValueError(f"warned lines outside the population: {sorted(warned)[:3]}")
    ordered = sorted(population)
    rng = np.random.default_rng(seed)
    noise = rng.random(len(ordered))
    keyed = [
        (values.get(line, 0) + noise[i], i, line) for i, line in enumerate(ordered)
    ]
    keyed.sort(key=lambda t: -t[0])
    return [line for _, _, line in keyed]


def mix_order(
    warnings: Sequence[Warning],
    scores: Sequence[LineScore],
    *,
    rank_key=lambda s: s.weighted,
) -> list[Line]:
    """Deterministic ordering: priority buckets, naturalness inside each.

    Lines are grouped by warning priority descending with unwarned lines
    last; inside every bucket they are sorted by the ranking score
    descending, ties broken by (path, line). Every warned line must have a
    score.
    """
    values = expand_warnings(warnings)
    by_line: dict[Line, LineScore] = {(s.path, s.line): s for s in scores}
    for line in values:
        if line not in by_line:
            raise ValueError(f"warned line has no score: {line[0]}:{line[1]}")

    def sort_key(line: Line):
        score = by_line.get(line)
        rank = rank_key(score) if score is not None else -math.inf
        return (-values.get(line, 0), -rank, line)

    return sorted(by_line, key=sort_key)


def aucecl(
    sbf_ordering: Sequence[Line],
    nbf_ordering: Sequence[Line],
    warned_line_count: int,
    bugs: Mapping[str, frozenset[Line] | set[Line]],
    credit: CreditMode = CreditMode.PARTIAL,
) -> tuple[float, float]:
    """Both orderings' aucec at the budget set by the warning volume."""
    if warned_line_count <= 0:
        raise ValueError("zero warnings: AUCECL budget undefined")
    if set(sbf_ordering) != set(nbf_ordering):
        raise ValueError("orderings cover different populations")
    budget = min(1.0, warned_line_count / len(sbf_ordering))
    sbf = aucec(lift_curve(sbf_ordering, bugs, credit), budget)
    nbf = aucec(lift_curve(nbf_ordering, bugs, credit), budget)
    return sbf, nbf


def compare_entropy_distributions(
    buggy: Sequence[float],
    other: Sequence[float],
    bootstrap_samples: int = 2000,
    seed: int = 0,
) -> tuple[float, float, float, float]:
    """Mean difference (buggy - other), bootstrap 95% CI, and Cohen's d.

    Parameters
    ----------
    buggy, other : sequences of line entropies, each with at least 2 values.
    bootstrap_samples : resampling count for the CI of the mean difference.
    seed : RNG seed; results are deterministic given it.

    Returns
    -------
    (mean_diff, ci_low, ci_high, cohens_d)

    Raises
    ------
    ValueError for samples of size < 2 or a degenerate (zero) pooled SD.
    """
    a = np.asarray(buggy, dtype=float)
    b = np.asarray(other, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 values")
    mean_diff = float(a.mean() - b.mean())

    n1, n2 = a.size, b.size
    pooled_var = ((n1 - 1) * a.var(ddof=1) + (n2 - 1) * b.var(ddof=1)) / (n1 + n2 - 2)
    pooled_sd = math.sqrt(pooled_var)
    if pooled_sd == 0.0:
        raise ValueError("degenerate pooled SD: both samples are constant")
    d = mean_diff / pooled_sd

    rng = np.random.default_rng(seed)
    diffs = np.empty(bootstrap_samples)
    for i in range(bootstrap_samples):
        ra = a[rng.integers(0, n1, n1)]
        rb = b[rng.integers(0, n2, n2)]
        diffs[i] = ra.mean() - rb.mean()
    ci_low, ci_high = np.percentile(diffs, [2.5, 97.5])
    return mean_diff, float(ci_low), float(ci_high), float(d)


# --- file formats -------------------------------------------------------------
#
# warnings.jsonl: {"tool", "path", "start_line", "end_line", "priority"}
# curve files: two tab-separated columns x, y (one point per line)


def read_warnings(path: str | Path) -> list[Warning]:
    warnings: list[Warning] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            record = json.loads(raw)
            if "_header" in record:
                continue
            try:
                warnings.append(
                    Warning(
                        tool=record["tool"],
                        path=record["path"],
                        start_line=int(record["start_line"]),
                        end_line=int(record["end_line"]),
                        priority=int(record["priority"]),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad warning record: {exc}") from exc
    return warnings


def write_curve(curve: EvalCurve, path: str | Path, header: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write("# config: " + json.dumps(header, sort_keys=True) + "\n")
        for x, y in curve.points:
            fh.write(f"{x!r}\t{y!r}\n")
