"""Per-line cross-entropy over a snapshot with leave-one-bin-out training.

Files are split into bins by a stable hash of their path. Each file is scored
against a global model counted from every bin except its own, plus a local
cache built from the file itself, so a file never contributes to the model
that scores it. Every token is scored in both directions - against the tokens
before it and, via tables counted over reversed streams, against the tokens
after it - and a line's entropy is the mean of its token entropies (bits).
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .lexer import LineType, TokenizedFile
from .ngram import (
    BOS,
    Cache,
    CacheConfig,
    NgramTable,
    build_cache,
    cached_prob,
    count_ngrams,
    empty_table,
    merge_tables,
)


@dataclass
class LineScore:
    """Entropy of one source line, plus normalization fields filled later."""

    path: str
    line: int
    entropy: float
    token_count: int
    line_type: LineType
    z: float = 0.0
    weighted: float = 0.0


@dataclass(frozen=True)
class BinAssignment:
    bin_count: int
    assignment: dict[str, int]

    def bin_of(self, path: str) -> int:
        return self.assignment[path]


def stable_bin(path: str, bin_count: int) -> int:
    """Hash a path to a bin index, stable across runs and platforms."""
    digest = hashlib.md5(path.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % bin_count


def partition_bins(files: Iterable[str], bin_count: int) -> BinAssignment:
    """Assign each path to a bin by stable hash; independent of ordering."""
    if bin_count < 2:
        raise ValueError("bin_count must be >= 2")
    return BinAssignment(bin_count, {p: stable_bin(p, bin_count) for p in files})


@dataclass(frozen=True)
class DirectionalModel:
    """A global table paired with the current file's cache, one direction."""

    table: NgramTable
    cache: Cache

    def prob(self, prefix: Sequence[str], token: str) -> float:
        return cached_prob(self.table, self.cache, prefix, token)


def token_entropy(
    forward: DirectionalModel,
    backward: DirectionalModel | None,
    prolog: Sequence[str],
    epilog: Sequence[str],
    token: str,
) -> float:
    """Surprisal of ``token`` in bits, averaged over both directions.

    The forward query conditions on the tokens before the token, the backward
    query on the reversed tokens after it (matching the reversed counting view
    of the backward tables). Prefixes near a file boundary are padded with a
    sentinel that never matches, so they simply back off. With ``backward``
    None only the forward surprisal is returned.
    """
    cfg = forward.cache.config
    need = max(forward.table.max_order - 1, cfg.max_cache_order - 1)

    def padded(ctx: Sequence[str]) -> list[str]:
        tail = list(ctx[-need:]) if need else []
        return [BOS] * (need - len(tail)) + tail

    bits = -math.log2(forward.prob(padded(prolog), token))
    if backward is None:
        return bits
    rev = list(epilog)[::-1]
    bits_back = -math.log2(backward.prob(padded(rev), token))
    return (bits + bits_back) / 2.0


def line_entropy(token_entropies: Sequence[float]) -> float:
    """Mean of the line's token entropies; a line with no tokens is an error."""
    if not token_entropies:
        raise ValueError("no tokens")
    return sum(token_entropies) / len(token_entropies)


def leave_one_out_tables(
    snapshot: Sequence[TokenizedFile],
    bins: BinAssignment,
    max_order: int,
    *,
    reverse: bool = False,
) -> dict[int, NgramTable]:
    """For each bin, the merged table of every *other* bin's files."""
    per_bin: dict[int, NgramTable] = {}
    for b in range(bins.bin_count):
        members = [f for f in snapshot if bins.bin_of(f.path) == b]
        per_bin[b] = count_ngrams(members, max_order, reverse=reverse)
    loo: dict[int, NgramTable] = {}
    for b in range(bins.bin_count):
        table = empty_table(max_order)
        for other, other_table in per_bin.items():
            if other != b:
                table = merge_tables(table, other_table)
        loo[b] = table
    return loo


def score_file(
    file: TokenizedFile,
    forward_table: NgramTable,
    backward_table: NgramTable | None,
    config: CacheConfig,
) -> list[LineScore]:
    """Score every token-bearing line of one file against the given tables."""
    texts = file.token_texts()
    fwd = DirectionalModel(forward_table, build_cache(file, config))
    bwd = None
    if backward_table is not None:
        bwd = DirectionalModel(backward_table, build_cache(file, config, reverse=True))

    need = max(forward_table.max_order - 1, config.max_cache_order - 1)
    per_line: dict[int, list[float]] = {}
    for i, tok in enumerate(file.tokens):
        prolog = texts[max(0, i - need) : i]
        epilog = texts[i + 1 : i + 1 + need]
        bits = token_entropy(fwd, bwd, prolog, epilog, tok.text)
        per_line.setdefault(tok.line, []).append(bits)

    return [
        LineScore(
            path=file.path,
            line=ln,
            entropy=line_entropy(vals),
            token_count=len(vals),
            line_type=file.line_types[ln],
        )
        for ln, vals in sorted(per_line.items())
    ]


def score_snapshot(
    snapshot: Sequence[TokenizedFile],
    config: CacheConfig = CacheConfig(),
    bins: BinAssignment | None = None,
    *,
    max_order: int = 3,
    bidirectional: bool = True,
    jobs: int = 1,
) -> list[LineScore]:
    """Score every token-bearing line of every file in the snapshot.

    The global model for each file is counted from all bins except the file's
    own; the cache comes from the file itself. Output is ordered by
    (path, line) and is independent of worker count.
    """
    if bins is None:
        bins = partition_bins([f.path for f in snapshot], 10)
    missing = [f.path for f in snapshot if f.path not in bins.assignment]
    if missing:
        raise ValueError(f"bin assignment missing files: {missing[:3]}")

    fwd_loo = leave_one_out_tables(snapshot, bins, max_order)
    bwd_loo = (
        leave_one_out_tables(snapshot, bins, max_order, reverse=True)
        if bidirectional
        else None
    )

    ordered = sorted(snapshot, key=lambda f: f.path)

    def work(file: TokenizedFile) -> list[LineScore]:
        b = bins.bin_of(file.path)
        return score_file(file, fwd_loo[b], bwd_loo[b] if bwd_loo else None, config)

    if jobs <= 1:
        chunks = [work(f) for f in ordered]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(work, ordered))
    return [score for chunk in chunks for score in chunk]


def sweep_cache_params(
    snapshot: Sequence[TokenizedFile],
    buggy: set[tuple[str, int]],
    orders: Sequence[int],
    weights: Sequence[float],
    base_config: CacheConfig = CacheConfig(),
    *,
    max_order: int = 3,
    bins: BinAssignment | None = None,
    bidirectional: bool = True,
) -> list[tuple[int, float, float]]:
    """Mean entropy gap (buggy minus non-buggy) per cache-parameter pair.

    Rescores the snapshot for every (min_backoff_order, backoff_weight)
    combination; rows come back sorted by gap, largest first. Labeled buggy
    lines must exist among the scored lines.
    """
    rows: list[tuple[int, float, float]] = []
    for order in orders:
        for weight in weights:
            cfg = replace(base_config, min_backoff_order=order, backoff_weight=weight)
            scores = score_snapshot(
                snapshot, cfg, bins, max_order=max_order, bidirectional=bidirectional
            )
            buggy_vals = [s.entropy for s in scores if (s.path, s.line) in buggy]
            other_vals = [s.entropy for s in scores if (s.path, s.line) not in buggy]
            if not buggy_vals:
                raise ValueError("no labeled buggy lines among scored lines")
            gap = sum(buggy_vals) / len(buggy_vals) - (
                sum(other_vals) / len(other_vals) if other_vals else 0.0
            )
            rows.append((order, weight, gap))
    rows.sort(key=lambda r: (-r[2], r[0], r[1]))
    return rows


# --- line-score records -----------------------------------------------------
#
# JSON-lines, one record per line, ordered by (path, line):
#   {"path": ..., "line": ..., "line_type": ..., "entropy": ...,
#    "z": ..., "weighted": ..., "token_count": ...}


def score_to_record(score: LineScore) -> dict:
    return {
        "path": score.path,
        "line": score.line,
        "line_type": score.line_type.value,
        "entropy": score.entropy,
        "z": score.z,
        "weighted": score.weighted,
        "token_count": score.token_count,
    }


def record_to_score(record: dict) -> LineScore:
    return LineScore(
        path=record["path"],
        line=int(record["line"]),
        entropy=float(record["entropy"]),
        token_count=int(record["token_count"]),
        line_type=LineType(record["line_type"]),
        z=float(record.get("z", 0.0)),
        weighted=float(record.get("weighted", 0.0)),
    )


def write_scores(scores: Sequence[LineScore], path: str | Path, header: dict | None = None) -> None:
    ordered = sorted(scores, key=lambda s: (s.path, s.line))
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(json.dumps({"_header": header}, sort_keys=True) + "\n")
        for score in ordered:
            fh.write(json.dumps(score_to_record(score)) + "\n")


def read_scores(path: str | Path) -> list[LineScore]:
    scores: list[LineScore] = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.strip()
            if not raw:
                continue
            record = json.loads(raw)
            if "_header" in record:
                continue
            scores.append(record_to_score(record))
    return scores
