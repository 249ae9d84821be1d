"""Global n-gram counts and cache-interpolated token probabilities.

The global model is a plain count table: every contiguous token subsequence
of length 1..max_order of every training file, estimated as count ratios with
a multiplicative backoff penalty per order drop (unnormalized, stupid-backoff
style) and a floor of 1/(vocab_size+1) for tokens never seen at all.

The local model is a per-file cache of n-grams. A query interpolates the two:

    p = (gamma / (gamma + hits)) * p_global + (hits / (gamma + hits)) * p_cache

where ``hits`` is how often the (longest matching, within the configured
order window) prefix occurs in the cache and ``p_cache`` is the cache-relative
continuation frequency. With zero cache hits the result is exactly the global
probability; as hits grow it approaches the cache estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .lexer import TokenizedFile

# Reserved begin-of-sequence sentinel used to pad query prefixes near a file
# start. Never counted into any table or cache, so sentinel-bearing prefixes
# always back off. NUL cannot appear in a lexed token.
BOS = "\x00"

Gram = tuple[str, ...]


@dataclass(frozen=True)
class CacheConfig:
    """Cache-model parameters.

    max_cache_order / min_backoff_order bound the n-gram lengths the cache is
    queried at; backoff_weight multiplies the estimate once per shortening
    step (both in the cache and in the global backoff); gamma is the
    concentration parameter steering the cache/global interpolation.
    """

    max_cache_order: int = 10
    min_backoff_order: int = 4
    backoff_weight: float = 1.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if not (1 <= self.min_backoff_order <= self.max_cache_order):
            raise ValueError("need 1 <= min_backoff_order <= max_cache_order")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if self.backoff_weight <= 0:
            raise ValueError("backoff_weight must be > 0")


@dataclass(frozen=True)
class NgramTable:
    """Counts of all 1..max_order grams of a corpus."""

    max_order: int
    counts: Mapping[Gram, int]
    vocab_size: int
    total_tokens: int

    def count(self, gram: Gram) -> int:
        return self.counts.get(gram, 0)


@dataclass(frozen=True)
class Cache:
    """N-gram counts of the single file under analysis."""

    entries: Mapping[Gram, int]
    config: CacheConfig
    token_count: int = 0

    def count(self, gram: Gram) -> int:
        if not gram:
            return self.token_count
        return self.entries.get(gram, 0)


def _count_into(counts: dict[Gram, int], texts: Sequence[str], max_order: int) -> None:
    n = len(texts)
    for i in range(n):
        top = min(max_order, n - i)
        for k in range(1, top + 1):
            gram = tuple(texts[i : i + k])
            counts[gram] = counts.get(gram, 0) + 1


def count_ngrams(
    files: Iterable[TokenizedFile],
    max_order: int,
    *,
    reverse: bool = False,
) -> NgramTable:
    """Count every contiguous token subsequence of length 1..max_order.

    Each file is its own sequence; no n-gram crosses a file boundary. With
    ``reverse`` the token stream of each file is reversed first (the counting
    view used for suffix-context scoring).
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    counts: dict[Gram, int] = {}
    for file in files:
        texts = file.token_texts()
        if reverse:
            texts = texts[::-1]
        _count_into(counts, texts, max_order)
    return _finish_table(counts, max_order)


def _finish_table(counts: dict[Gram, int], max_order: int) -> NgramTable:
    vocab = sum(1 for g in counts if len(g) == 1)
    total = sum(c for g, c in counts.items() if len(g) == 1)
    return NgramTable(max_order=max_order, counts=counts, vocab_size=vocab, total_tokens=total)


def merge_tables(a: NgramTable, b: NgramTable) -> NgramTable:
    """Pointwise sum of two tables counted at the same order."""
    if a.max_order != b.max_order:
        raise ValueError(f"order mismatch: {a.max_order} != {b.max_order}")
    merged = dict(a.counts)
    for gram, c in b.counts.items():
        merged[gram] = merged.get(gram, 0) + c
    return _finish_table(merged, a.max_order)


def empty_table(max_order: int) -> NgramTable:
    return NgramTable(max_order=max_order, counts={}, vocab_size=0, total_tokens=0)


def ngram_prob(
    table: NgramTable,
    prefix: Sequence[str],
    token: str,
    config: CacheConfig = CacheConfig(),
) -> float:
    """Global-model probability of ``token`` after ``prefix``.

    Uses the longest matched prefix of length <= max_order-1, backing off one
    token at a time with a multiplicative backoff_weight penalty per step,
    down to the unigram estimate count/total, and finally the out-of-vocabulary
    floor 1/(vocab_size+1). Never returns 0; capped at 1.
    """
    h = tuple(prefix[-(table.max_order - 1):]) if table.max_order > 1 else ()
    penalty = 1.0
    while h:
        num = table.count(h + (token,))
        if num > 0:
            return min(1.0, penalty * num / table.count(h))
        penalty *= config.backoff_weight
        h = h[1:]
    num = table.count((token,))
    if num > 0:
        return min(1.0, penalty * num / table.total_tokens)
    return min(1.0, penalty / (table.vocab_size + 1))


def build_cache(
    file: TokenizedFile,
    config: CacheConfig = CacheConfig(),
    *,
    reverse: bool = False,
) -> Cache:
    """Collect all n-grams (length <= max_cache_order) of the current file."""
    texts = file.token_texts()
    if reverse:
        texts = texts[::-1]
    entries: dict[Gram, int] = {}
    _count_into(entries, texts, config.max_cache_order)
    return Cache(entries=entries, config=config, token_count=len(texts))


def cached_prob(
    table: NgramTable,
    cache: Cache,
    prefix: Sequence[str],
    token: str,
) -> float:
    """Cache-interpolated probability of ``token`` after ``prefix``.

    The cache is queried at prefix lengths from min(len(prefix),
    max_cache_order-1) down to min_backoff_order-1, longest match first, with
    the backoff_weight penalty per shortening step. The matched prefix's
    occurrence count drives the interpolation weight; no match at any
    admissible length leaves the global probability unchanged.
    """
    cfg = cache.config
    p_global = ngram_prob(table, prefix, token, cfg)
    longest = min(len(prefix), cfg.max_cache_order - 1)
    penalty = 1.0
    for k in range(longest, cfg.min_backoff_order - 2, -1):
        if k < 0:
            break
        h = tuple(prefix[len(prefix) - k:])
        hits = cache.count(h)
        if hits > 0:
            p_cache = min(1.0, penalty * cache.count(h + (token,)) / hits)
            w = cfg.gamma / (cfg.gamma + hits)
            return min(1.0, w * p_global + (1.0 - w) * p_cache)
        penalty *= cfg.backoff_weight
    return p_global


# --- serialization ----------------------------------------------------------
#
# Text format, one n-gram per line, sorted by (length, tokens):
#
#   max_order <TAB> vocab_size <TAB> total_tokens
#   count <TAB> tok1 tok2 ... tokk
#
# Token texts may contain spaces or tabs (string literals keep their lexeme),
# so they are escaped: backslash, space and tab become \\, \s and \t.


def _escape(tok: str) -> str:
    return tok.replace("\\", "\\\\").replace(" ", "\\s").replace("\t", "\\t")


def _unescape(tok: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(tok):
        ch = tok[i]
        if ch == "\\" and i + 1 < len(tok):
            nxt = tok[i + 1]
            out.append({"\\": "\\", "s": " ", "t": "\t"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def save_table(table: NgramTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{table.max_order}\t{table.vocab_size}\t{table.total_tokens}\n")
        for gram in sorted(table.counts, key=lambda g: (len(g), g)):
            toks = " ".join(_escape(t) for t in gram)
            fh.write(f"{table.counts[gram]}\t{toks}\n")


def load_table(path: str | Path) -> NgramTable:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        max_order, vocab, total = (int(x) for x in header)
        counts: dict[Gram, int] = {}
        for raw in fh:
            raw = raw.rstrip("\n")
            if not raw:
                continue
            count_s, toks = raw.split("\t", 1)
            gram = tuple(_unescape(t) for t in toks.split(" "))
            counts[gram] = int(count_s)
    table = NgramTable(max_order=max_order, counts=counts, vocab_size=vocab, total_tokens=total)
    return table
