"""Independent brute-force oracles used to cross-check the fast paths.

Everything here recomputes from first principles on every query - scanning
raw token sequences for counts instead of using prepared tables - so a shared
bug between implementation and oracle would have to be a shared bug in the
conventions themselves, not in the data structures.
"""

from __future__ import annotations

from typing import Sequence


def scan_count(sequences: Sequence[Sequence[str]], gram: Sequence[str]) -> int:
    """Occurrences of ``gram`` as a contiguous run in any of the sequences."""
    gram = list(gram)
    k = len(gram)
    total = 0
    for seq in sequences:
        seq = list(seq)
        for i in range(len(seq) - k + 1):
            if seq[i : i + k] == gram:
                total += 1
    return total


def brute_ngram_prob(
    sequences: Sequence[Sequence[str]],
    prefix: Sequence[str],
    token: str,
    max_order: int,
    backoff_weight: float = 1.0,
) -> float:
    """Count-ratio probability with multiplicative backoff and the OOV floor."""
    h = list(prefix[-(max_order - 1):]) if max_order > 1 else []
    penalty = 1.0
    while h:
        num = scan_count(sequences, h + [token])
        if num > 0:
            return min(1.0, penalty * num / scan_count(sequences, h))
        penalty *= backoff_weight
        h = h[1:]
    total = sum(len(s) for s in sequences)
    vocab = len({t for s in sequences for t in s})
    num = scan_count(sequences, [token])
    if num > 0:
        return min(1.0, penalty * num / total)
    return min(1.0, penalty / (vocab + 1))


def brute_cached_prob(
    sequences: Sequence[Sequence[str]],
    file_tokens: Sequence[str],
    prefix: Sequence[str],
    token: str,
    max_order: int,
    max_cache_order: int,
    min_backoff_order: int,
    backoff_weight: float,
    gamma: float,
) -> float:
    """Adaptive interpolation of the global count-ratio model with the
    continuation frequencies of the current file, longest matching prefix
    first within [min_backoff_order-1, max_cache_order-1]."""
    p_global = brute_ngram_prob(sequences, prefix, token, max_order, backoff_weight)
    longest = min(len(prefix), max_cache_order - 1)
    penalty = 1.0
    for k in range(longest, min_backoff_order - 2, -1):
        h = list(prefix[len(prefix) - k:]) if k else []
        hits = scan_count([file_tokens], h) if k else len(file_tokens)
        if hits > 0:
            p_cache = min(1.0, penalty * scan_count([file_tokens], h + [token]) / hits)
            w = gamma / (gamma + hits)
            return min(1.0, w * p_global + (1.0 - w) * p_cache)
        penalty *= backoff_weight
    return p_global


def brute_file_entropies(
    training_seqs: Sequence[Sequence[str]],
    file_tokens: Sequence[str],
    max_order: int,
    max_cache_order: int,
    min_backoff_order: int,
    backoff_weight: float,
    gamma: float,
    bos: str,
    bidirectional: bool = True,
) -> list[float]:
    """Per-token entropy of a file, everything recomputed by scanning."""
    import math

    need = max(max_order - 1, max_cache_order - 1)
    rev_seqs = [list(reversed(s)) for s in training_seqs]
    rev_tokens = list(reversed(file_tokens))

    def pad(ctx: Sequence[str]) -> list[str]:
        ctx = list(ctx)
        return [bos] * (need - len(ctx)) + ctx

    out: list[float] = []
    for i, tok in enumerate(file_tokens):
        prolog = pad(file_tokens[max(0, i - need) : i])
        p_fwd = brute_cached_prob(
            training_seqs, file_tokens, prolog, tok,
            max_order, max_cache_order, min_backoff_order, backoff_weight, gamma,
        )
        bits = -math.log2(p_fwd)
        if bidirectional:
            epilog = file_tokens[i + 1 : i + 1 + need]
            p_bwd = brute_cached_prob(
                rev_seqs, rev_tokens, pad(list(reversed(epilog))), tok,
                max_order, max_cache_order, min_backoff_order, backoff_weight, gamma,
            )
            bits = (bits + -math.log2(p_bwd)) / 2.0
        out.append(bits)
    return out


def lcs_diff(old_lines: Sequence[str], new_lines: Sequence[str]) -> tuple[set[int], set[int]]:
    """Reference line diff via the textbook LCS dynamic program (prefix form).

    Returns 1-based (deleted, added) line-number sets. Built forward over
    prefixes, the mirror image of the production suffix-table walk.
    """
    n, m = len(old_lines), len(new_lines)
    lcs = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if old_lines[i - 1] == new_lines[j - 1]:
                lcs[i][j] = lcs[i - 1][j - 1] + 1
            else:
                lcs[i][j] = max(lcs[i - 1][j], lcs[i][j - 1])
    keep_old: set[int] = set()
    keep_new: set[int] = set()
    i, j = n, m
    while i > 0 and j > 0:
        if old_lines[i - 1] == new_lines[j - 1] and lcs[i][j] == lcs[i - 1][j - 1] + 1:
            keep_old.add(i)
            keep_new.add(j)
            i -= 1
            j -= 1
        elif lcs[i - 1][j] >= lcs[i][j - 1]:
            i -= 1
        else:
            j -= 1
    deleted = {k for k in range(1, n + 1) if k not in keep_old}
    added = {k for k in range(1, m + 1) if k not in keep_new}
    return deleted, added
