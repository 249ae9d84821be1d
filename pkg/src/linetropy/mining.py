"""Mining version history for buggy, fixed, and unchanged lines.

The miner is decoupled from any version-control tool: it consumes a
directory of snapshot file trees plus a JSON-lines commit manifest whose
records point at stored old/new blobs. Commits between two consecutive
snapshots are diffed line-by-line; per-file changes deleting between one and
``max_delete`` lines are retained; retained changes whose commit message
matches the error-keyword heuristic contribute their deleted lines as buggy
and their added lines as fixed, and everything untouched at the old boundary
is unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Mapping, Sequence

__all__ = [
    "CommitRecord",
    "DiffResult",
    "LineSets",
    "extract_snapshots",
    "diff_versions",
    "classify_bugfix",
    "build_line_sets",
    "read_commit_manifest",
    "write_linesets",
    "read_linesets",
]

BUGFIX_KEYWORDS = (
    "error", "bug", "fix", "issue", "mistake", "incorrect", "fault", "defect", "flaw",
)

DEFAULT_MAX_DELETE = 30
MAX_DELETE_PRESETS = (2, 5, 10, 20, 30)


@dataclass(frozen=True)
class CommitRecord:
    """One commit: id, timestamp, message, and per-file old/new texts."""

    id: str
    timestamp: datetime
    message: str
    file_changes: tuple[tuple[str, str, str], ...]  # (path, old_text, new_text)

    def __post_init__(self) -> None:
        for path, old, new in self.file_changes:
            if not old and not new:
                raise ValueError(f"commit {self.id}: {path} has neither old nor new text")


@dataclass(frozen=True)
class DiffResult:
    deleted_lines: frozenset[tuple[str, int]]  # (path, line in old version)
    added_lines: frozenset[tuple[str, int]]  # (path, line in new version)


@dataclass(frozen=True)
class LineSets:
    unchanged: frozenset[tuple[str, int]]
    buggy: frozenset[tuple[str, int, str]]
    fixed: frozenset[tuple[str, int, str]]


def extract_snapshots(
    history: Sequence[CommitRecord],
    interval: timedelta,
    start: datetime,
) -> list[datetime]:
    """Snapshot boundaries at start, start+interval, ... up to the last commit."""
    if not history:
        return []
    last = max(c.timestamp for c in history)
    boundaries: list[datetime] = []
    t = start
    while t <= last:
        boundaries.append(t)
        t = t + interval
    return boundaries


def _lcs_table(a: Sequence[str], b: Sequence[str]) -> list[list[int]]:
    rows = len(a) + 1
    cols = len(b) + 1
    table = [[0] * cols for _ in range(rows)]
    for i in range(len(a) - 1, -1, -1):
        row = table[i]
        nxt = table[i + 1]
        for j in range(len(b) - 1, -1, -1):
            if a[i] == b[j]:
                row[j] = nxt[j + 1] + 1
            else:
                row[j] = nxt[j] if nxt[j] >= row[j + 1] else row[j + 1]
    return table


def diff_versions(old_text: str, new_text: str, path: str = "") -> DiffResult:
    """Line-based longest-common-subsequence diff of two file versions.

    Lines only in the old version are deleted, lines only in the new version
    are added; line numbers are 1-based in their respective versions.
    """
    a = old_text.splitlines()
    b = new_text.splitlines()
    table = _lcs_table(a, b)
    deleted: set[tuple[str, int]] = set()
    added: set[tuple[str, int]] = set()
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            deleted.add((path, i + 1))
            i += 1
        else:
            added.add((path, j + 1))
            j += 1
    for k in range(i, len(a)):
        deleted.add((path, k + 1))
    for k in range(j, len(b)):
        added.add((path, k + 1))
    return DiffResult(frozenset(deleted), frozenset(added))


# Light suffix stemmer (plural / -ed / -ing / final-e rules). Enough to give
# the bugfix keywords and their inflections a common stem; not a full stemmer.
_VOWELS = set("aeiou")


def _has_vowel(word: str) -> bool:
    return any(c in _VOWELS for c in word)


def stem(word: str) -> str:
    w = word.lower()
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies"):
        w = w[:-3] + "i"
    elif w.endswith("s") and not w.endswith("ss"):
        w = w[:-1]
    if w.endswith("eed"):
        if len(w) > 4:
            w = w[:-1]
    elif w.endswith("ed") and _has_vowel(w[:-2]):
        w = w[:-2]
        w = _post_strip(w)
    elif w.endswith("ing") and _has_vowel(w[:-3]):
        w = w[:-3]
        w = _post_strip(w)
    if w.endswith("e") and len(w) > 3:
        w = w[:-1]
    return w


def _post_strip(w: str) -> str:
    if w.endswith(("at", "bl", "iz")):
        return w + "e"
    if len(w) >= 2 and w[-1] == w[-2] and w[-1] not in "lsz":
        return w[:-1]
    return w


_KEYWORD_STEMS = frozenset(stem(k) for k in BUGFIX_KEYWORDS)


def classify_bugfix(message: str) -> bool:
    """True iff the stemmed words of the message hit an error-keyword stem."""
    words = _split_words(message)
    return any(stem(w) in _KEYWORD_STEMS for w in words)


def _split_words(message: str) -> list[str]:
    words: list[str] = []
    current: list[str] = []
    for ch in message.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            words.append("".join(current))
            current = []
    if current:
        words.append("".join(current))
    return words


def build_line_sets(
    old_snapshot: Mapping[str, str],
    commits: Sequence[CommitRecord],
    max_delete: int = DEFAULT_MAX_DELETE,
) -> LineSets:
    """Label every old-boundary line as unchanged, buggy, or neither.

    ``old_snapshot`` maps path to file text at the older boundary. Per-file
    changes are retained when they delete between 1 and ``max_delete`` lines;
    retained changes of keyword-classified bugfix commits mark their deleted
    lines buggy (tagged with the commit id) and their added lines fixed. All
    old-boundary lines not deleted by a retained change are unchanged.
    """
    buggy: set[tuple[str, int, str]] = set()
    fixed: set[tuple[str, int, str]] = set()
    touched: set[tuple[str, int]] = set()

    for commit in commits:
        is_fix = classify_bugfix(commit.message)
        for path, old, new in commit.file_changes:
            diff = diff_versions(old, new, path)
            deleted = len(diff.deleted_lines)
            if deleted < 1 or deleted > max_delete:
                continue
            touched.update(diff.deleted_lines)
            if is_fix:
                buggy.update((p, ln, commit.id) for p, ln in diff.deleted_lines)
                fixed.update((p, ln, commit.id) for p, ln in diff.added_lines)

    unchanged: set[tuple[str, int]] = set()
    for path, text in old_snapshot.items():
        for ln in range(1, len(text.splitlines()) + 1):
            if (path, ln) not in touched:
                unchanged.add((path, ln))
    return LineSets(frozenset(unchanged), frozenset(buggy), frozenset(fixed))


# --- manifest and lineset files -----------------------------------------------
#
# commits.jsonl: {"id", "timestamp" (ISO-8601), "message",
#                 "files": [{"path", "old", "new"}]}
# where old/new are blob paths relative to the manifest's directory, or null
# for a file add/delete.
#
# linesets.jsonl: {"snapshot", "path", "line", "label", "bug_id"?}


def read_commit_manifest(path: str | Path) -> list[CommitRecord]:
    manifest = Path(path)
    root = manifest.parent
    commits: list[CommitRecord] = []
    with open(manifest, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
                changes = []
                for entry in record["files"]:
                    old = _read_blob(root, entry.get("old"))
                    new = _read_blob(root, entry.get("new"))
                    changes.append((entry["path"], old, new))
                commits.append(
                    CommitRecord(
                        id=record["id"],
                        timestamp=datetime.fromisoformat(record["timestamp"]),
                        message=record["message"],
                        file_changes=tuple(changes),
                    )
                )
            except (KeyError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{manifest}:{lineno}: bad commit record: {exc}") from exc
    commits.sort(key=lambda c: (c.timestamp, c.id))
    return commits


def _read_blob(root: Path, rel: str | None) -> str:
    if rel is None:
        return ""
    return (root / rel).read_text(encoding="utf-8")


def lineset_records(snapshot: str, sets: LineSets) -> list[dict]:
    records: list[dict] = []
    for path, line in sets.unchanged:
        records.append({"snapshot": snapshot, "path": path, "line": line, "label": "unchanged"})
    for path, line, bug_id in sets.buggy:
        records.append(
            {"snapshot": snapshot, "path": path, "line": line, "label": "buggy", "bug_id": bug_id}
        )
    for path, line, bug_id in sets.fixed:
        records.append(
            {"snapshot": snapshot, "path": path, "line": line, "label": "fixed", "bug_id": bug_id}
        )
    records.sort(key=lambda r: (r["snapshot"], r["path"], r["line"], r["label"], r.get("bug_id", "")))
    return records


def write_linesets(records: Iterable[dict], path: str | Path, header: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(json.dumps({"_header": header}, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps(record) + "\n")


def read_linesets(path: str | Path) -> list[dict]:
    records: list[dict] = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.strip()
            if not raw:
                continue
            record = json.loads(raw)
            if "_header" in record:
                continue
            records.append(record)
    return records
