"""Timestamped note events from periodic document snapshots.

Consecutive snapshots of each author's note document are diffed line-wise
with a longest-common-subsequence alignment (lines compared after trimming
trailing whitespace). Each non-empty diff becomes one event at the later
snapshot's time, classified as added, removed, or mixed.
"""

from __future__ import annotations

from typing import Sequence

from .ingest import NoteSnapshot
from .model import NoteEvent


def _lines(text: str) -> list[str]:
    if text == "":
        return []
    return [line.rstrip() for line in text.splitlines()]


def lcs_table(a: Sequence[str], b: Sequence[str]):
    """Quadratic LCS length table; table[i][j] = LCS of a[:i], b[:j]."""
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        row = table[i]
        prev = table[i - 1]
        ai = a[i - 1]
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                row[j] = prev[j] if prev[j] >= row[j - 1] else row[j - 1]
    return table


def diff_snapshots(prev: str, next_: str) -> tuple[list[str], list[str]]:
    """Line-based LCS diff: (added_lines, removed_lines), order preserved."""
    a = _lines(prev)
    b = _lines(next_)
    table = lcs_table(a, b)
    added: list[str] = []
    removed: list[str] = []
    i, j = len(a), len(b)
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1]:
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            removed.append(a[i - 1])
            i -= 1
        else:
            added.append(b[j - 1])
            j -= 1
    while i > 0:
        removed.append(a[i - 1])
        i -= 1
    while j > 0:
        added.append(b[j - 1])
        j -= 1
    added.reverse()
    removed.reverse()
    return added, removed


def classify(added: Sequence[str], removed: Sequence[str]) -> str:
    if added and removed:
        return "mixed"
    if added:
        return "added"
    if removed:
        return "removed"
    raise ValueError("empty diff has no kind")


def note_events(snapshots: Sequence[NoteSnapshot]) -> list[NoteEvent]:
    """One event per consecutive same-author snapshot pair with a non-empty diff.

    Snapshots must be sorted by time within each author; diffs never
    interleave across authors.
    """
    by_author: dict[str, list[NoteSnapshot]] = {}
    for s in snapshots:
        by_author.setdefault(s.author, []).append(s)
    events: list[NoteEvent] = []
    for author, snaps in by_author.items():
        for earlier, later in zip(snaps[:-1], snaps[1:]):
            added, removed = diff_snapshots(earlier.text, later.text)
            if not added and not removed:
                continue
            events.append(NoteEvent(author=author, t=later.t,
                                    kind=classify(added, removed),
                                    added_lines=tuple(added),
                                    removed_lines=tuple(removed)))
    events.sort(key=lambda e: (e.t, e.author))
    return events
