import random
from collections import Counter

from recapit.ingest import NoteSnapshot
from recapit.notes import diff_snapshots, note_events

from oracles import lcs_length


def snap(author, t, text):
    return NoteSnapshot(author=author, t=t, text=text)


def test_diff_identity():
    assert diff_snapshots("a\nb", "a\nb") == ([], [])


def test_diff_pure_addition():
    assert diff_snapshots("", "a\nb") == (["a", "b"], [])


def test_diff_pure_removal():
    assert diff_snapshots("a\nb", "") == ([], ["a", "b"])


def test_diff_trailing_whitespace_ignored():
    assert diff_snapshots("a  \nb", "a\nb") == ([], [])


def random_doc(rng, vocab, max_lines=12):
    return "\n".join(rng.choice(vocab)
                     for _ in range(rng.randint(0, max_lines)))


def test_diff_consistent_with_independent_lcs():
    rng = random.Random(71)
    vocab = [f"line {i}" for i in range(6)]  # few values force repeats
    for _ in range(100):
        prev = random_doc(rng, vocab)
        nxt = random_doc(rng, vocab)
        added, removed = diff_snapshots(prev, nxt)
        a = prev.splitlines() if prev else []
        b = nxt.splitlines() if nxt else []
        length = lcs_length(a, b)
        assert len(removed) == len(a) - length
        assert len(added) == len(b) - length
        # multiset reconstruction: prev - removed + added == next
        assert Counter(a) - Counter(removed) + Counter(added) == Counter(b)


def test_note_events_added():
    events = note_events([snap("m", 1.0, ""), snap("m", 2.0, "a"),
                          snap("m", 3.0, "a")])
    assert len(events) == 1
    assert events[0].kind == "added"
    assert events[0].t == 2.0
    assert events[0].added_lines == ("a",)


def test_note_events_removed():
    (event,) = note_events([snap("m", 1.0, "a\nb"), snap("m", 2.0, "b")])
    assert event.kind == "removed"
    assert event.removed_lines == ("a",)
    assert event.added_lines == ()


def test_note_events_mixed():
    (event,) = note_events([snap("m", 1.0, "a"), snap("m", 2.0, "b")])
    assert event.kind == "mixed"
    assert event.added_lines == ("b",)
    assert event.removed_lines == ("a",)


def test_kind_truth_table():
    for prev, nxt, kind in [("", "x", "added"), ("x", "", "removed"),
                            ("x", "y", "mixed")]:
        (event,) = note_events([snap("m", 1.0, prev), snap("m", 2.0, nxt)])
        assert event.kind == kind
        if kind == "added":
            assert event.removed_lines == ()
        if kind == "removed":
            assert event.added_lines == ()
        if kind == "mixed":
            assert event.added_lines and event.removed_lines


def test_no_event_for_identical_snapshots():
    assert note_events([snap("m", 1.0, "same"), snap("m", 2.0, "same")]) == []


def test_replay_reconstructs_final_snapshot():
    rng = random.Random(73)
    vocab = [f"item {i}" for i in range(8)]
    for _ in range(100):
        docs = [random_doc(rng, vocab) for _ in range(rng.randint(2, 6))]
        snaps = [snap("m", float(i), d) for i, d in enumerate(docs)]
        events = note_events(snaps)
        state = Counter(docs[0].splitlines() if docs[0] else [])
        for e in sorted(events, key=lambda e: e.t):
            state -= Counter(e.removed_lines)
            state += Counter(e.added_lines)
        final = Counter(docs[-1].splitlines() if docs[-1] else [])
        assert state == final


def test_authors_never_interleave():
    snaps = [snap("a1", 1.0, ""), snap("a2", 1.5, "z"),
             snap("a1", 2.0, "x"), snap("a2", 3.0, "z\ny")]
    events = note_events(snaps)
    assert {(e.author, e.kind) for e in events} == {("a1", "added"), ("a2", "added")}
    a1 = [e for e in events if e.author == "a1"]
    assert a1[0].added_lines == ("x",)
