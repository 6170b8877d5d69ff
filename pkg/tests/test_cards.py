import math
import random
import re
from collections import Counter

import numpy as np
import pytest

from recapit.attention import MultivariateSeries, ScarfInterval
from recapit.cards import (add_note, add_quote, add_screenshot, build_card,
                           card_statistics, compress_view, donut_shares,
                           export_report, generate_titles, keyword_filter,
                           render_quote, replay_log, set_mark, set_title)
from recapit.errors import ValidationError
from recapit.ingest import Utterance, write_pgm
from recapit.model import (AuthoringState, CardContent, Screenshot, TimeSpan,
                           TopicSegment, load_project, project_from_dict,
                           save_project)
from recapit.providers import TfidfTitleProvider, tokenize

from test_model import manifest_dict


def utter(uid, start, end, text="words", speaker="p1"):
    return Utterance(id=uid, speaker_id=speaker, span=TimeSpan(start, end),
                     text=text)


def seg(sid, start, end, marked=False, title="t"):
    return TopicSegment(id=sid, span=TimeSpan(start, end), title=title,
                        origin="initial", marked=marked)


def scarf_row(pid, triples):
    return [ScarfInterval(pid, TimeSpan(s, e), aoi) for s, e, aoi in triples]


def project_with_segments(segments, **manifest_overrides):
    doc = manifest_dict(**manifest_overrides)
    doc["authoring"] = {
        "segments": [{"id": s.id, "start": s.span.start, "end": s.span.end,
                      "title": s.title, "origin": s.origin, "marked": s.marked}
                     for s in segments],
        "cards": [{"segment_id": s.id, "quotes": [], "notes": [],
                   "screenshots": [], "title_source": "default"}
                  for s in segments],
        "mutation_log": [],
        "version": 0,
    }
    return project_from_dict(doc)


# -- statistics -----------------------------------------------------------------

def test_single_role_speaking_full_segment():
    project = project_with_segments([seg("s1", 0.0, 10.0)])
    us = [utter("u1", 0.0, 10.0, speaker="p1")]  # p1 has role r1
    stats = card_statistics(project.authoring.segments[0], us, [], None, project)
    assert stats.speaking_by_role["r1"] == pytest.approx(1.0)
    assert stats.speaking_by_role["r2"] == 0.0


def test_full_shared_attention_reads_one():
    project = project_with_segments([seg("s1", 0.0, 10.0)])
    rows = [scarf_row("p1", [(0.0, 10.0, "a1")]),
            scarf_row("p2", [(0.0, 10.0, "a1")])]
    stats = card_statistics(project.authoring.segments[0], [], rows, None, project)
    assert stats.attention_by_aoi["a1"] == pytest.approx(1.0)
    assert stats.attention_by_aoi["a2"] == 0.0
    assert set(stats.attention_by_aoi) == {"a1", "a2", "a3"}


def test_statistics_match_interval_oracle():
    rng = random.Random(83)
    project = project_with_segments([seg("s1", 20.0, 60.0)])
    segment = project.authoring.segments[0]

    us = []
    for i in range(40):
        start = rng.uniform(0, 95)
        us.append(utter(f"u{i}", start, start + rng.uniform(0.5, 6.0),
                        speaker=rng.choice(["p1", "p2"])))
    rows = []
    for pid in ("p1", "p2"):
        bounds = sorted(rng.uniform(0, 100) for _ in range(12))
        bounds = [0.0, *bounds, 100.0]
        triples = []
        for s, e in zip(bounds[:-1], bounds[1:]):
            triples.append((s, e, rng.choice([None, "a1", "a2", "a3"])))
        rows.append(scarf_row(pid, triples))
    values = np.array([[rng.random() for _ in range(3)] for _ in range(100)])
    act = MultivariateSeries(bin_width=1.0, start=0.0, values=values,
                             aoi_ids=("a1", "a2", "a3"))

    stats = card_statistics(segment, us, rows, act, project)

    dur = 40.0
    role_of = {"p1": "r1", "p2": "r2"}
    for role in ("r1", "r2"):
        manual = sum(max(0.0, min(u.span.end, 60.0) - max(u.span.start, 20.0))
                     for u in us if role_of[u.speaker_id] == role) / dur
        assert stats.speaking_by_role[role] == pytest.approx(manual, abs=1e-9)
    for aoi in ("a1", "a2", "a3"):
        manual = sum(max(0.0, min(iv.span.end, 60.0) - max(iv.span.start, 20.0))
                     for row in rows for iv in row if iv.aoi_id == aoi) / (dur * 2)
        assert stats.attention_by_aoi[aoi] == pytest.approx(manual, abs=1e-9)
        j = act.aoi_ids.index(aoi)
        manual_act = sum(values[b, j] for b in range(20, 60)) / 40.0
        assert stats.activity_by_aoi[aoi] == pytest.approx(manual_act, abs=1e-9)


def test_zero_duration_segment_error():
    project = project_with_segments([seg("s1", 0.0, 10.0)])
    bad = TopicSegment(id="s1", span=TimeSpan(5.0, 5.0), title="", origin="initial",
                       marked=False)
    with pytest.raises(ValueError):
        card_statistics(bad, [], [], None, project)


def test_donut_renormalizes():
    shares = donut_shares({"a": 0.8, "b": 0.8, "c": 0.0})
    assert shares["a"] == pytest.approx(0.5)
    assert shares["c"] == 0.0
    assert sum(shares.values()) == pytest.approx(1.0)


# -- titles ---------------------------------------------------------------------

def test_empty_dialogue_untitled():
    assert TfidfTitleProvider().titles([""]) == ["Untitled Segment"]


def test_tfidf_distinctive_token_appears():
    texts = [
        "we discuss gaze and attention here today",
        "the segmentation idea needs gaze attention today",
        "attention to the gaze data today again",
    ]
    titles = TfidfTitleProvider().titles(texts)
    assert "Segmentation" in titles[1]

    # oracle: recompute tf-idf for segment 1 and check the top token
    docs = [tokenize(t) for t in texts]
    df = Counter()
    for d in docs:
        df.update(set(d))
    tf = Counter(docs[1])
    scores = {tok: tf[tok] * math.log(len(docs) / df[tok]) for tok in tf}
    best = max(scores, key=lambda k: (scores[k], ))
    assert best == "segmentation"


def test_provider_title_stored_verbatim():
    class EchoStub:
        def titles(self, texts):
            return ["From Annotation to Segmentation" for _ in texts]

    project = project_with_segments([seg("s1", 0.0, 50.0)])
    updated = generate_titles(project, {"s1": "whatever text"}, EchoStub())
    assert updated.authoring.segments[0].title == "From Annotation to Segmentation"
    assert updated.authoring.cards[0].title_source == "provider"


def test_provider_failure_falls_back_and_flags():
    class Boom:
        def titles(self, texts):
            raise RuntimeError("offline")

    project = project_with_segments([seg("s1", 0.0, 50.0)])
    updated = generate_titles(project, {"s1": "alpha beta"}, Boom())
    assert updated.authoring.segments[0].title
    assert updated.authoring.cards[0].title_source == "fallback"


def test_user_title_never_overwritten():
    project = project_with_segments([seg("s1", 0.0, 50.0)])
    project = set_title(project, "s1", "My Title")
    updated = generate_titles(project, {"s1": "alpha beta"}, TfidfTitleProvider())
    assert updated.authoring.segments[0].title == "My Title"


# -- quotes ----------------------------------------------------------------------

def test_add_quote_rendering_and_idempotence():
    project = project_with_segments([seg("s1", 0.0, 50.0)])
    u7 = utter("u7", 5.0, 8.0, text="this is key")
    project = add_quote(project, "s1", u7)
    card = build_card(project, "s1")
    assert card.quotes[0].rendered == "u7: _this is key_"
    assert card.quotes[0].rendered.startswith("u7")
    project = add_quote(project, "s1", u7)
    assert len(build_card(project, "s1").quotes) == 1


def test_add_quote_outside_segment_rejected():
    project = project_with_segments([seg("s1", 0.0, 10.0)])
    with pytest.raises(ValidationError):
        add_quote(project, "s1", utter("u9", 60.0, 65.0))


def test_render_quote_prefix():
    assert render_quote(utter("u3", 0, 1, "hi")) == "u3: _hi_"


# -- keyword filter ----------------------------------------------------------------

def test_keyword_substring_case_insensitive():
    segments = [seg("s1", 0.0, 10.0)]
    us = [utter("u1", 2.0, 4.0, text="we need Segmentation of sessions")]
    assert keyword_filter(segments, us, ["segment"]) == ["s1"]


def test_keyword_no_match():
    segments = [seg("s1", 0.0, 10.0)]
    us = [utter("u1", 2.0, 4.0, text="nothing relevant")]
    assert keyword_filter(segments, us, ["gaze"]) == []


def test_keyword_empty_rejected():
    with pytest.raises(ValidationError):
        keyword_filter([seg("s1", 0, 1)], [], [])
    with pytest.raises(ValidationError):
        keyword_filter([seg("s1", 0, 1)], [], ["  "])


def test_keyword_matches_naive_scan():
    rng = random.Random(89)
    vocab = ["gaze", "segmentation", "poster", "notes", "workshop", "drawing"]
    for _ in range(25):
        n_seg = rng.randint(1, 6)
        bounds = sorted(rng.sample(range(1, 100), n_seg - 1)) if n_seg > 1 else []
        bounds = [0, *bounds, 100]
        segments = [seg(f"s{i}", float(a), float(b))
                    for i, (a, b) in enumerate(zip(bounds[:-1], bounds[1:]))]
        us = []
        for i in range(30):
            start = rng.uniform(0, 99)
            text = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 5)))
            us.append(utter(f"u{i}", start, start + rng.uniform(0.2, 3.0), text))
        keywords = rng.sample(vocab, rng.randint(1, 2))

        got = keyword_filter(segments, us, keywords)
        expected = []
        for s in segments:
            hit = any(
                k.lower() in u.text.lower()
                for u in us for k in keywords
                if min(u.span.end, s.span.end) - max(u.span.start, s.span.start) > 0)
            if hit:
                expected.append(s.id)
        assert got == expected

        # monotonicity: adding a keyword never removes matches
        wider = keyword_filter(segments, us, keywords + ["poster"])
        assert set(got) <= set(wider)


# -- compression -------------------------------------------------------------------

def test_compress_view_example():
    segments = [seg(f"s{i}", float(i * 10), float(i * 10 + 10), marked=i in (1, 4))
                for i in range(6)]
    assert [s.id for s in compress_view(segments)] == ["s1", "s4"]


def test_compress_view_empty():
    segments = [seg("s1", 0.0, 10.0)]
    assert compress_view(segments) == []


def test_compress_view_subsequence():
    rng = random.Random(97)
    for _ in range(20):
        segments = [seg(f"s{i}", float(i), float(i + 1), marked=rng.random() < 0.4)
                    for i in range(10)]
        ids = [s.id for s in segments]
        compressed = [s.id for s in compress_view(segments)]
        it = iter(ids)
        assert all(any(c == x for x in it) for c in compressed)  # subsequence


# -- mutations & replay --------------------------------------------------------------

def test_mutation_log_replay_reproduces_state():
    base = project_with_segments([seg("s1", 0.0, 40.0), seg("s2", 40.0, 100.0)])
    p = base
    p = set_title(p, "s1", "Renamed")
    p = add_quote(p, "s1", utter("u1", 3.0, 6.0, "important"))
    p = add_note(p, "s2", "observation")
    p = set_mark(p, "s2", True)
    assert p.authoring.version == 4

    replayed = replay_log(base, p.authoring.mutation_log)
    assert replayed.authoring.segments == p.authoring.segments
    assert replayed.authoring.cards == p.authoring.cards
    assert replayed.authoring.version == p.authoring.version


def test_set_mark_round_trips_through_disk(tmp_path):
    p = project_with_segments([seg("s1", 0.0, 40.0)])
    p = set_mark(p, "s1", True)
    save_project(p, tmp_path / "p.json")
    loaded = load_project(tmp_path / "p.json")
    assert loaded.authoring.segments[0].marked is True
    assert loaded.authoring.mutation_log[-1]["op"] == "set_mark"


def test_add_screenshot_validates_crop(tmp_path):
    img = np.zeros((40, 60), dtype=np.uint8)
    write_pgm(tmp_path / "frame.pgm", img)
    doc = manifest_dict()
    doc["authoring"]["segments"] = [{"id": "s1", "start": 0.0, "end": 50.0,
                                     "title": "t", "origin": "initial",
                                     "marked": False}]
    doc["authoring"]["cards"] = [{"segment_id": "s1", "quotes": [], "notes": [],
                                  "screenshots": [], "title_source": "default"}]
    project = project_from_dict(doc, base_dir=tmp_path)
    good = Screenshot(image_path="frame.pgm", crop=(10, 10, 20, 20))
    project = add_screenshot(project, "s1", good)
    assert build_card(project, "s1").screenshots[0].crop == (10, 10, 20, 20)

    bad = Screenshot(image_path="frame.pgm", crop=(50, 10, 20, 20))
    with pytest.raises(ValidationError):
        add_screenshot(project, "s1", bad)


# -- report ---------------------------------------------------------------------------

def test_report_single_card(tmp_path):
    p = project_with_segments([seg("s1", 0.0, 40.0, title="The Topic")])
    p = add_quote(p, "s1", utter("u1", 1.0, 2.0, "first quote"))
    p = add_quote(p, "s1", utter("u2", 3.0, 4.0, "second quote"))
    p = set_mark(p, "s1", True)
    out = export_report(p, tmp_path / "report.html")
    content = out.read_text(encoding="utf-8")
    assert content.count("<section class='card'>") == 1
    assert "u1: _first quote_" in content
    assert "u2: _second quote_" in content
    assert "The Topic" in content


def test_report_requires_marked_cards(tmp_path):
    p = project_with_segments([seg("s1", 0.0, 40.0)])
    with pytest.raises(ValidationError):
        export_report(p, tmp_path / "report.html")


def test_report_temporal_order(tmp_path):
    rng = random.Random(101)
    for trial in range(5):
        segments = [seg(f"s{i}", float(i * 10), float(i * 10 + 10),
                        title=f"Topic {i}") for i in range(6)]
        marked_ids = rng.sample(range(6), 3)
        p = project_with_segments(segments)
        for i in marked_ids:
            p = set_mark(p, f"s{i}", True)
        out = export_report(p, tmp_path / f"r{trial}.html")
        content = out.read_text(encoding="utf-8")
        positions = [(content.index(f"Topic {i}"), i) for i in marked_ids]
        order = [i for _, i in sorted(positions)]
        assert order == sorted(marked_ids)


def test_report_timestamp_on_single_line(tmp_path):
    p = project_with_segments([seg("s1", 0.0, 40.0)])
    p = set_mark(p, "s1", True)
    out = export_report(p, tmp_path / "report.html")
    lines = out.read_text(encoding="utf-8").splitlines()
    stamped = [ln for ln in lines if 'name="generated"' in ln]
    assert len(stamped) == 1
    assert re.search(r"\d{4}-\d{2}-\d{2}T", stamped[0])


def test_report_embeds_screenshot_png(tmp_path):
    img = np.zeros((48, 64), dtype=np.uint8)
    img[10:20, 20:40] = 180
    write_pgm(tmp_path / "frame.pgm", img)

    doc = manifest_dict()
    doc["authoring"]["segments"] = [{"id": "s1", "start": 0.0, "end": 50.0,
                                     "title": "Shot", "origin": "initial",
                                     "marked": True}]
    doc["authoring"]["cards"] = [{"segment_id": "s1", "quotes": [], "notes": [],
                                  "screenshots": [], "title_source": "default"}]
    project = project_from_dict(doc, base_dir=tmp_path)
    plain = Screenshot(image_path="frame.pgm", crop=(16, 8, 32, 24))
    project = add_screenshot(project, "s1", plain)

    out = export_report(project, tmp_path / "report.html")
    content = out.read_text(encoding="utf-8")
    assert "data:image/png;base64," in content

    # with a heatmap overlay, the composited image differs from the plain crop
    from recapit.attention import HeatGrid
    from recapit.model import HeatmapOverlay

    overlaid = Screenshot(
        image_path="frame.pgm", crop=(16, 8, 32, 24),
        heatmap_overlay=HeatmapOverlay(kind="attention", span=TimeSpan(0.0, 50.0)))
    project = add_screenshot(project, "s1", overlaid)

    hot = np.zeros((48, 64))
    hot[8:32, 16:48] = 1.0

    def heatmap_fn(kind, span):
        return HeatGrid(width=64, height=48, values=hot, span=span)

    out2 = export_report(project, tmp_path / "report2.html", heatmap_fn=heatmap_fn)
    content2 = out2.read_text(encoding="utf-8")
    images = re.findall(r"base64,([A-Za-z0-9+/=]+)", content2)
    assert len(images) == 2
    assert images[0] != images[1]


def test_export_report_deterministic_bytes(tmp_path):
    p = project_with_segments([seg("s1", 0.0, 40.0, marked=True, title="T")])
    from datetime import datetime, timezone
    stamp = datetime(2025, 3, 14, 12, 0, 0, tzinfo=timezone.utc)
    a = export_report(p, tmp_path / "a.html", generated_at=stamp).read_bytes()
    b = export_report(p, tmp_path / "b.html", generated_at=stamp).read_bytes()
    assert a == b
