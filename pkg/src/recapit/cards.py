"""Topic cards: summary statistics, authoring mutations, filtering, reports.

Authoring mutations are pure: each returns a new project snapshot with the
mutation appended to the project's log, so replaying the log from the
post-segmentation state reproduces the final authoring state exactly.
"""

from __future__ import annotations

import base64
import html
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .attention import HeatGrid, MultivariateSeries, ScarfInterval
from .errors import NotFoundError, ValidationError
from .exports import encode_png
from .ingest import Utterance, read_pgm
from .model import (CardContent, CardStats, Quote, Screenshot, TimeSpan,
                    TopicCard, TopicSegment, WorkshopProject)


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

def card_statistics(segment: TopicSegment, utterances: Sequence[Utterance],
                    scarfs: Sequence[Sequence[ScarfInterval]],
                    activity: Optional[MultivariateSeries],
                    project: WorkshopProject) -> CardStats:
    """Duration-normalized per-segment shares.

    speaking_by_role may exceed 1 under overlapping speech (raw values are
    kept; donut rendering renormalizes); attention shares divide by
    participant count so they stay in [0, 1]; activity is the time-weighted
    mean of series bins over the segment. Every role and AOI is present,
    zeros included.
    """
    duration = segment.span.duration
    if duration <= 0:
        raise ValueError(f"segment {segment.id} has zero duration")

    speaker_role = {p.id: p.role_id for p in project.participants}
    speaking = {r.id: 0.0 for r in project.roles}
    for u in utterances:
        overlap = u.span.overlap(segment.span)
        if overlap > 0 and u.speaker_id in speaker_role:
            speaking[speaker_role[u.speaker_id]] += overlap
    speaking = {rid: v / duration for rid, v in speaking.items()}

    attention = {a.id: 0.0 for a in project.aois}
    n_participants = max(1, len(scarfs))
    for row in scarfs:
        for iv in row:
            if iv.aoi_id is None or iv.aoi_id not in attention:
                continue
            attention[iv.aoi_id] += iv.span.overlap(segment.span)
    attention = {aid: v / (duration * n_participants) for aid, v in attention.items()}

    activity_share = {a.id: 0.0 for a in project.aois}
    if activity is not None:
        weights = 0.0
        sums = {a.id: 0.0 for a in project.aois}
        for i in range(activity.num_bins):
            bin_span = activity.bin_span(i, project.duration)
            w = bin_span.overlap(segment.span)
            if w <= 0:
                continue
            weights += w
            for j, aid in enumerate(activity.aoi_ids):
                if aid in sums:
                    sums[aid] += float(activity.values[i, j]) * w
        if weights > 0:
            activity_share = {aid: s / weights for aid, s in sums.items()}

    return CardStats(speaking_by_role=speaking, attention_by_aoi=attention,
                     activity_by_aoi=activity_share)


def donut_shares(raw: dict[str, float]) -> dict[str, float]:
    """Renormalize non-zero entries to sum to 1 (for donut rendering)."""
    total = sum(v for v in raw.values() if v > 0)
    if total <= 0:
        return {k: 0.0 for k in raw}
    return {k: (v / total if v > 0 else 0.0) for k, v in raw.items()}


# ---------------------------------------------------------------------------
# Titles
# ---------------------------------------------------------------------------

def generate_titles(project: WorkshopProject, segment_texts: dict[str, str],
                    provider) -> WorkshopProject:
    """Fill in titles for segments whose title was never user-edited.

    ``provider`` exposes ``titles(texts) -> list[str]``; empty dialogue
    yields "Untitled Segment". Failures fall back to the offline TF-IDF
    provider and the card is flagged with title_source="fallback".
    """
    from .providers import TfidfTitleProvider

    segments = list(project.authoring.segments)
    texts = [segment_texts.get(s.id, "") for s in segments]
    source = "provider"
    try:
        titles = provider.titles(texts)
    except Exception:
        titles = TfidfTitleProvider().titles(texts)
        source = "fallback"
    if isinstance(provider, TfidfTitleProvider):
        source = "fallback"

    new_segments = []
    new_cards = {c.segment_id: c for c in project.authoring.cards}
    for seg, title in zip(segments, titles):
        card = new_cards.get(seg.id, CardContent(segment_id=seg.id))
        if card.title_source == "user":
            new_segments.append(seg)
            continue
        title = title.strip() or "Untitled Segment"
        new_segments.append(replace(seg, title=title))
        new_cards[seg.id] = replace(card, title_source=source)
    authoring = replace(project.authoring, segments=tuple(new_segments),
                        cards=tuple(new_cards[s.id] for s in new_segments
                                    if s.id in new_cards))
    return project.with_authoring(authoring)


# ---------------------------------------------------------------------------
# Authoring mutations
# ---------------------------------------------------------------------------

def render_quote(utterance: Utterance) -> str:
    return f"{utterance.id}: _{utterance.text}_"


def _apply(project: WorkshopProject, entry: dict,
           segments: tuple[TopicSegment, ...],
           cards: tuple[CardContent, ...]) -> WorkshopProject:
    authoring = project.authoring
    log_entry = dict(entry)
    log_entry["seq"] = authoring.version + 1
    return project.with_authoring(replace(
        authoring, segments=segments, cards=cards,
        mutation_log=authoring.mutation_log + (log_entry,),
        version=authoring.version + 1,
    ))


def _update_card(cards: tuple[CardContent, ...], segment_id: str,
                 fn: Callable[[CardContent], CardContent]) -> tuple[CardContent, ...]:
    found = False
    out = []
    for c in cards:
        if c.segment_id == segment_id:
            out.append(fn(c))
            found = True
        else:
            out.append(c)
    if not found:
        out.append(fn(CardContent(segment_id=segment_id)))
    return tuple(out)


def _update_segment(segments: tuple[TopicSegment, ...], segment_id: str,
                    fn) -> tuple[TopicSegment, ...]:
    if segment_id not in {s.id for s in segments}:
        raise NotFoundError(f"unknown segment id: {segment_id}")
    return tuple(fn(s) if s.id == segment_id else s for s in segments)


def set_title(project: WorkshopProject, segment_id: str, title: str,
              source: str = "user") -> WorkshopProject:
    if not title.strip():
        raise ValidationError("title", "must be non-empty")
    segments = _update_segment(project.authoring.segments, segment_id,
                               lambda s: replace(s, title=title))
    cards = _update_card(project.authoring.cards, segment_id,
                         lambda c: replace(c, title_source=source))
    entry = {"op": "set_title", "segment_id": segment_id,
             "payload": {"title": title, "source": source}}
    return _apply(project, entry, segments, cards)


def add_quote(project: WorkshopProject, segment_id: str,
              utterance: Utterance) -> WorkshopProject:
    segment = project.authoring.segment(segment_id)
    if utterance.span.overlap(segment.span) <= 0 and not (
            segment.span.contains(utterance.span.start)):
        raise ValidationError(
            "utterance_id",
            f"utterance {utterance.id} lies outside segment {segment_id}")
    rendered = render_quote(utterance)
    return _add_quote_rendered(project, segment_id, utterance.id, rendered)


def _add_quote_rendered(project: WorkshopProject, segment_id: str,
                        utterance_id: str, rendered: str) -> WorkshopProject:
    card = project.authoring.card(segment_id)
    if any(q.utterance_id == utterance_id for q in card.quotes):
        return project  # idempotent per utterance id
    quote = Quote(utterance_id=utterance_id, rendered=rendered)
    cards = _update_card(project.authoring.cards, segment_id,
                         lambda c: replace(c, quotes=c.quotes + (quote,)))
    entry = {"op": "add_quote", "segment_id": segment_id,
             "payload": {"utterance_id": utterance_id, "rendered": rendered}}
    return _apply(project, entry, project.authoring.segments, cards)


def add_note(project: WorkshopProject, segment_id: str, text: str) -> WorkshopProject:
    if not text.strip():
        raise ValidationError("note", "must be non-empty")
    project.authoring.segment(segment_id)  # existence check
    cards = _update_card(project.authoring.cards, segment_id,
                         lambda c: replace(c, notes=c.notes + (text,)))
    entry = {"op": "add_note", "segment_id": segment_id, "payload": {"text": text}}
    return _apply(project, entry, project.authoring.segments, cards)


def set_mark(project: WorkshopProject, segment_id: str, marked: bool) -> WorkshopProject:
    segments = _update_segment(project.authoring.segments, segment_id,
                               lambda s: replace(s, marked=marked))
    entry = {"op": "set_mark", "segment_id": segment_id, "payload": {"marked": marked}}
    return _apply(project, entry, segments, project.authoring.cards)


def add_screenshot(project: WorkshopProject, segment_id: str,
                   screenshot: Screenshot,
                   image_size: Optional[tuple[int, int]] = None) -> WorkshopProject:
    """Append a screenshot; crop is validated against the image bounds
    (``image_size`` = (width, height), read from the file when omitted)."""
    project.authoring.segment(segment_id)
    if image_size is None:
        img = read_pgm(_resolve(project, screenshot.image_path))
        image_size = (img.shape[1], img.shape[0])
    x, y, w, h = screenshot.crop
    if x + w > image_size[0] or y + h > image_size[1]:
        raise ValidationError("crop", f"crop {screenshot.crop} exceeds image "
                                      f"bounds {image_size}")
    cards = _update_card(project.authoring.cards, segment_id,
                         lambda c: replace(c, screenshots=c.screenshots + (screenshot,)))
    overlay = None
    if screenshot.heatmap_overlay is not None:
        overlay = {"kind": screenshot.heatmap_overlay.kind,
                   "start": screenshot.heatmap_overlay.span.start,
                   "end": screenshot.heatmap_overlay.span.end}
    entry = {"op": "add_screenshot", "segment_id": segment_id,
             "payload": {"image_path": screenshot.image_path,
                         "crop": list(screenshot.crop),
                         "heatmap_overlay": overlay}}
    return _apply(project, entry, project.authoring.segments, cards)


def _resolve(project: WorkshopProject, path: str) -> Path:
    p = Path(path)
    if not p.is_absolute() and project.base_dir is not None:
        p = project.base_dir / p
    return p


def replay_log(project: WorkshopProject, log: Sequence[dict],
               utterances: Optional[Sequence[Utterance]] = None) -> WorkshopProject:
    """Reapply a mutation log to a project snapshot.

    Entries are self-contained (quotes carry their rendered text), so no
    source data is required.
    """
    from .model import HeatmapOverlay

    current = project
    for entry in log:
        op = entry["op"]
        sid = entry["segment_id"]
        payload = entry.get("payload", {})
        if op == "set_title":
            current = set_title(current, sid, payload["title"],
                                payload.get("source", "user"))
        elif op == "add_quote":
            current = _add_quote_rendered(current, sid, payload["utterance_id"],
                                          payload["rendered"])
        elif op == "add_note":
            current = add_note(current, sid, payload["text"])
        elif op == "set_mark":
            current = set_mark(current, sid, payload["marked"])
        elif op == "add_screenshot":
            overlay = None
            if payload.get("heatmap_overlay"):
                o = payload["heatmap_overlay"]
                overlay = HeatmapOverlay(kind=o["kind"],
                                         span=TimeSpan(o["start"], o["end"]))
            shot = Screenshot(image_path=payload["image_path"],
                              crop=tuple(payload["crop"]), heatmap_overlay=overlay)
            current = add_screenshot(current, sid, shot,
                                     image_size=(1 << 30, 1 << 30))
        else:
            raise ValidationError("mutation_log", f"unknown op {op!r}")
    return current


def build_card(project: WorkshopProject, segment_id: str,
               stats: Optional[CardStats] = None) -> TopicCard:
    segment = project.authoring.segment(segment_id)
    card = project.authoring.card(segment_id)
    return TopicCard(segment_id=segment_id, title=segment.title,
                     quotes=card.quotes, notes=card.notes,
                     screenshots=card.screenshots, stats=stats,
                     marked=segment.marked)


# ---------------------------------------------------------------------------
# Filtering and compression
# ---------------------------------------------------------------------------

def keyword_filter(segments: Sequence[TopicSegment],
                   utterances: Sequence[Utterance],
                   keywords: Sequence[str]) -> list[str]:
    """Segment ids whose overlapping utterances contain any keyword as a
    case-insensitive substring (compound words match)."""
    if not keywords:
        raise ValidationError("keywords", "need at least one keyword")
    lowered = []
    for k in keywords:
        if not k.strip():
            raise ValidationError("keywords", "empty keyword string")
        lowered.append(k.lower())
    out = []
    for seg in sorted(segments, key=lambda s: s.span.start):
        matched = False
        for u in utterances:
            if u.span.overlap(seg.span) <= 0:
                continue
            text = u.text.lower()
            if any(k in text for k in lowered):
                matched = True
                break
        if matched:
            out.append(seg.id)
    return out


def compress_view(segments: Sequence[TopicSegment]) -> list[TopicSegment]:
    """Marked segments in temporal order; unmarked omitted, data untouched."""
    return [s for s in sorted(segments, key=lambda s: s.span.start) if s.marked]


# ---------------------------------------------------------------------------
# Report export
# ---------------------------------------------------------------------------

def _fmt_mmss(t: float) -> str:
    m, s = divmod(int(round(t)), 60)
    return f"{m:02d}:{s:02d}"


def _stats_table(title: str, shares: dict[str, float], labels: dict[str, str]) -> str:
    rows = "".join(
        f"<tr><td>{html.escape(labels.get(k, k))}</td>"
        f"<td class='num'>{100.0 * v:.1f}%</td></tr>"
        for k, v in shares.items()
    )
    return (f"<table class='stats'><caption>{html.escape(title)}</caption>"
            f"{rows}</table>")


def _render_screenshot(project: WorkshopProject, shot: Screenshot,
                       heatmap_fn: Optional[Callable[[str, TimeSpan], Optional[HeatGrid]]]) -> str:
    path = _resolve(project, shot.image_path)
    image = read_pgm(path)
    x, y, w, h = shot.crop
    crop = image[y:y + h, x:x + w]
    if shot.heatmap_overlay is not None and heatmap_fn is not None:
        grid = heatmap_fn(shot.heatmap_overlay.kind, shot.heatmap_overlay.span)
        if grid is not None:
            rgb = np.stack([crop, crop, crop], axis=-1).astype(float)
            gh, gw = grid.values.shape
            full_h, full_w = image.shape
            for jj in range(h):
                gy = min(gh - 1, int((y + jj + 0.5) / full_h * gh))
                for ii in range(w):
                    gx = min(gw - 1, int((x + ii + 0.5) / full_w * gw))
                    heat = float(grid.values[gy, gx])
                    rgb[jj, ii, 0] = min(255.0, rgb[jj, ii, 0] + 255.0 * 0.5 * heat)
                    rgb[jj, ii, 1] *= (1.0 - 0.35 * heat)
                    rgb[jj, ii, 2] *= (1.0 - 0.35 * heat)
            png = encode_png(rgb)
        else:
            png = encode_png(crop)
    else:
        png = encode_png(crop)
    b64 = base64.b64encode(png).decode("ascii")
    return f"<img alt='screenshot' src='data:image/png;base64,{b64}'/>"


def export_report(project: WorkshopProject, destination, *,
                  stats: Optional[dict[str, CardStats]] = None,
                  heatmap_fn: Optional[Callable[[str, TimeSpan], Optional[HeatGrid]]] = None,
                  generated_at: Optional[datetime] = None) -> Path:
    """Write a self-contained HTML report of all marked cards in temporal order.

    Raises when no card is marked. The generation timestamp occupies exactly
    one line (the ``<meta name="generated">`` tag) so byte-level comparisons
    can exclude it.
    """
    marked = compress_view(project.authoring.segments)
    if not marked:
        raise ValidationError("report", "no marked cards to export")
    destination = Path(destination)
    role_labels = {r.id: r.label for r in project.roles}
    aoi_labels = {a.id: a.label for a in project.aois}
    stamp = (generated_at or datetime.now(timezone.utc)).isoformat()

    sections = []
    for seg in marked:
        card = build_card(project, seg.id, (stats or {}).get(seg.id))
        quotes = "".join(f"<li class='quote'>{html.escape(q.rendered)}</li>"
                         for q in card.quotes)
        notes = "".join(f"<li class='note'>{html.escape(n)}</li>" for n in card.notes)
        shots = "".join(_render_screenshot(project, s, heatmap_fn)
                        for s in card.screenshots)
        tables = ""
        if card.stats is not None:
            tables = (
                _stats_table("Speaking time by role",
                             donut_shares(card.stats.speaking_by_role), role_labels)
                + _stats_table("Attention by area",
                               card.stats.attention_by_aoi, aoi_labels)
                + _stats_table("Activity by area",
                               card.stats.activity_by_aoi, aoi_labels)
            )
        sections.append(f"""<section class='card'>
<h2>{html.escape(card.title or 'Untitled Segment')}</h2>
<p class='span'>{_fmt_mmss(seg.span.start)} – {_fmt_mmss(seg.span.end)}</p>
<ul class='quotes'>{quotes}</ul>
<ul class='notes'>{notes}</ul>
<div class='shots'>{shots}</div>
{tables}
</section>""")

    body = "\n".join(sections)
    doc = f"""<!DOCTYPE html>
<html lang='en'>
<head>
<meta charset='utf-8'/>
<meta name="generated" content="{html.escape(stamp)}"/>
<title>{html.escape(project.title)} – analysis report</title>
<style>
body {{ font-family: system-ui, sans-serif; margin: 2rem auto; max-width: 52rem; }}
section.card {{ border: 1px solid #ccc; border-radius: 8px; padding: 1rem; margin: 1rem 0; }}
p.span {{ color: #666; }}
li.quote {{ font-style: italic; }}
table.stats {{ border-collapse: collapse; margin: .5rem 1rem .5rem 0; display: inline-table; }}
table.stats td {{ border: 1px solid #ddd; padding: .15rem .5rem; }}
td.num {{ text-align: right; }}
img {{ max-width: 100%; image-rendering: pixelated; }}
</style>
</head>
<body>
<h1>{html.escape(project.title)}</h1>
<p>Session {html.escape(project.id)} · start {html.escape(project.session_start.isoformat())} · duration {_fmt_mmss(project.duration)} · {len(marked)} marked topic card(s)</p>
{body}
</body>
</html>
"""
    destination.write_text(doc, encoding="utf-8")
    return destination
