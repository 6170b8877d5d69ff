"""Domain model and atomic project persistence.

A workshop project is a single JSON manifest (``project.json``) describing
sources, participants, roles, areas of interest, segmentation parameters,
and the evolving authoring state. All timestamps inside the model are
seconds from session start; absolute wall-clock times exist only at ingest
boundaries. Projects are immutable snapshots: every mutation constructs a
new value.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, replace
from datetime import datetime
from pathlib import Path
from typing import Any, Optional

from .errors import MissingSourceError, ValidationError

MANIFEST_VERSION = 1

SOURCE_KINDS = ("transcript", "gaze", "frames", "landmarks", "notes", "embeddings")
SIGNAL_KINDS = ("attention", "activity")
SEGMENT_ORIGINS = ("initial", "refined")
NOTE_EVENT_KINDS = ("added", "removed", "mixed")


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeSpan:
    """Half-open-ish time interval in seconds from session start."""

    start: float
    end: float

    @property
    def duration(self) -> float:
        return self.end - self.start

    def overlap(self, other: "TimeSpan") -> float:
        """Length of the intersection with ``other`` (0 when disjoint)."""
        return max(0.0, min(self.end, other.end) - max(self.start, other.start))

    def contains(self, t: float) -> bool:
        return self.start <= t <= self.end


@dataclass(frozen=True)
class Participant:
    id: str
    display_name: str
    role_id: str
    color: tuple[int, int, int]


@dataclass(frozen=True)
class Role:
    id: str
    label: str
    color: tuple[int, int, int]


@dataclass(frozen=True)
class Aoi:
    """Static polygonal region of the working area, normalized to [0,1]^2."""

    id: str
    label: str
    polygon: tuple[tuple[float, float], ...]
    color: tuple[int, int, int]


@dataclass(frozen=True)
class SourceDescriptor:
    kind: str
    path: str
    time_offset: float


@dataclass(frozen=True)
class SegmentationConfig:
    penalty_beta: float = 10.0
    bin_width: float = 1.0
    gap_threshold: float = 1.5
    similarity_threshold: float = 0.5
    min_segment_bins: int = 2
    signal_kind: str = "attention"


@dataclass(frozen=True)
class TopicSegment:
    """One refined discussion phase. Segments tile the session span."""

    id: str
    span: TimeSpan
    title: str
    origin: str  # "initial" | "refined"
    marked: bool = False


@dataclass(frozen=True)
class Quote:
    utterance_id: str
    rendered: str


@dataclass(frozen=True)
class HeatmapOverlay:
    kind: str  # "attention" | "activity"
    span: TimeSpan


@dataclass(frozen=True)
class Screenshot:
    image_path: str
    crop: tuple[int, int, int, int]  # x, y, w, h in source-image pixels
    heatmap_overlay: Optional[HeatmapOverlay] = None


@dataclass(frozen=True)
class CardStats:
    speaking_by_role: dict[str, float]
    attention_by_aoi: dict[str, float]
    activity_by_aoi: dict[str, float]


@dataclass(frozen=True)
class TopicCard:
    """Authored summary of one topic segment."""

    segment_id: str
    title: str
    quotes: tuple[Quote, ...]
    notes: tuple[str, ...]
    screenshots: tuple[Screenshot, ...]
    stats: Optional[CardStats]
    marked: bool


@dataclass(frozen=True)
class CardContent:
    """Persisted authored payload of a card (title/marked live on the segment)."""

    segment_id: str
    quotes: tuple[Quote, ...] = ()
    notes: tuple[str, ...] = ()
    screenshots: tuple[Screenshot, ...] = ()
    title_source: str = "default"  # "default" | "provider" | "fallback" | "user"


@dataclass(frozen=True)
class NoteEvent:
    author: str
    t: float
    kind: str  # "added" | "removed" | "mixed"
    added_lines: tuple[str, ...]
    removed_lines: tuple[str, ...]


@dataclass(frozen=True)
class AuthoringState:
    segments: tuple[TopicSegment, ...] = ()
    cards: tuple[CardContent, ...] = ()
    mutation_log: tuple[dict, ...] = ()
    version: int = 0

    def segment(self, segment_id: str) -> TopicSegment:
        for s in self.segments:
            if s.id == segment_id:
                return s
        from .errors import NotFoundError

        raise NotFoundError(f"unknown segment id: {segment_id}")

    def card(self, segment_id: str) -> CardContent:
        for c in self.cards:
            if c.segment_id == segment_id:
                return c
        return CardContent(segment_id=segment_id)


@dataclass(frozen=True)
class WorkshopProject:
    id: str
    title: str
    session_start: datetime
    duration: float
    participants: tuple[Participant, ...]
    roles: tuple[Role, ...]
    aois: tuple[Aoi, ...]
    sources: tuple[SourceDescriptor, ...]
    segmentation_config: SegmentationConfig
    authoring: AuthoringState
    working_area_aspect: Optional[float] = None
    base_dir: Optional[Path] = None  # directory of the manifest, not serialized

    def participant(self, pid: str) -> Participant:
        for p in self.participants:
            if p.id == pid:
                return p
        from .errors import NotFoundError

        raise NotFoundError(f"unknown participant id: {pid}")

    def role(self, rid: str) -> Role:
        for r in self.roles:
            if r.id == rid:
                return r
        from .errors import NotFoundError

        raise NotFoundError(f"unknown role id: {rid}")

    def sources_of(self, kind: str) -> tuple[SourceDescriptor, ...]:
        return tuple(s for s in self.sources if s.kind == kind)

    def source_path(self, src: SourceDescriptor) -> Path:
        p = Path(src.path)
        if not p.is_absolute() and self.base_dir is not None:
            p = self.base_dir / p
        return p

    def with_authoring(self, authoring: AuthoringState) -> "WorkshopProject":
        return replace(self, authoring=authoring)


# ---------------------------------------------------------------------------
# Geometry validation
# ---------------------------------------------------------------------------

def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a, b, p) -> bool:
    # p collinear with a-b and within the bounding box
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def _segments_cross(p1, p2, q1, q2) -> bool:
    """True when segments p1-p2 and q1-q2 intersect anywhere."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True
    if d1 == 0 and _on_segment(q1, q2, p1):
        return True
    if d2 == 0 and _on_segment(q1, q2, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, q1):
        return True
    if d4 == 0 and _on_segment(p1, p2, q2):
        return True
    return False


def polygon_is_simple(polygon) -> bool:
    """Non-self-intersecting check over all non-adjacent edge pairs."""
    n = len(polygon)
    edges = [(polygon[i], polygon[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            if adjacent:
                continue
            if _segments_cross(*edges[i], *edges[j]):
                return False
    return True


# ---------------------------------------------------------------------------
# Manifest reading: a strict dict walk with field-path errors
# ---------------------------------------------------------------------------

def _require(obj: dict, ctx: str, keys: set[str], optional: set[str] = frozenset()):
    if not isinstance(obj, dict):
        raise ValidationError(ctx, f"expected object, got {type(obj).__name__}")
    unknown = set(obj) - keys - optional
    if unknown:
        raise ValidationError(ctx, f"unknown field(s): {', '.join(sorted(unknown))}")
    missing = keys - set(obj)
    if missing:
        raise ValidationError(ctx, f"missing field(s): {', '.join(sorted(missing))}")


def _string(v, ctx: str, allow_empty=False) -> str:
    if not isinstance(v, str):
        raise ValidationError(ctx, f"expected string, got {type(v).__name__}")
    if not allow_empty and not v:
        raise ValidationError(ctx, "must be non-empty")
    return v


def _number(v, ctx: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(ctx, f"expected number, got {type(v).__name__}")
    f = float(v)
    if not math.isfinite(f):
        raise ValidationError(ctx, "must be finite")
    return f


def _integer(v, ctx: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(ctx, f"expected integer, got {type(v).__name__}")
    return v


def _boolean(v, ctx: str) -> bool:
    if not isinstance(v, bool):
        raise ValidationError(ctx, f"expected boolean, got {type(v).__name__}")
    return v


def _color(v, ctx: str) -> tuple[int, int, int]:
    if not isinstance(v, list) or len(v) != 3:
        raise ValidationError(ctx, "expected [r, g, b]")
    out = []
    for i, ch in enumerate(v):
        c = _integer(ch, f"{ctx}[{i}]")
        if not 0 <= c <= 255:
            raise ValidationError(f"{ctx}[{i}]", "channel must be in [0, 255]")
        out.append(c)
    return tuple(out)


def _timespan(obj, ctx: str, duration: float) -> TimeSpan:
    _require(obj, ctx, {"start", "end"})
    start = _number(obj["start"], f"{ctx}.start")
    end = _number(obj["end"], f"{ctx}.end")
    if not (0.0 <= start < end <= duration):
        raise ValidationError(ctx, f"must satisfy 0 <= start < end <= {duration}")
    return TimeSpan(start, end)


def _participant(obj, ctx: str) -> Participant:
    _require(obj, ctx, {"id", "display_name", "role_id", "color"})
    return Participant(
        id=_string(obj["id"], f"{ctx}.id"),
        display_name=_string(obj["display_name"], f"{ctx}.display_name"),
        role_id=_string(obj["role_id"], f"{ctx}.role_id"),
        color=_color(obj["color"], f"{ctx}.color"),
    )


def _role(obj, ctx: str) -> Role:
    _require(obj, ctx, {"id", "label", "color"})
    return Role(
        id=_string(obj["id"], f"{ctx}.id"),
        label=_string(obj["label"], f"{ctx}.label"),
        color=_color(obj["color"], f"{ctx}.color"),
    )


def _aoi(obj, ctx: str) -> Aoi:
    _require(obj, ctx, {"id", "label", "polygon", "color"})
    aoi_id = _string(obj["id"], f"{ctx}.id")
    poly_raw = obj["polygon"]
    if not isinstance(poly_raw, list) or len(poly_raw) < 3:
        raise ValidationError(f"{ctx}.polygon", f"AOI '{aoi_id}' needs >= 3 vertices")
    vertices = []
    for i, pt in enumerate(poly_raw):
        if not isinstance(pt, list) or len(pt) != 2:
            raise ValidationError(f"{ctx}.polygon[{i}]", "expected [x, y]")
        x = _number(pt[0], f"{ctx}.polygon[{i}][0]")
        y = _number(pt[1], f"{ctx}.polygon[{i}][1]")
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ValidationError(
                f"{ctx}.polygon[{i}]",
                f"AOI '{aoi_id}' vertex ({x}, {y}) outside [0,1]^2",
            )
        vertices.append((x, y))
    if not polygon_is_simple(vertices):
        raise ValidationError(f"{ctx}.polygon", f"AOI '{aoi_id}' polygon self-intersects")
    return Aoi(id=aoi_id, label=_string(obj["label"], f"{ctx}.label"),
               polygon=tuple(vertices), color=_color(obj["color"], f"{ctx}.color"))


def _source(obj, ctx: str) -> SourceDescriptor:
    _require(obj, ctx, {"kind", "path", "time_offset"})
    kind = _string(obj["kind"], f"{ctx}.kind")
    if kind not in SOURCE_KINDS:
        raise ValidationError(f"{ctx}.kind", f"must be one of {SOURCE_KINDS}")
    return SourceDescriptor(
        kind=kind,
        path=_string(obj["path"], f"{ctx}.path"),
        time_offset=_number(obj["time_offset"], f"{ctx}.time_offset"),
    )


def _seg_config(obj, ctx: str) -> SegmentationConfig:
    _require(obj, ctx, {"penalty_beta", "bin_width", "gap_threshold",
                        "similarity_threshold", "min_segment_bins", "signal_kind"})
    beta = _number(obj["penalty_beta"], f"{ctx}.penalty_beta")
    if beta <= 0:
        raise ValidationError(f"{ctx}.penalty_beta", "must be > 0")
    bin_width = _number(obj["bin_width"], f"{ctx}.bin_width")
    if bin_width <= 0:
        raise ValidationError(f"{ctx}.bin_width", "must be > 0")
    gap = _number(obj["gap_threshold"], f"{ctx}.gap_threshold")
    if gap <= 0:
        raise ValidationError(f"{ctx}.gap_threshold", "must be > 0")
    sim = _number(obj["similarity_threshold"], f"{ctx}.similarity_threshold")
    if not -1.0 <= sim <= 1.0:
        raise ValidationError(f"{ctx}.similarity_threshold", "must be in [-1, 1]")
    min_bins = _integer(obj["min_segment_bins"], f"{ctx}.min_segment_bins")
    if min_bins < 1:
        raise ValidationError(f"{ctx}.min_segment_bins", "must be >= 1")
    signal = _string(obj["signal_kind"], f"{ctx}.signal_kind")
    if signal not in SIGNAL_KINDS:
        raise ValidationError(f"{ctx}.signal_kind", f"must be one of {SIGNAL_KINDS}")
    return SegmentationConfig(beta, bin_width, gap, sim, min_bins, signal)


def _quote(obj, ctx: str) -> Quote:
    _require(obj, ctx, {"utterance_id", "rendered"})
    uid = _string(obj["utterance_id"], f"{ctx}.utterance_id")
    rendered = _string(obj["rendered"], f"{ctx}.rendered")
    if not rendered.startswith(uid):
        raise ValidationError(f"{ctx}.rendered", "must begin with the utterance identifier")
    return Quote(utterance_id=uid, rendered=rendered)


def _screenshot(obj, ctx: str, duration: float) -> Screenshot:
    _require(obj, ctx, {"image_path", "crop"}, optional={"heatmap_overlay"})
    crop_raw = obj["crop"]
    if not isinstance(crop_raw, list) or len(crop_raw) != 4:
        raise ValidationError(f"{ctx}.crop", "expected [x, y, w, h]")
    crop = tuple(_integer(c, f"{ctx}.crop[{i}]") for i, c in enumerate(crop_raw))
    if crop[2] <= 0 or crop[3] <= 0 or crop[0] < 0 or crop[1] < 0:
        raise ValidationError(f"{ctx}.crop", "must have x, y >= 0 and w, h > 0")
    overlay = None
    if obj.get("heatmap_overlay") is not None:
        o = obj["heatmap_overlay"]
        _require(o, f"{ctx}.heatmap_overlay", {"kind", "start", "end"})
        kind = _string(o["kind"], f"{ctx}.heatmap_overlay.kind")
        if kind not in SIGNAL_KINDS:
            raise ValidationError(f"{ctx}.heatmap_overlay.kind", f"must be one of {SIGNAL_KINDS}")
        overlay = HeatmapOverlay(
            kind=kind,
            span=_timespan({"start": o["start"], "end": o["end"]},
                           f"{ctx}.heatmap_overlay", duration),
        )
    return Screenshot(image_path=_string(obj["image_path"], f"{ctx}.image_path"),
                      crop=crop, heatmap_overlay=overlay)


def _segment(obj, ctx: str, duration: float) -> TopicSegment:
    _require(obj, ctx, {"id", "start", "end", "title", "origin", "marked"})
    origin = _string(obj["origin"], f"{ctx}.origin")
    if origin not in SEGMENT_ORIGINS:
        raise ValidationError(f"{ctx}.origin", f"must be one of {SEGMENT_ORIGINS}")
    return TopicSegment(
        id=_string(obj["id"], f"{ctx}.id"),
        span=_timespan({"start": obj["start"], "end": obj["end"]}, ctx, duration),
        title=_string(obj["title"], f"{ctx}.title", allow_empty=True),
        origin=origin,
        marked=_boolean(obj["marked"], f"{ctx}.marked"),
    )


def _card(obj, ctx: str, duration: float) -> CardContent:
    _require(obj, ctx, {"segment_id", "quotes", "notes", "screenshots", "title_source"})
    title_source = _string(obj["title_source"], f"{ctx}.title_source")
    if title_source not in ("default", "provider", "fallback", "user"):
        raise ValidationError(f"{ctx}.title_source", "unknown title source")
    quotes = tuple(_quote(q, f"{ctx}.quotes[{i}]") for i, q in enumerate(obj["quotes"]))
    notes = tuple(_string(n, f"{ctx}.notes[{i}]", allow_empty=True)
                  for i, n in enumerate(obj["notes"]))
    shots = tuple(_screenshot(s, f"{ctx}.screenshots[{i}]", duration)
                  for i, s in enumerate(obj["screenshots"]))
    return CardContent(segment_id=_string(obj["segment_id"], f"{ctx}.segment_id"),
                       quotes=quotes, notes=notes, screenshots=shots,
                       title_source=title_source)


def _authoring(obj, ctx: str, duration: float) -> AuthoringState:
    _require(obj, ctx, {"segments", "cards", "mutation_log", "version"})
    segments = tuple(_segment(s, f"{ctx}.segments[{i}]", duration)
                     for i, s in enumerate(obj["segments"]))
    cards = tuple(_card(c, f"{ctx}.cards[{i}]", duration)
                  for i, c in enumerate(obj["cards"]))
    log = obj["mutation_log"]
    if not isinstance(log, list) or not all(isinstance(e, dict) for e in log):
        raise ValidationError(f"{ctx}.mutation_log", "expected a list of objects")
    version = _integer(obj["version"], f"{ctx}.version")
    if version < 0:
        raise ValidationError(f"{ctx}.version", "must be >= 0")

    seg_ids = [s.id for s in segments]
    if len(set(seg_ids)) != len(seg_ids):
        raise ValidationError(f"{ctx}.segments", "segment ids must be unique")
    for i, c in enumerate(cards):
        if c.segment_id not in seg_ids:
            raise ValidationError(f"{ctx}.cards[{i}].segment_id",
                                  f"references unknown segment '{c.segment_id}'")
    starts = [s.span.start for s in segments]
    if starts != sorted(starts):
        raise ValidationError(f"{ctx}.segments", "segments must be ordered by start")
    return AuthoringState(segments=segments, cards=cards,
                          mutation_log=tuple(log), version=version)


def project_from_dict(doc: dict, base_dir: Optional[Path] = None,
                      check_sources: bool = True) -> WorkshopProject:
    """Validate a manifest dict into a :class:`WorkshopProject`.

    Raises :class:`ValidationError` with the offending field path, or
    :class:`MissingSourceError` when a referenced source file is absent.
    """
    _require(doc, "project", {"version", "id", "title", "session_start", "duration",
                              "participants", "roles", "aois", "sources",
                              "segmentation_config", "authoring"},
             optional={"working_area_aspect"})
    if doc["version"] != MANIFEST_VERSION:
        raise ValidationError("project.version",
                              f"unsupported manifest version {doc['version']!r}")
    duration = _number(doc["duration"], "project.duration")
    if duration <= 0:
        raise ValidationError("project.duration", "must be > 0")
    try:
        session_start = datetime.fromisoformat(_string(doc["session_start"],
                                                       "project.session_start"))
    except ValueError as e:
        raise ValidationError("project.session_start", f"not ISO 8601: {e}")

    roles = tuple(_role(r, f"project.roles[{i}]") for i, r in enumerate(doc["roles"]))
    role_ids = [r.id for r in roles]
    if len(set(role_ids)) != len(role_ids):
        raise ValidationError("project.roles", "role ids must be unique")

    participants = tuple(_participant(p, f"project.participants[{i}]")
                         for i, p in enumerate(doc["participants"]))
    pids = [p.id for p in participants]
    if len(set(pids)) != len(pids):
        raise ValidationError("project.participants", "participant ids must be unique")
    for i, p in enumerate(participants):
        if p.role_id not in role_ids:
            raise ValidationError(f"project.participants[{i}].role_id",
                                  f"references unknown role '{p.role_id}'")

    aois = tuple(_aoi(a, f"project.aois[{i}]") for i, a in enumerate(doc["aois"]))
    aoi_ids = [a.id for a in aois]
    if len(set(aoi_ids)) != len(aoi_ids):
        raise ValidationError("project.aois", "AOI ids must be unique")

    sources = tuple(_source(s, f"project.sources[{i}]")
                    for i, s in enumerate(doc["sources"]))

    aspect = None
    if doc.get("working_area_aspect") is not None:
        aspect = _number(doc["working_area_aspect"], "project.working_area_aspect")
        if aspect <= 0:
            raise ValidationError("project.working_area_aspect", "must be > 0")

    project = WorkshopProject(
        id=_string(doc["id"], "project.id"),
        title=_string(doc["title"], "project.title"),
        session_start=session_start,
        duration=duration,
        participants=participants,
        roles=roles,
        aois=aois,
        sources=sources,
        segmentation_config=_seg_config(doc["segmentation_config"],
                                        "project.segmentation_config"),
        authoring=_authoring(doc["authoring"], "project.authoring", duration),
        working_area_aspect=aspect,
        base_dir=base_dir,
    )

    if check_sources:
        for src in project.sources:
            p = project.source_path(src)
            if not p.exists():
                raise MissingSourceError(p)
    return project


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def project_to_dict(project: WorkshopProject) -> dict:
    def span(s: TimeSpan) -> dict:
        return {"start": s.start, "end": s.end}

    doc: dict[str, Any] = {
        "version": MANIFEST_VERSION,
        "id": project.id,
        "title": project.title,
        "session_start": project.session_start.isoformat(),
        "duration": project.duration,
        "participants": [
            {"id": p.id, "display_name": p.display_name, "role_id": p.role_id,
             "color": list(p.color)}
            for p in project.participants
        ],
        "roles": [{"id": r.id, "label": r.label, "color": list(r.color)}
                  for r in project.roles],
        "aois": [{"id": a.id, "label": a.label,
                  "polygon": [[x, y] for x, y in a.polygon], "color": list(a.color)}
                 for a in project.aois],
        "sources": [{"kind": s.kind, "path": s.path, "time_offset": s.time_offset}
                    for s in project.sources],
        "segmentation_config": {
            "penalty_beta": project.segmentation_config.penalty_beta,
            "bin_width": project.segmentation_config.bin_width,
            "gap_threshold": project.segmentation_config.gap_threshold,
            "similarity_threshold": project.segmentation_config.similarity_threshold,
            "min_segment_bins": project.segmentation_config.min_segment_bins,
            "signal_kind": project.segmentation_config.signal_kind,
        },
        "authoring": {
            "segments": [
                {"id": s.id, "start": s.span.start, "end": s.span.end,
                 "title": s.title, "origin": s.origin, "marked": s.marked}
                for s in project.authoring.segments
            ],
            "cards": [
                {
                    "segment_id": c.segment_id,
                    "quotes": [{"utterance_id": q.utterance_id, "rendered": q.rendered}
                               for q in c.quotes],
                    "notes": list(c.notes),
                    "screenshots": [
                        {
                            "image_path": sc.image_path,
                            "crop": list(sc.crop),
                            "heatmap_overlay": None if sc.heatmap_overlay is None else {
                                "kind": sc.heatmap_overlay.kind,
                                "start": sc.heatmap_overlay.span.start,
                                "end": sc.heatmap_overlay.span.end,
                            },
                        }
                        for sc in c.screenshots
                    ],
                    "title_source": c.title_source,
                }
                for c in project.authoring.cards
            ],
            "mutation_log": [dict(e) for e in project.authoring.mutation_log],
            "version": project.authoring.version,
        },
    }
    if project.working_area_aspect is not None:
        doc["working_area_aspect"] = project.working_area_aspect
    return doc


def load_project(path) -> WorkshopProject:
    """Load and fully validate a ``project.json`` manifest."""
    path = Path(path)
    if path.is_dir():
        path = path / "project.json"
    if not path.exists():
        raise MissingSourceError(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValidationError("project", f"manifest is not valid JSON: {e}")
    return project_from_dict(doc, base_dir=path.parent)


def save_project(project: WorkshopProject, path) -> None:
    """Atomically write the manifest: temp file in the same directory, then rename."""
    path = Path(path)
    if path.is_dir():
        path = path / "project.json"
    payload = json.dumps(project_to_dict(project), indent=2, ensure_ascii=False) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".project-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
