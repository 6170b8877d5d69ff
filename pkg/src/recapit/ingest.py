"""Parsers for raw source files and the working-area homography.

Every parser is a pure function over bytes: identical input files produce
structurally identical outputs. Per-source time offsets from the manifest
are plain translations applied at parse time, so all downstream streams
share the seconds-from-session-start time base.

Wire formats
    transcript  line-delimited JSON records {id, speaker, start, end, text}
    gaze        CSV with header ``t,x,y,valid``
    frames      binary PGM (P5) files plus an index CSV ``filename,t``
    landmarks   CSV lines ``t,x1,y1,x2,y2,...`` (pairs may be empty)
    notes       directory of ``<author>__<ISO8601>.txt`` snapshots
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import MissingSourceError, ParseError, ValidationError
from .model import TimeSpan

GAZE_JITTER_TOLERANCE = 1e-3  # seconds of permitted backward jitter


@dataclass(frozen=True)
class Utterance:
    id: str
    speaker_id: str
    span: TimeSpan
    text: str


@dataclass(frozen=True)
class GazeSample:
    participant_id: str
    t: float
    x: float
    y: float
    valid: bool


@dataclass(frozen=True)
class LandmarkFrame:
    t: float
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class GrayFrame:
    t: float
    width: int
    height: int
    pixels: np.ndarray  # uint8, shape (height, width)


@dataclass(frozen=True)
class NoteSnapshot:
    author: str
    t: float
    text: str


class Homography:
    """3x3 projective map from camera pixels to working-area coordinates."""

    def __init__(self, m):
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise ValidationError("homography", "expected a 3x3 matrix")
        if abs(np.linalg.det(m)) <= 1e-12:
            raise ValidationError("homography", "matrix is not invertible")
        self.m = m

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))


def apply_homography(h: Homography, p) -> tuple[float, float]:
    """Map point ``p`` through ``h`` in homogeneous coordinates.

    Raises ValueError when the point maps to infinity (|w| below 1e-9).
    """
    x, y = p
    hx, hy, hw = h.m @ np.array([x, y, 1.0])
    if abs(hw) < 1e-9:
        raise ValueError(f"point ({x}, {y}) maps to infinity under homography")
    return (hx / hw, hy / hw)


# ---------------------------------------------------------------------------
# Transcript
# ---------------------------------------------------------------------------

def parse_transcript(path, offset: float, known_speakers=None) -> list[Utterance]:
    """Parse line-delimited utterance records, applying ``offset`` seconds.

    Output is sorted by start time; ids must be unique; speaker ids are
    checked against ``known_speakers`` when given.
    """
    path = Path(path)
    if not path.exists():
        raise MissingSourceError(path)
    utterances = []
    seen_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path.name}:{lineno}", f"malformed record: {e}")
            if not isinstance(rec, dict):
                raise ParseError(f"{path.name}:{lineno}", "record must be an object")
            missing = {"id", "speaker", "start", "end", "text"} - set(rec)
            if missing:
                raise ParseError(f"{path.name}:{lineno}",
                                 f"missing field(s): {', '.join(sorted(missing))}")
            uid = rec["id"]
            if uid in seen_ids:
                raise ParseError(f"{path.name}:{lineno}", f"duplicate utterance id '{uid}'")
            seen_ids.add(uid)
            speaker = rec["speaker"]
            if known_speakers is not None and speaker not in known_speakers:
                raise ParseError(f"{path.name}:{lineno}", f"unknown speaker id '{speaker}'")
            try:
                start = float(rec["start"]) + offset
                end = float(rec["end"]) + offset
            except (TypeError, ValueError):
                raise ParseError(f"{path.name}:{lineno}", "start/end must be numbers")
            if not (math.isfinite(start) and math.isfinite(end)) or end <= start:
                raise ParseError(f"{path.name}:{lineno}", "need finite start < end")
            text = rec["text"]
            if not isinstance(text, str) or not text.strip():
                raise ParseError(f"{path.name}:{lineno}", "text must be non-empty")
            utterances.append(Utterance(id=str(uid), speaker_id=str(speaker),
                                        span=TimeSpan(start, end), text=text.strip()))
    utterances.sort(key=lambda u: (u.span.start, u.span.end, u.id))
    return utterances


# ---------------------------------------------------------------------------
# Gaze
# ---------------------------------------------------------------------------

_TRUE_TOKENS = {"1", "true", "t", "yes"}
_FALSE_TOKENS = {"0", "false", "f", "no"}


def parse_gaze(path, participant_id: str, offset: float) -> list[GazeSample]:
    """Parse one participant's gaze CSV (header ``t,x,y,valid``).

    Invalid rows are retained with valid=False; rows whose coordinates are
    non-finite are coerced to invalid. Timestamps may jitter backwards by at
    most 1 ms; anything larger is an error.
    """
    path = Path(path)
    if not path.exists():
        raise MissingSourceError(path)
    samples = []
    last_t = None
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if [c.strip() for c in header.split(",")] != ["t", "x", "y", "valid"]:
            raise ParseError(f"{path.name}:1", f"expected header 't,x,y,valid', got {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cols = line.split(",")
            if len(cols) != 4:
                raise ParseError(f"{path.name}:{lineno}", f"expected 4 columns, got {len(cols)}")
            try:
                t = float(cols[0])
            except ValueError:
                raise ParseError(f"{path.name}:{lineno}", f"bad timestamp {cols[0]!r}")
            vtok = cols[3].strip().lower()
            if vtok in _TRUE_TOKENS:
                valid = True
            elif vtok in _FALSE_TOKENS:
                valid = False
            else:
                raise ParseError(f"{path.name}:{lineno}", f"bad valid flag {cols[3]!r}")
            try:
                x = float(cols[1])
                y = float(cols[2])
            except ValueError:
                x, y, valid = math.nan, math.nan, False
            if valid and not (math.isfinite(x) and math.isfinite(y)):
                valid = False
            if last_t is not None and t < last_t - GAZE_JITTER_TOLERANCE:
                raise ParseError(f"{path.name}:{lineno}",
                                 f"non-monotonic timestamp {t} after {last_t}")
            last_t = max(t, last_t) if last_t is not None else t
            samples.append(GazeSample(participant_id=participant_id,
                                      t=t + offset, x=x, y=y, valid=valid))
    samples.sort(key=lambda s: s.t)
    return samples


# ---------------------------------------------------------------------------
# Landmarks
# ---------------------------------------------------------------------------

def parse_landmarks(path, offset: float) -> list[LandmarkFrame]:
    """Parse hand-landmark lines ``t,x1,y1,...``; any number of pairs >= 0."""
    path = Path(path)
    if not path.exists():
        raise MissingSourceError(path)
    frames = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cols = line.split(",")
            try:
                t = float(cols[0])
            except ValueError:
                raise ParseError(f"{path.name}:{lineno}", f"bad timestamp {cols[0]!r}")
            rest = [c for c in cols[1:] if c.strip() != ""]
            if len(rest) % 2 != 0:
                raise ParseError(f"{path.name}:{lineno}", "coordinates must come in x,y pairs")
            pts = []
            for i in range(0, len(rest), 2):
                try:
                    x = float(rest[i])
                    y = float(rest[i + 1])
                except ValueError:
                    raise ParseError(f"{path.name}:{lineno}", "bad coordinate value")
                if not (-0.5 <= x <= 1.5 and -0.5 <= y <= 1.5):
                    raise ParseError(f"{path.name}:{lineno}",
                                     f"landmark ({x}, {y}) outside [-0.5, 1.5]^2")
                pts.append((x, y))
            frames.append(LandmarkFrame(t=t + offset, points=tuple(pts)))
    frames.sort(key=lambda f: f.t)
    return frames


# ---------------------------------------------------------------------------
# Frames (PGM P5 + index)
# ---------------------------------------------------------------------------

def read_pgm(path) -> np.ndarray:
    """Read a binary PGM (P5, 8-bit) into a (height, width) uint8 array."""
    path = Path(path)
    if not path.exists():
        raise MissingSourceError(path)
    data = path.read_bytes()
    pos = 0

    def token():
        nonlocal pos
        while pos < len(data):
            if data[pos:pos + 1].isspace():
                pos += 1
            elif data[pos:pos + 1] == b"#":
                while pos < len(data) and data[pos] != 0x0A:
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        return data[start:pos]

    magic = token()
    if magic != b"P5":
        raise ParseError(path.name, f"not a P5 PGM (magic {magic!r})")
    try:
        width = int(token())
        height = int(token())
        maxval = int(token())
    except ValueError:
        raise ParseError(path.name, "malformed PGM header")
    if maxval != 255:
        raise ParseError(path.name, f"only 8-bit PGM supported, maxval={maxval}")
    pos += 1  # single whitespace after maxval
    raster = data[pos:pos + width * height]
    if len(raster) != width * height:
        raise ParseError(path.name, "truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width)


def write_pgm(path, image: np.ndarray) -> None:
    """Write a (height, width) image to binary PGM.

    Float inputs are treated as [0, 1] and scaled to 8 bits.
    """
    image = np.asarray(image)
    if image.dtype != np.uint8:
        image = np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def parse_frames(index_path, offset: float) -> list[GrayFrame]:
    """Load grayscale frames listed in an index CSV ``filename,t``.

    All frames in one source must share dimensions.
    """
    index_path = Path(index_path)
    if not index_path.exists():
        raise MissingSourceError(index_path)
    base = index_path.parent
    frames = []
    dims = None
    with open(index_path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if [c.strip() for c in header.split(",")] != ["filename", "t"]:
            raise ParseError(f"{index_path.name}:1",
                             f"expected header 'filename,t', got {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            name, _, t_raw = line.rpartition(",")
            if not name:
                raise ParseError(f"{index_path.name}:{lineno}", "expected 'filename,t'")
            try:
                t = float(t_raw)
            except ValueError:
                raise ParseError(f"{index_path.name}:{lineno}", f"bad timestamp {t_raw!r}")
            pixels = read_pgm(base / name)
            if dims is None:
                dims = pixels.shape
            elif pixels.shape != dims:
                raise ParseError(f"{index_path.name}:{lineno}",
                                 f"frame dimensions {pixels.shape} differ from {dims}")
            frames.append(GrayFrame(t=t + offset, width=pixels.shape[1],
                                    height=pixels.shape[0], pixels=pixels))
    frames.sort(key=lambda f: f.t)
    return frames


# ---------------------------------------------------------------------------
# Notes snapshots
# ---------------------------------------------------------------------------

_SNAPSHOT_NAME = re.compile(r"^(?P<author>.+?)__(?P<stamp>.+)\.txt$")


def load_note_snapshots(dir_path, session_start: datetime,
                        offset: float) -> list[NoteSnapshot]:
    """Load ``<author>__<ISO8601>.txt`` snapshots from a directory.

    Wall-clock stamps become session time via
    ``(stamp - session_start) + offset``; snapshots are grouped by author
    and sorted by time within each author (authors in first-seen
    alphabetical order).
    """
    dir_path = Path(dir_path)
    if not dir_path.is_dir():
        raise MissingSourceError(dir_path)
    snapshots = []
    for entry in sorted(dir_path.iterdir()):
        if entry.is_dir() or entry.name.startswith("."):
            continue
        m = _SNAPSHOT_NAME.match(entry.name)
        if m is None:
            raise ParseError(entry.name,
                             "expected filename '<author>__<ISO8601 timestamp>.txt'")
        stamp_raw = m.group("stamp").replace("_", ":")
        try:
            stamp = datetime.fromisoformat(stamp_raw)
        except ValueError:
            raise ParseError(entry.name, f"bad timestamp {m.group('stamp')!r}")
        if stamp.tzinfo is None and session_start.tzinfo is not None:
            stamp = stamp.replace(tzinfo=session_start.tzinfo)
        t = (stamp - session_start).total_seconds() + offset
        if t < 0:
            raise ParseError(entry.name, f"snapshot at t={t:.3f}s precedes session start")
        snapshots.append(NoteSnapshot(author=m.group("author"), t=t,
                                      text=entry.read_text(encoding="utf-8")))
    snapshots.sort(key=lambda s: (s.author, s.t))
    return snapshots
