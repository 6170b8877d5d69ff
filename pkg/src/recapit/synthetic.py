"""Deterministic synthetic workshop generator.

Produces a small but complete project directory (manifest plus every source
kind) for demos and end-to-end tests: two participants, three AOIs, a
three-phase session of 180 s whose attention and activity genuinely shift
between areas, a transcript whose vocabulary changes with the phases, hand
landmarks that follow the active area, and two note-taker snapshot streams.
Everything derives from one seeded RNG, so repeated generation is
byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .ingest import write_pgm

DURATION = 180.0
PHASES = ((0.0, 60.0, "sketch"), (60.0, 120.0, "poster"), (120.0, 180.0, "outcome"))
AOI_CENTERS = {"sketch": (0.2, 0.3), "poster": (0.7, 0.3), "outcome": (0.45, 0.75)}
FRAME_W, FRAME_H = 64, 48

# dialogue vocabulary shifts mid-poster-phase (90 s) with no gaze/activity
# change, so the embedding refinement step has real work to do
_VOCAB_SPANS = (
    (0.0, 60.0, ["sketch", "drawing", "pencil", "ideas", "paper", "doodle"]),
    (60.0, 90.0, ["poster", "layout", "colors", "arrange", "glue", "headline"]),
    (90.0, 120.0, ["segmentation", "timeline", "chunks", "episodes", "splits", "phases"]),
    (120.0, 180.0, ["requirements", "summary", "decision", "outcome", "vote", "list"]),
)


def _phase_of(t: float) -> str:
    for lo, hi, name in PHASES:
        if lo <= t < hi:
            return name
    return PHASES[-1][2]


def _vocab_of(t: float) -> list[str]:
    for lo, hi, words in _VOCAB_SPANS:
        if lo <= t < hi:
            return words
    return _VOCAB_SPANS[-1][2]


def _manifest() -> dict:
    return {
        "version": 1,
        "id": "synthetic-workshop",
        "title": "Synthetic design workshop",
        "session_start": "2025-03-14T09:00:00+00:00",
        "duration": DURATION,
        "participants": [
            {"id": "p1", "display_name": "Alice", "role_id": "domain", "color": [204, 102, 0]},
            {"id": "p2", "display_name": "Bo", "role_id": "vis", "color": [0, 102, 204]},
        ],
        "roles": [
            {"id": "domain", "label": "Domain expert", "color": [230, 159, 0]},
            {"id": "vis", "label": "Visualization expert", "color": [86, 180, 233]},
        ],
        "aois": [
            {"id": "sketch", "label": "Sketch area",
             "polygon": [[0.05, 0.1], [0.35, 0.1], [0.35, 0.5], [0.05, 0.5]],
             "color": [0, 158, 115]},
            {"id": "poster", "label": "Poster area",
             "polygon": [[0.55, 0.1], [0.85, 0.1], [0.85, 0.5], [0.55, 0.5]],
             "color": [213, 94, 0]},
            {"id": "outcome", "label": "Outcome list",
             "polygon": [[0.3, 0.6], [0.6, 0.6], [0.6, 0.9], [0.3, 0.9]],
             "color": [204, 121, 167]},
        ],
        "sources": [
            {"kind": "transcript", "path": "transcript.jsonl", "time_offset": 0.0},
            {"kind": "gaze", "path": "gaze/p1.csv", "time_offset": 0.0},
            {"kind": "gaze", "path": "gaze/p2.csv", "time_offset": 0.0},
            {"kind": "frames", "path": "frames/index.csv", "time_offset": 0.0},
            {"kind": "landmarks", "path": "landmarks.csv", "time_offset": 0.0},
            {"kind": "notes", "path": "notes", "time_offset": 0.0},
        ],
        "segmentation_config": {
            "penalty_beta": 10.0,
            "bin_width": 1.0,
            "gap_threshold": 1.5,
            "similarity_threshold": 0.5,
            "min_segment_bins": 2,
            "signal_kind": "attention",
        },
        "authoring": {"segments": [], "cards": [], "mutation_log": [], "version": 0},
        "working_area_aspect": 1.333,
    }


def _write_transcript(dest: Path, rng: np.random.Generator) -> None:
    records = []
    uid = 0
    t = 2.0
    while t < DURATION - 6.0:
        words = _vocab_of(t)
        n_words = int(rng.integers(4, 9))
        text = " ".join(words[int(rng.integers(0, len(words)))] for _ in range(n_words))
        speaker = "p1" if rng.random() < 0.5 else "p2"
        dur = 2.0 + float(rng.random()) * 3.0
        records.append({"id": f"u{uid:03d}", "speaker": speaker,
                        "start": round(t, 3), "end": round(t + dur, 3), "text": text})
        uid += 1
        # small within-topic pauses, a big one when the vocabulary is about to flip
        gap = 0.5 + float(rng.random()) * 0.8
        if _vocab_of(t + dur + gap) is not words:
            gap += 2.5
        t = t + dur + gap
    lines = [json.dumps(r, ensure_ascii=False) for r in records]
    dest.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_gaze(dest: Path, rng: np.random.Generator) -> None:
    rows = ["t,x,y,valid"]
    t = 0.0
    while t < DURATION:
        cx, cy = AOI_CENTERS[_phase_of(t)]
        x = cx + float(rng.normal(0.0, 0.01))
        y = cy + float(rng.normal(0.0, 0.01))
        valid = 1
        if rng.random() < 0.02:  # occasional dropouts break fixation windows
            valid = 0
        rows.append(f"{t:.2f},{x:.5f},{y:.5f},{valid}")
        t = round(t + 0.05, 2)
    dest.write_text("\n".join(rows) + "\n", encoding="utf-8")


def _write_frames(frames_dir: Path, rng: np.random.Generator) -> None:
    frames_dir.mkdir(parents=True, exist_ok=True)
    index = ["filename,t"]
    background = np.full((FRAME_H, FRAME_W), 80, dtype=np.uint8)
    t = 0.0
    i = 0
    while t < DURATION:
        frame = background.copy()
        cx, cy = AOI_CENTERS[_phase_of(t)]
        px = int(cx * FRAME_W)
        py = int(cy * FRAME_H)
        # a bright moving "hand" blob inside the active area
        jitter_x = int(rng.integers(-3, 4))
        jitter_y = int(rng.integers(-3, 4))
        x0 = max(0, min(FRAME_W - 6, px + jitter_x - 3))
        y0 = max(0, min(FRAME_H - 6, py + jitter_y - 3))
        frame[y0:y0 + 6, x0:x0 + 6] = 220
        name = f"frame_{i:04d}.pgm"
        write_pgm(frames_dir / name, frame)
        index.append(f"{name},{t:.2f}")
        i += 1
        t = round(t + 2.0, 2)
    (frames_dir / "index.csv").write_text("\n".join(index) + "\n", encoding="utf-8")


def _write_landmarks(dest: Path, rng: np.random.Generator) -> None:
    lines = []
    t = 0.0
    while t < DURATION:
        cx, cy = AOI_CENTERS[_phase_of(t)]
        x = cx + float(rng.normal(0.0, 0.02))
        y = cy + float(rng.normal(0.0, 0.02))
        lines.append(f"{t:.2f},{x:.5f},{y:.5f}")
        t = round(t + 2.0, 2)
    dest.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_notes(notes_dir: Path) -> None:
    notes_dir.mkdir(parents=True, exist_ok=True)
    snapshots = {
        "mod1": [
            (30, "participants sketch first ideas\n"),
            (75, "participants sketch first ideas\nposter work begins\n"),
            (150, "poster work begins\nrequirements listed on outcome sheet\n"),
        ],
        "mod2": [
            (40, "alice explains her drawing\n"),
            (140, "alice explains her drawing\nbo proposes segmentation of sessions\n"),
        ],
    }
    base = "2025-03-14T09"
    for author, snaps in snapshots.items():
        for offset_s, text in snaps:
            m, s = divmod(offset_s, 60)
            stamp = f"{base}_{m:02d}_{s:02d}+00_00"
            (notes_dir / f"{author}__{stamp}.txt").write_text(text, encoding="utf-8")


def make_workshop(dest) -> Path:
    """Generate the synthetic workshop into ``dest`` and return its path."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20250314)

    manifest = _manifest()
    (dest / "gaze").mkdir(exist_ok=True)
    _write_transcript(dest / "transcript.jsonl", rng)
    _write_gaze(dest / "gaze" / "p1.csv", rng)
    _write_gaze(dest / "gaze" / "p2.csv", rng)
    _write_frames(dest / "frames", rng)
    _write_landmarks(dest / "landmarks.csv", rng)
    _write_notes(dest / "notes")
    (dest / "project.json").write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return dest


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "fixtures/workshop"
    print(f"workshop fixture -> {make_workshop(target)}")
