"""Session assembly: parse all sources of a project into synchronized streams
and derive fixations, scarfs, series, segments, and statistics.

Gaze sources are per participant; the file stem must equal the participant
id (e.g. ``gaze/p1.csv`` belongs to participant ``p1``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from . import activity as activity_mod
from . import attention as attention_mod
from . import notes as notes_mod
from . import segmentation as segmentation_mod
from .cards import card_statistics, generate_titles
from .errors import ValidationError
from .ingest import (GazeSample, GrayFrame, LandmarkFrame, NoteSnapshot,
                     Utterance, load_note_snapshots, parse_frames, parse_gaze,
                     parse_landmarks, parse_transcript)
from .model import CardContent, CardStats, NoteEvent, TimeSpan, WorkshopProject


@dataclass
class SessionData:
    project: WorkshopProject
    utterances: list[Utterance] = field(default_factory=list)
    gaze: dict[str, list[GazeSample]] = field(default_factory=dict)
    fixations: dict[str, list] = field(default_factory=dict)
    scarfs: dict[str, list] = field(default_factory=dict)
    landmarks: list[LandmarkFrame] = field(default_factory=list)
    frames: list[GrayFrame] = field(default_factory=list)
    snapshots: list[NoteSnapshot] = field(default_factory=list)
    note_events: list[NoteEvent] = field(default_factory=list)

    def scarf_rows(self) -> list[list]:
        """Per-participant scarf rows in manifest participant order."""
        return [self.scarfs[p.id] for p in self.project.participants
                if p.id in self.scarfs]


def load_session(project: WorkshopProject) -> SessionData:
    """Parse every source named in the manifest into one synchronized bundle."""
    data = SessionData(project=project)
    participant_ids = {p.id for p in project.participants}

    for src in project.sources:
        path = project.source_path(src)
        if src.kind == "transcript":
            data.utterances.extend(
                parse_transcript(path, src.time_offset, known_speakers=participant_ids))
        elif src.kind == "gaze":
            pid = Path(src.path).stem
            if pid not in participant_ids:
                raise ValidationError(
                    "sources", f"gaze file stem '{pid}' is not a participant id")
            data.gaze[pid] = parse_gaze(path, pid, src.time_offset)
        elif src.kind == "landmarks":
            data.landmarks.extend(parse_landmarks(path, src.time_offset))
        elif src.kind == "frames":
            data.frames.extend(parse_frames(path, src.time_offset))
        elif src.kind == "notes":
            data.snapshots.extend(
                load_note_snapshots(path, project.session_start, src.time_offset))
        # "embeddings" sources are consumed lazily by the segmentation step

    data.utterances.sort(key=lambda u: (u.span.start, u.span.end, u.id))
    data.landmarks.sort(key=lambda f: f.t)
    data.frames.sort(key=lambda f: f.t)

    for pid, samples in data.gaze.items():
        fx = attention_mod.detect_fixations(samples)
        data.fixations[pid] = fx
        data.scarfs[pid] = attention_mod.scarf_sequence(
            fx, project.aois, project.duration, participant_id=pid)
    data.note_events = notes_mod.note_events(data.snapshots)
    return data


def attention_series(data: SessionData):
    rows = data.scarf_rows()
    if not rows:
        return None
    return attention_mod.attention_series(rows, data.project.aois,
                                          data.project.segmentation_config,
                                          data.project.duration)


def activity_series(data: SessionData):
    if not data.frames:
        return None
    return activity_mod.activity_series(data.frames, data.landmarks,
                                        data.project.aois,
                                        data.project.segmentation_config,
                                        data.project.duration)


def series_for(data: SessionData, kind: Optional[str] = None):
    kind = kind or data.project.segmentation_config.signal_kind
    series = attention_series(data) if kind == "attention" else activity_series(data)
    if series is None:
        raise ValidationError(
            "segmentation_config.signal_kind",
            f"no sources available to build the '{kind}' series")
    return series


def segment_text(data: SessionData, span: TimeSpan) -> str:
    """Dialogue text of one segment: utterances assigned by start time."""
    parts = [u.text for u in data.utterances
             if span.start <= u.span.start < span.end]
    return " ".join(parts)


def run_segmentation(data: SessionData, embed_provider, title_provider,
                     signal_kind: Optional[str] = None,
                     beta: Optional[float] = None) -> WorkshopProject:
    """Two-step segmentation + title generation; returns the updated project.

    Replaces the authoring state (segments, cards, log) because prior
    authoring refers to segment ids that no longer exist.
    """
    project = data.project
    config = project.segmentation_config
    if signal_kind is not None:
        config = replace(config, signal_kind=signal_kind)
    if beta is not None:
        config = replace(config, penalty_beta=beta)
    series = series_for(data, config.signal_kind)
    embeddings_sources = project.sources_of("embeddings")
    if embeddings_sources:
        from .providers import FileEmbeddingProvider

        embed_provider = FileEmbeddingProvider(
            project.source_path(embeddings_sources[0]))
    segments, _ = segmentation_mod.segment_session(
        series, data.utterances, config, embed_provider, project.duration)
    authoring = replace(project.authoring, segments=tuple(segments),
                        cards=tuple(CardContent(segment_id=s.id) for s in segments),
                        mutation_log=(), version=0)
    project = replace(project, segmentation_config=config).with_authoring(authoring)
    texts = {s.id: segment_text(data, s.span) for s in segments}
    data.project = generate_titles(project, texts, title_provider)
    return data.project


def all_card_stats(data: SessionData) -> dict[str, CardStats]:
    act = activity_series(data)
    rows = data.scarf_rows()
    return {
        seg.id: card_statistics(seg, data.utterances, rows, act, data.project)
        for seg in data.project.authoring.segments
    }
