"""recapit: multimodal workshop analytics.

Ingests transcripts, gaze, working-area frames, hand landmarks, and note
snapshots; segments sessions into topics (PELT change points refined by
dialogue-embedding dissimilarity); derives attention/activity series,
scarf intervals, and heatmaps; and supports topic-card authoring, keyword
filtering, and HTML report export through a CLI and an HTTP service.
"""

from .attention import (Fixation, HeatGrid, MultivariateSeries, ScarfInterval,
                        aoi_hit, attention_heatmap, attention_series,
                        detect_fixations, scarf_sequence,
                        shared_attention_intervals)
from .errors import (ConflictError, MissingSourceError, NotFoundError,
                     ParseError, ProviderError, RecapitError, ValidationError)
from .ingest import (GazeSample, GrayFrame, Homography, LandmarkFrame,
                     NoteSnapshot, Utterance, apply_homography,
                     load_note_snapshots, parse_frames, parse_gaze,
                     parse_landmarks, parse_transcript, read_pgm, write_pgm)
from .model import (Aoi, AuthoringState, CardStats, NoteEvent, Participant,
                    Quote, Role, Screenshot, SegmentationConfig, TimeSpan,
                    TopicCard, TopicSegment, WorkshopProject, load_project,
                    save_project)
from .notes import diff_snapshots, note_events
from .segmentation import (ChangePointResult, DialogueChunk, chunk_transcript,
                           embed_chunks, pelt_changepoints, refine_segments,
                           segment_cost, segment_session)

__version__ = "0.1.0"

__all__ = [
    "Aoi", "AuthoringState", "CardStats", "ChangePointResult", "ConflictError",
    "DialogueChunk", "Fixation", "GazeSample", "GrayFrame", "HeatGrid",
    "Homography", "LandmarkFrame", "MissingSourceError", "MultivariateSeries",
    "NoteEvent", "NoteSnapshot", "NotFoundError", "ParseError", "Participant",
    "ProviderError", "Quote", "RecapitError", "Role", "ScarfInterval",
    "Screenshot", "SegmentationConfig", "TimeSpan", "TopicCard", "TopicSegment",
    "Utterance", "ValidationError", "WorkshopProject", "aoi_hit",
    "apply_homography", "attention_heatmap", "attention_series",
    "chunk_transcript", "detect_fixations", "diff_snapshots", "embed_chunks",
    "load_note_snapshots", "load_project", "note_events", "parse_frames",
    "parse_gaze", "parse_landmarks", "parse_transcript", "pelt_changepoints",
    "read_pgm", "refine_segments", "save_project", "scarf_sequence",
    "segment_cost", "segment_session", "shared_attention_intervals",
    "write_pgm",
]
