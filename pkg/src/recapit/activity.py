"""Working-area activity from grayscale frames and hand landmarks.

Foreground is detected with a per-pixel exponential running-mean background
model (simple, deterministic, drop-in replaceable by a richer model), and
per-AOI activity is the foreground fraction inside the AOI, gated by hand
landmarks: when no landmark of the nearest-in-time frame (within 0.2 s)
lies inside an AOI, that AOI's activity is zero for the frame. The source
of activity is intentionally not attributed to participants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .attention import HeatGrid, MultivariateSeries, num_bins, point_in_polygon
from .ingest import GrayFrame, LandmarkFrame
from .model import Aoi, SegmentationConfig, TimeSpan

DEFAULT_ALPHA = 0.05
DEFAULT_DIFF_THRESHOLD = 25.0
LANDMARK_MATCH_TOLERANCE = 0.2  # seconds


@dataclass(frozen=True)
class BackgroundModel:
    mean: np.ndarray  # float image (height, width)
    alpha: float = DEFAULT_ALPHA
    diff_threshold: float = DEFAULT_DIFF_THRESHOLD


def background_from_frame(frame: GrayFrame, alpha: float = DEFAULT_ALPHA,
                          diff_threshold: float = DEFAULT_DIFF_THRESHOLD) -> BackgroundModel:
    """Seed a background model from the first frame."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    return BackgroundModel(mean=frame.pixels.astype(float), alpha=alpha,
                           diff_threshold=diff_threshold)


def update_background(model: BackgroundModel,
                      frame: GrayFrame) -> tuple[BackgroundModel, np.ndarray]:
    """One background-subtraction step.

    A pixel is foreground iff |intensity - mean| > diff_threshold, evaluated
    against the mean *before* this frame is blended in. Returns the updated
    model and the boolean foreground mask.
    """
    if frame.pixels.shape != model.mean.shape:
        raise ValueError(f"frame dimensions {frame.pixels.shape} do not match "
                         f"model {model.mean.shape}")
    intensity = frame.pixels.astype(float)
    mask = np.abs(intensity - model.mean) > model.diff_threshold
    new_mean = (1.0 - model.alpha) * model.mean + model.alpha * intensity
    return BackgroundModel(new_mean, model.alpha, model.diff_threshold), mask


# ---------------------------------------------------------------------------
# AOI rasterization
# ---------------------------------------------------------------------------

def rasterize_aoi(aoi: Aoi, width: int, height: int) -> np.ndarray:
    """Boolean pixel mask of one AOI polygon; pixel centers decide membership."""
    mask = np.zeros((height, width), dtype=bool)
    xs = [v[0] for v in aoi.polygon]
    ys = [v[1] for v in aoi.polygon]
    i_lo = max(0, int(math.floor(min(xs) * width)) - 1)
    i_hi = min(width, int(math.ceil(max(xs) * width)) + 1)
    j_lo = max(0, int(math.floor(min(ys) * height)) - 1)
    j_hi = min(height, int(math.ceil(max(ys) * height)) + 1)
    for j in range(j_lo, j_hi):
        cy = (j + 0.5) / height
        for i in range(i_lo, i_hi):
            cx = (i + 0.5) / width
            if point_in_polygon(aoi.polygon, cx, cy):
                mask[j, i] = True
    return mask


# ---------------------------------------------------------------------------
# Activity series
# ---------------------------------------------------------------------------

def _nearest_landmarks(landmarks: Sequence[LandmarkFrame], t: float,
                       tolerance: float = LANDMARK_MATCH_TOLERANCE) -> Optional[LandmarkFrame]:
    """Nearest-in-time landmark frame within the tolerance, else None."""
    best = None
    best_dt = tolerance
    for lf in landmarks:  # sorted; early exit once past t + tolerance
        dt = abs(lf.t - t)
        if dt <= best_dt:
            best, best_dt = lf, dt
        if lf.t > t + tolerance:
            break
    return best


def frame_activity(mask: np.ndarray, aoi_masks: dict[str, np.ndarray],
                   aoi_list: Sequence[Aoi],
                   landmarks_frame: Optional[LandmarkFrame]) -> dict[str, float]:
    """Per-AOI activity of one frame given its foreground mask."""
    out: dict[str, float] = {}
    for aoi in aoi_list:
        am = aoi_masks[aoi.id]
        total = int(am.sum())
        if total == 0:
            out[aoi.id] = 0.0
            continue
        gated_open = False
        if landmarks_frame is not None:
            for (x, y) in landmarks_frame.points:
                if point_in_polygon(aoi.polygon, x, y):
                    gated_open = True
                    break
        if not gated_open:
            out[aoi.id] = 0.0
            continue
        out[aoi.id] = float(np.count_nonzero(mask & am)) / total
    return out


def activity_series(frames: Sequence[GrayFrame], landmarks: Sequence[LandmarkFrame],
                    aois: Sequence[Aoi], config: SegmentationConfig,
                    duration: float,
                    alpha: float = DEFAULT_ALPHA,
                    diff_threshold: float = DEFAULT_DIFF_THRESHOLD) -> MultivariateSeries:
    """Binned per-AOI activity over the session.

    Runs the background model as a single pass over frames, computes each
    frame's gated per-AOI foreground fraction, then averages frames per bin
    (frame-less bins read zero).
    """
    if not frames:
        raise ValueError("no frames in session span")
    aoi_ids = tuple(a.id for a in aois)
    w = config.bin_width
    t_bins = num_bins(duration, w)
    sums = np.zeros((t_bins, len(aoi_ids)))
    counts = np.zeros(t_bins, dtype=int)

    aoi_masks = {a.id: rasterize_aoi(a, frames[0].width, frames[0].height) for a in aois}
    model = background_from_frame(frames[0], alpha, diff_threshold)
    for frame in frames:
        model, mask = update_background(model, frame)
        if not 0.0 <= frame.t < duration + w:
            continue
        b = int(frame.t / w)
        if not 0 <= b < t_bins:
            continue
        lf = _nearest_landmarks(landmarks, frame.t)
        acts = frame_activity(mask, aoi_masks, aois, lf)
        for j, aid in enumerate(aoi_ids):
            sums[b, j] += acts[aid]
        counts[b] += 1

    values = np.zeros_like(sums)
    nonzero = counts > 0
    values[nonzero] = sums[nonzero] / counts[nonzero, None]
    return MultivariateSeries(bin_width=w, start=0.0, values=values, aoi_ids=aoi_ids)


def foreground_masks(frames: Sequence[GrayFrame],
                     alpha: float = DEFAULT_ALPHA,
                     diff_threshold: float = DEFAULT_DIFF_THRESHOLD) -> list[tuple[float, np.ndarray]]:
    """(t, mask) pairs from running the background model over all frames."""
    if not frames:
        return []
    out = []
    model = background_from_frame(frames[0], alpha, diff_threshold)
    for frame in frames:
        model, mask = update_background(model, frame)
        out.append((frame.t, mask))
    return out


def activity_heatmap(masks: Sequence[tuple[float, np.ndarray]], span: TimeSpan,
                     width: int, height: int) -> HeatGrid:
    """Per-cell mean foreground rate over frames in ``span``, max-normalized.

    Cells aggregate the pixels whose centers fall inside them.
    """
    in_span = [m for t, m in masks if span.start <= t <= span.end]
    if not in_span:
        raise ValueError(f"no frames within span [{span.start}, {span.end}]")
    fh, fw = in_span[0].shape
    rate = np.zeros((fh, fw))
    for m in in_span:
        rate += m
    rate /= len(in_span)

    grid = np.zeros((height, width))
    cell_counts = np.zeros((height, width), dtype=int)
    for pj in range(fh):
        gy = min(height - 1, int((pj + 0.5) / fh * height))
        for pi in range(fw):
            gx = min(width - 1, int((pi + 0.5) / fw * width))
            grid[gy, gx] += rate[pj, pi]
            cell_counts[gy, gx] += 1
    nonzero = cell_counts > 0
    grid[nonzero] /= cell_counts[nonzero]
    peak = grid.max()
    if peak > 0:
        grid = grid / peak
    return HeatGrid(width=width, height=height, values=grid, span=span)
