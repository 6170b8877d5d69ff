"""Gaze analytics: fixation filtering, AOI hits, scarf intervals, series, heatmaps.

The fixation filter is dispersion-based (I-DT): a window of consecutive
valid samples grows while its coordinate extent stays within the dispersion
threshold and is emitted once it lasts at least the minimum duration.
Defaults (0.05 normalized units, 0.1 s) are this toolkit's own and should be
surfaced in any configuration UI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .ingest import GazeSample
from .model import Aoi, SegmentationConfig, TimeSpan

DEFAULT_DISPERSION_THRESHOLD = 0.05
DEFAULT_MIN_DURATION = 0.1


@dataclass(frozen=True)
class Fixation:
    participant_id: str
    span: TimeSpan
    centroid: tuple[float, float]
    dispersion: float


@dataclass(frozen=True)
class ScarfInterval:
    """One strip piece of a participant's scarf row; aoi_id None = off-AOI."""

    participant_id: str
    span: TimeSpan
    aoi_id: Optional[str]


@dataclass(frozen=True)
class MultivariateSeries:
    """T x M binned signal; column j belongs to aoi_ids[j]. Values in [0, 1]."""

    bin_width: float
    start: float
    values: np.ndarray
    aoi_ids: tuple[str, ...]

    @property
    def num_bins(self) -> int:
        return self.values.shape[0]

    def bin_span(self, i: int, duration: Optional[float] = None) -> TimeSpan:
        lo = self.start + i * self.bin_width
        hi = self.start + (i + 1) * self.bin_width
        if duration is not None:
            hi = min(hi, duration)
        return TimeSpan(lo, hi)


@dataclass(frozen=True)
class HeatGrid:
    width: int
    height: int
    values: np.ndarray  # (height, width), max-normalized unless all-zero
    span: TimeSpan


# ---------------------------------------------------------------------------
# Fixation detection (I-DT)
# ---------------------------------------------------------------------------

def detect_fixations(samples: Sequence[GazeSample],
                     dispersion_threshold: float = DEFAULT_DISPERSION_THRESHOLD,
                     min_duration: float = DEFAULT_MIN_DURATION) -> list[Fixation]:
    """Greedy maximal-window I-DT over one participant's sorted samples.

    Dispersion is (max x - min x) + (max y - min y). Invalid samples break
    windows. A window is emitted when it cannot grow further and spans at
    least ``min_duration``; otherwise the start slides by one sample.
    """
    if dispersion_threshold <= 0 or min_duration <= 0:
        raise ValueError("thresholds must be positive")
    fixations: list[Fixation] = []
    runs: list[list[GazeSample]] = []
    current: list[GazeSample] = []
    for s in samples:
        if s.valid:
            current.append(s)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)

    for run in runs:
        n = len(run)
        i = 0
        while i < n:
            min_x = max_x = run[i].x
            min_y = max_y = run[i].y
            j = i
            while j + 1 < n:
                nx, ny = run[j + 1].x, run[j + 1].y
                cand_min_x = min(min_x, nx)
                cand_max_x = max(max_x, nx)
                cand_min_y = min(min_y, ny)
                cand_max_y = max(max_y, ny)
                if (cand_max_x - cand_min_x) + (cand_max_y - cand_min_y) > dispersion_threshold:
                    break
                min_x, max_x, min_y, max_y = cand_min_x, cand_max_x, cand_min_y, cand_max_y
                j += 1
            if run[j].t - run[i].t >= min_duration and j > i:
                window = run[i:j + 1]
                cx = sum(w.x for w in window) / len(window)
                cy = sum(w.y for w in window) / len(window)
                fixations.append(Fixation(
                    participant_id=run[i].participant_id,
                    span=TimeSpan(run[i].t, run[j].t),
                    centroid=(cx, cy),
                    dispersion=(max_x - min_x) + (max_y - min_y),
                ))
                i = j + 1
            else:
                i += 1
    return fixations


# ---------------------------------------------------------------------------
# AOI hit testing
# ---------------------------------------------------------------------------

def _point_on_boundary(polygon, x: float, y: float, eps: float = 1e-12) -> bool:
    n = len(polygon)
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
        if abs(cross) > eps:
            continue
        if min(ax, bx) - eps <= x <= max(ax, bx) + eps and \
           min(ay, by) - eps <= y <= max(ay, by) + eps:
            return True
    return False


def point_in_polygon(polygon, x: float, y: float) -> bool:
    """Even-odd ray casting; points on the boundary count as inside."""
    if _point_on_boundary(polygon, x, y):
        return True
    inside = False
    n = len(polygon)
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        if (ay > y) != (by > y):
            x_cross = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < x_cross:
                inside = not inside
    return inside


def aoi_hit(aois: Sequence[Aoi], p) -> Optional[str]:
    """First AOI (manifest order) containing point ``p``, or None."""
    x, y = p
    for aoi in aois:
        if point_in_polygon(aoi.polygon, x, y):
            return aoi.id
    return None


# ---------------------------------------------------------------------------
# Scarf intervals
# ---------------------------------------------------------------------------

def scarf_sequence(fixations: Sequence[Fixation], aois: Sequence[Aoi],
                   duration: float, participant_id: Optional[str] = None) -> list[ScarfInterval]:
    """Tile [0, duration] for one participant: fixations labeled by AOI hit,
    gaps labeled None. Fixations must be sorted and non-overlapping."""
    if not fixations:
        return [ScarfInterval(participant_id=participant_id or "",
                              span=TimeSpan(0.0, duration), aoi_id=None)]
    pid = fixations[0].participant_id
    intervals: list[ScarfInterval] = []
    cursor = 0.0
    for fx in fixations:
        if fx.span.start > cursor:
            intervals.append(ScarfInterval(pid, TimeSpan(cursor, fx.span.start), None))
        intervals.append(ScarfInterval(pid, fx.span, aoi_hit(aois, fx.centroid)))
        cursor = fx.span.end
    if cursor < duration:
        intervals.append(ScarfInterval(pid, TimeSpan(cursor, duration), None))
    return intervals


# ---------------------------------------------------------------------------
# Attention series
# ---------------------------------------------------------------------------

def num_bins(duration: float, bin_width: float) -> int:
    return max(1, int(math.ceil(duration / bin_width - 1e-12)))


def attention_series(scarfs: Sequence[Sequence[ScarfInterval]],
                     aois: Sequence[Aoi], config: SegmentationConfig,
                     duration: float) -> MultivariateSeries:
    """Per-bin, per-AOI proportion of participants fixating that AOI.

    Bin attendance is time-weighted: each participant contributes the
    fraction of the bin their scarf spends on the AOI, normalized per
    participant before averaging so an all-participants bin is exactly 1.0.
    """
    if not scarfs:
        raise ValueError("attention_series needs at least one participant")
    aoi_ids = tuple(a.id for a in aois)
    col = {aid: j for j, aid in enumerate(aoi_ids)}
    w = config.bin_width
    t_bins = num_bins(duration, w)
    values = np.zeros((t_bins, len(aoi_ids)))
    n_participants = len(scarfs)

    for intervals in scarfs:
        for iv in intervals:
            if iv.aoi_id is None or iv.aoi_id not in col:
                continue
            j = col[iv.aoi_id]
            first = max(0, int(iv.span.start / w))
            last = min(t_bins - 1, int(math.ceil(iv.span.end / w)) )
            for b in range(first, last + 1):
                if b >= t_bins:
                    break
                bin_lo = b * w
                bin_hi = min((b + 1) * w, duration)
                bin_len = bin_hi - bin_lo
                if bin_len <= 0:
                    continue
                overlap = min(iv.span.end, bin_hi) - max(iv.span.start, bin_lo)
                if overlap > 0:
                    values[b, j] += overlap / bin_len
    values /= n_participants
    return MultivariateSeries(bin_width=w, start=0.0, values=values, aoi_ids=aoi_ids)


# ---------------------------------------------------------------------------
# Heatmaps
# ---------------------------------------------------------------------------

def attention_heatmap(fixations: Sequence[Fixation], span: TimeSpan,
                      width: int, height: int, kernel_sigma: float) -> HeatGrid:
    """Duration-weighted Gaussian splat of fixation centroids, truncated at
    3 sigma, max-normalized (all-zero grids stay zero)."""
    if kernel_sigma <= 0:
        raise ValueError("kernel_sigma must be positive")
    grid = np.zeros((height, width))
    radius = int(math.ceil(3.0 * kernel_sigma))
    two_sigma_sq = 2.0 * kernel_sigma * kernel_sigma
    for fx in fixations:
        if fx.span.overlap(span) <= 0:
            continue
        weight = fx.span.overlap(span)
        cx = fx.centroid[0] * width - 0.5
        cy = fx.centroid[1] * height - 0.5
        ci = int(round(cx))
        cj = int(round(cy))
        for j in range(max(0, cj - radius), min(height, cj + radius + 1)):
            for i in range(max(0, ci - radius), min(width, ci + radius + 1)):
                d_sq = (i - cx) ** 2 + (j - cy) ** 2
                if d_sq <= (3.0 * kernel_sigma) ** 2:
                    grid[j, i] += weight * math.exp(-d_sq / two_sigma_sq)
    peak = grid.max()
    if peak > 0:
        grid = grid / peak
    return HeatGrid(width=width, height=height, values=grid, span=span)


# ---------------------------------------------------------------------------
# Shared attention
# ---------------------------------------------------------------------------

def shared_attention_intervals(scarfs: Sequence[Sequence[ScarfInterval]],
                               k: int) -> list[tuple[TimeSpan, str]]:
    """Maximal intervals during which >= k participants fixate the same AOI."""
    if not 1 <= k <= len(scarfs):
        raise ValueError(f"k={k} must be in [1, participant count {len(scarfs)}]")
    boundaries = sorted({iv.span.start for row in scarfs for iv in row}
                        | {iv.span.end for row in scarfs for iv in row})
    if len(boundaries) < 2:
        return []

    def label_at(row, t_mid):
        for iv in row:
            if iv.span.start <= t_mid < iv.span.end:
                return iv.aoi_id
        return None

    # per elementary slice, count participants per AOI
    results: list[tuple[TimeSpan, str]] = []
    open_spans: dict[str, float] = {}  # aoi -> start of current qualifying run
    for lo, hi in zip(boundaries[:-1], boundaries[1:]):
        if hi <= lo:
            continue
        mid = (lo + hi) / 2.0
        counts: dict[str, int] = {}
        for row in scarfs:
            label = label_at(row, mid)
            if label is not None:
                counts[label] = counts.get(label, 0) + 1
        qualifying = {aoi for aoi, c in counts.items() if c >= k}
        for aoi in list(open_spans):
            if aoi not in qualifying:
                results.append((TimeSpan(open_spans.pop(aoi), lo), aoi))
        for aoi in qualifying:
            if aoi not in open_spans:
                open_spans[aoi] = lo
    end = boundaries[-1]
    for aoi, start in open_spans.items():
        results.append((TimeSpan(start, end), aoi))
    results.sort(key=lambda r: (r[0].start, r[1]))
    return results
