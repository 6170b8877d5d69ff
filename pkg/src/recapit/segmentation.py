"""Two-step topic segmentation.

Step 1 detects change points on the binned multivariate attention/activity
series with PELT (penalized exact segmentation, L2 piecewise-constant-mean
cost, prefix-sum evaluation, candidate pruning with K = 0).

Step 2 refines long segments from dialogue: utterances inside each initial
interval are chunked at pauses above the gap threshold, chunks are embedded,
and a new interior change point is inserted wherever the cosine similarity
of consecutive chunk embeddings drops below the similarity threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .attention import MultivariateSeries
from .ingest import Utterance
from .model import SegmentationConfig, TimeSpan, TopicSegment


@dataclass(frozen=True)
class ChangePointResult:
    """Sorted interior change points (1-based bin indices) and the minimal
    penalized objective."""

    changepoints: tuple[int, ...]
    objective: float
    num_bins: int


@dataclass(frozen=True)
class DialogueChunk:
    id: str
    span: TimeSpan
    utterance_ids: tuple[str, ...]
    text: str
    embedding: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# Cost function
# ---------------------------------------------------------------------------

def cost_prefixes(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Prefix sums of x and x^2 with a leading zero row; values is T x M."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    zero = np.zeros((1, values.shape[1]))
    s1 = np.vstack([zero, np.cumsum(values, axis=0)])
    s2 = np.vstack([zero, np.cumsum(values * values, axis=0)])
    return s1, s2


def segment_cost(s1: np.ndarray, s2: np.ndarray, a: int, b: int) -> float:
    """L2 cost of bins a..b (1-based, inclusive): sum over dimensions of
    sum(x^2) - (sum x)^2 / n."""
    if not 1 <= a <= b <= s1.shape[0] - 1:
        raise ValueError(f"invalid segment [{a}, {b}] for T={s1.shape[0] - 1}")
    n = b - a + 1
    sum_ = s1[b] - s1[a - 1]
    sumsq = s2[b] - s2[a - 1]
    return float(np.sum(sumsq - sum_ * sum_ / n))


# ---------------------------------------------------------------------------
# PELT
# ---------------------------------------------------------------------------

def pelt_changepoints(series: MultivariateSeries, beta: float,
                      min_segment_bins: int = 2) -> ChangePointResult:
    """Exact minimizer of total segment cost + beta * (number of change points).

    Dynamic program F(t) = min over admissible tau of F(tau) + cost(tau+1, t)
    + beta, F(0) = -beta, with candidate pruning: tau is dropped once
    F(tau) + cost(tau+1, t) > F(t) (valid with K = 0 because the L2 cost is
    subadditive under concatenation). Segments have at least
    ``min_segment_bins`` bins (clamped to the series length).
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    values = series.values
    t_total = values.shape[0]
    if t_total < 1:
        raise ValueError("series must have at least one bin")
    min_seg = max(1, min(min_segment_bins, t_total))
    s1, s2 = cost_prefixes(values)

    f = np.full(t_total + 1, np.inf)
    f[0] = -beta
    prev = np.zeros(t_total + 1, dtype=int)
    candidates = [0]

    for t in range(1, t_total + 1):
        tau_new = t - min_seg
        if tau_new >= 1 and np.isfinite(f[tau_new]):
            candidates.append(tau_new)
        if t < min_seg:
            continue
        taus = np.asarray(candidates)
        n = (t - taus).astype(float)
        sum_ = s1[t] - s1[taus]
        sumsq = s2[t] - s2[taus]
        costs = np.sum(sumsq - sum_ * sum_ / n[:, None], axis=1)
        bare = f[taus] + costs
        totals = bare + beta
        best = int(np.argmin(totals))
        f[t] = totals[best]
        prev[t] = taus[best]
        keep = bare <= f[t]  # prune tau once F(tau) + cost(tau+1, t) > F(t)
        candidates = [tau for tau, k in zip(candidates, keep) if k]

    cps = []
    t = t_total
    while t > 0:
        tau = int(prev[t])
        if tau > 0:
            cps.append(tau)
        t = tau
    cps.reverse()
    return ChangePointResult(changepoints=tuple(cps), objective=float(f[t_total]),
                             num_bins=t_total)


# ---------------------------------------------------------------------------
# Dialogue chunking
# ---------------------------------------------------------------------------

def chunk_transcript(utterances: Sequence[Utterance], gap_threshold: float,
                     id_prefix: str = "chunk") -> list[DialogueChunk]:
    """Split sorted utterances into chunks at pauses above ``gap_threshold``.

    A new chunk starts at utterance k when start_k - end_{k-1} exceeds the
    threshold; chunk text joins utterance texts with single spaces.
    """
    chunks: list[DialogueChunk] = []
    group: list[Utterance] = []

    def flush():
        if not group:
            return
        chunks.append(DialogueChunk(
            id=f"{id_prefix}_{len(chunks):04d}",
            span=TimeSpan(group[0].span.start, group[-1].span.end),
            utterance_ids=tuple(u.id for u in group),
            text=" ".join(u.text for u in group),
        ))
        group.clear()

    for u in utterances:
        if group and u.span.start - group[-1].span.end > gap_threshold:
            flush()
        group.append(u)
    flush()
    return chunks


def embed_chunks(chunks: Sequence[DialogueChunk], provider) -> list[DialogueChunk]:
    """Attach one fixed-dimension embedding vector per chunk.

    ``provider`` exposes ``embed(texts) -> list of 1-D arrays``; the offline
    fallback in :mod:`recapit.providers` hashes case-folded tokens into 256
    buckets and L2-normalizes. Providers backed by a precomputed embeddings
    file expose ``embed_by_id(chunk_ids)`` instead and are keyed by the
    deterministic chunk ids.
    """
    if not chunks:
        return []
    if hasattr(provider, "embed_by_id"):
        vectors = provider.embed_by_id([c.id for c in chunks])
    else:
        vectors = provider.embed([c.text for c in chunks])
    if len(vectors) != len(chunks):
        raise ValueError(f"provider returned {len(vectors)} vectors for "
                         f"{len(chunks)} chunks")
    dims = {np.asarray(v).shape for v in vectors}
    if len(dims) != 1 or len(next(iter(dims))) != 1:
        raise ValueError(f"embedding dimensions inconsistent: {sorted(dims)}")
    return [replace(c, embedding=np.asarray(v, dtype=float))
            for c, v in zip(chunks, vectors)]


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("zero-norm embedding")
    return float(np.dot(a, b) / (na * nb))


# ---------------------------------------------------------------------------
# Refinement
# ---------------------------------------------------------------------------

def _bin_of(t: float, bin_width: float, t_total: int) -> int:
    """1-based index of the bin containing time t."""
    return min(t_total, max(1, int(t / bin_width) + 1))


def refine_segments(initial: ChangePointResult,
                    chunks_by_segment: Sequence[Sequence[DialogueChunk]],
                    similarity_threshold: float, bin_width: float,
                    duration: float) -> list[TopicSegment]:
    """Insert dialogue-derived change points inside the initial intervals.

    For adjacent chunk pairs within one initial interval, a refined change
    point lands at the bin containing the later chunk's start whenever the
    embeddings' cosine similarity falls below the threshold, subject to
    strict interiority (c_i < c~ < c_{i+1}); duplicate or
    boundary-coincident insertions are skipped. The returned segments tile
    [0, duration].
    """
    t_total = initial.num_bins
    bounds = [0, *initial.changepoints, t_total]
    if len(chunks_by_segment) != len(bounds) - 1:
        raise ValueError(f"expected chunks for {len(bounds) - 1} initial segments, "
                         f"got {len(chunks_by_segment)}")

    refined: set[int] = set()
    for seg_idx, chunks in enumerate(chunks_by_segment):
        lo, hi = bounds[seg_idx], bounds[seg_idx + 1]
        for left, right in zip(chunks[:-1], chunks[1:]):
            if left.embedding is None or right.embedding is None:
                raise ValueError(f"chunk {left.id if left.embedding is None else right.id} "
                                 "has no embedding")
            try:
                sim = cosine_similarity(left.embedding, right.embedding)
            except ValueError:
                zero = left.id if np.linalg.norm(left.embedding) == 0 else right.id
                raise ValueError(f"zero-norm embedding for chunk {zero}")
            if sim < similarity_threshold:
                c_tilde = _bin_of(right.span.start, bin_width, t_total)
                if lo < c_tilde < hi and c_tilde not in initial.changepoints:
                    refined.add(c_tilde)

    all_cps = sorted(set(initial.changepoints) | refined)
    boundaries = [0, *all_cps, t_total]
    segments: list[TopicSegment] = []
    for i, (lo, hi) in enumerate(zip(boundaries[:-1], boundaries[1:])):
        start = min(lo * bin_width, duration)
        end = duration if hi == t_total else min(hi * bin_width, duration)
        origin = "refined" if (lo in refined or hi in refined) else "initial"
        segments.append(TopicSegment(id=f"seg_{i:03d}", span=TimeSpan(start, end),
                                     title="", origin=origin, marked=False))
    return segments


# ---------------------------------------------------------------------------
# Full pipeline helper
# ---------------------------------------------------------------------------

def chunks_for_intervals(utterances: Sequence[Utterance],
                         initial: ChangePointResult, bin_width: float,
                         gap_threshold: float,
                         duration: float) -> list[list[DialogueChunk]]:
    """Group utterances by initial interval, then chunk each group.

    Chunks never straddle initial change points; an utterance belongs to the
    interval containing its start time.
    """
    bounds = [0, *initial.changepoints, initial.num_bins]
    spans = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        t_lo = lo * bin_width
        t_hi = duration if hi == initial.num_bins else hi * bin_width
        spans.append((t_lo, t_hi))
    grouped: list[list[Utterance]] = [[] for _ in spans]
    for u in utterances:
        for k, (t_lo, t_hi) in enumerate(spans):
            last = k == len(spans) - 1
            if t_lo <= u.span.start < t_hi or (last and u.span.start >= t_lo):
                grouped[k].append(u)
                break
    return [chunk_transcript(g, gap_threshold, id_prefix=f"chunk{k:02d}")
            for k, g in enumerate(grouped)]


def segment_session(series: MultivariateSeries, utterances: Sequence[Utterance],
                    config: SegmentationConfig, provider,
                    duration: float) -> tuple[list[TopicSegment], ChangePointResult]:
    """Run both segmentation steps and return tiled topic segments."""
    initial = pelt_changepoints(series, config.penalty_beta, config.min_segment_bins)
    groups = chunks_for_intervals(utterances, initial, config.bin_width,
                                  config.gap_threshold, duration)
    embedded = [embed_chunks(g, provider) for g in groups]
    segments = refine_segments(initial, embedded, config.similarity_threshold,
                               config.bin_width, duration)
    return segments, initial
