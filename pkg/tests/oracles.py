"""Independent reference implementations used to cross-check the library.

These deliberately avoid the library's code paths: costs are recomputed
two-pass, the partitioning DP is unpruned O(T^2), fixation windows rescan
their extent from scratch, convex AOI hits use half-plane tests, and the
LCS length uses a rolling-array DP.
"""

from __future__ import annotations

import numpy as np


# -- segmentation ------------------------------------------------------------

def naive_segment_cost(values: np.ndarray, a: int, b: int) -> float:
    """Two-pass L2 cost of 1-based inclusive bins [a, b]."""
    seg = np.asarray(values, dtype=float)[a - 1:b]
    if seg.ndim == 1:
        seg = seg[:, None]
    mu = seg.mean(axis=0)
    return float(((seg - mu) ** 2).sum())


def unpruned_dp(values: np.ndarray, beta: float, min_seg: int):
    """Optimal-partitioning DP over all candidates (no pruning).

    Returns (objective, changepoints). Costs are evaluated with the same
    prefix-sum expression as the library so that agreement can be bitwise;
    the DP itself is an independent full O(T^2) loop.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    t_total = x.shape[0]
    min_seg = max(1, min(min_seg, t_total))
    zero = np.zeros((1, x.shape[1]))
    s1 = np.vstack([zero, np.cumsum(x, axis=0)])
    s2 = np.vstack([zero, np.cumsum(x * x, axis=0)])

    f = np.full(t_total + 1, np.inf)
    f[0] = -beta
    prev = np.zeros(t_total + 1, dtype=int)
    for t in range(min_seg, t_total + 1):
        taus = [0] + [tau for tau in range(min_seg, t - min_seg + 1)
                      if np.isfinite(f[tau])]
        taus = np.asarray(taus)
        n = (t - taus).astype(float)
        sum_ = s1[t] - s1[taus]
        sumsq = s2[t] - s2[taus]
        costs = np.sum(sumsq - sum_ * sum_ / n[:, None], axis=1)
        totals = f[taus] + costs + beta
        best = int(np.argmin(totals))
        f[t] = totals[best]
        prev[t] = taus[best]

    cps = []
    t = t_total
    while t > 0:
        tau = int(prev[t])
        if tau > 0:
            cps.append(tau)
        t = tau
    cps.reverse()
    return float(f[t_total]), tuple(cps)


# -- fixations ---------------------------------------------------------------

def fixations_bruteforce(samples, dispersion_threshold, min_duration):
    """Maximal-window scan recomputing dispersion from scratch per extent."""
    runs = []
    cur = []
    for s in samples:
        if s.valid:
            cur.append(s)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)

    def dispersion(window):
        xs = np.array([w.x for w in window])
        ys = np.array([w.y for w in window])
        return (xs.max() - xs.min()) + (ys.max() - ys.min())

    out = []
    for run in runs:
        n = len(run)
        i = 0
        while i < n:
            j = i
            while j + 1 < n and dispersion(run[i:j + 2]) <= dispersion_threshold:
                j += 1
            if run[j].t - run[i].t >= min_duration and j > i:
                window = run[i:j + 1]
                out.append((
                    run[i].t, run[j].t,
                    sum(w.x for w in window) / len(window),
                    sum(w.y for w in window) / len(window),
                ))
                i = j + 1
            else:
                i += 1
    return out


# -- geometry ----------------------------------------------------------------

def convex_inside(vertices_ccw, x: float, y: float) -> bool:
    """Half-plane membership for a counter-clockwise convex polygon
    (boundary counts as inside)."""
    n = len(vertices_ccw)
    for i in range(n):
        ax, ay = vertices_ccw[i]
        bx, by = vertices_ccw[(i + 1) % n]
        if (bx - ax) * (y - ay) - (by - ay) * (x - ax) < 0:
            return False
    return True


# -- shared attention ----------------------------------------------------------

def label_at(row, t):
    for iv in row:
        if iv.span.start <= t < iv.span.end:
            return iv.aoi_id
    return None


def qualifying_at(scarfs, k, t):
    """Set of AOIs fixated by >= k participants at instant t."""
    counts = {}
    for row in scarfs:
        label = label_at(row, t)
        if label is not None:
            counts[label] = counts.get(label, 0) + 1
    return {aoi for aoi, c in counts.items() if c >= k}


# -- notes ---------------------------------------------------------------------

def lcs_length(a, b) -> int:
    """Rolling-array LCS length, independent of the library's table walk."""
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[len(b)]
