"""Penalized kernel change-point detection.

Minimizes  sum of within-segment kernel costs + penalty * (number of
breakpoints)  exactly, using PELT-style pruning.  Costs:

  linear kernel  c(s, t) = sum(v**2) - sum(v)**2 / (t - s)        over v[s:t]
  rbf kernel     c(s, t) = (t - s) - V(s, t) / (t - s)
                 V(s, t) = sum_{s<=i,j<t} exp(-(v_i - v_j)**2 / (2 h**2))

The rbf bandwidth h defaults to the median heuristic (median pairwise
distance over a deterministic subsample).  Returned breakpoints exclude 0
and include ``len(values)``.
"""

from __future__ import annotations

import numpy as np

KERNELS = ("rbf", "linear")
_MEDIAN_SUBSAMPLE = 512


def median_heuristic_bandwidth(values: np.ndarray, max_points: int = _MEDIAN_SUBSAMPLE) -> float:
    """Median pairwise absolute difference over an evenly strided subsample.

    Falls back to the median of the positive distances when more than half
    of all pairs coincide, and to 1.0 for a constant input (where the kernel
    cost is zero regardless of bandwidth).
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size > max_points:
        stride = int(np.ceil(v.size / max_points))
        v = v[::stride]
    diffs = np.abs(v[:, None] - v[None, :])
    iu = np.triu_indices(v.size, k=1)
    d = diffs[iu]
    if d.size == 0:
        return 1.0
    h = float(np.median(d))
    if h <= 0.0:
        positive = d[d > 0]
        h = float(np.median(positive)) if positive.size else 1.0
    return h


def detect_change_points(
    values: np.ndarray,
    penalty: float,
    kernel: str = "rbf",
    bandwidth: float | None = None,
) -> list[int]:
    """Exact penalized minimization via PELT; deterministic, smallest-index ties."""
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if n == 0:
        return []
    if penalty < 0:
        raise ValueError("penalty must be non-negative")
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")

    if kernel == "linear":
        ends = _pelt_linear(v, penalty)
    else:
        if bandwidth is None:
            bandwidth = median_heuristic_bandwidth(v)
        ends = _pelt_rbf(v, penalty, bandwidth)

    # backtrack from the stored optimal predecessors
    bkps = []
    t = n
    while t > 0:
        bkps.append(int(t))
        t = int(ends[t])
    bkps.reverse()
    return bkps


def _pelt_linear(v: np.ndarray, penalty: float) -> np.ndarray:
    n = v.size
    cs = np.concatenate([[0.0], np.cumsum(v)])
    css = np.concatenate([[0.0], np.cumsum(v * v)])
    f = np.empty(n + 1)
    f[0] = -penalty
    prev = np.zeros(n + 1, dtype=np.int64)
    cand = np.array([0], dtype=np.int64)
    for t in range(1, n + 1):
        seg_len = t - cand
        cost = (css[t] - css[cand]) - (cs[t] - cs[cand]) ** 2 / seg_len
        total = f[cand] + cost
        best = int(np.argmin(total))
        f[t] = total[best] + penalty
        prev[t] = cand[best]
        keep = total <= f[t]
        cand = np.append(cand[keep], t)
    return prev


def _pelt_rbf(v: np.ndarray, penalty: float, bandwidth: float) -> np.ndarray:
    n = v.size
    inv = 1.0 / (2.0 * bandwidth * bandwidth)
    f = np.empty(n + 1)
    f[0] = -penalty
    prev = np.zeros(n + 1, dtype=np.int64)
    cand = np.array([0], dtype=np.int64)
    # vsum[k] tracks V(cand[k], t) incrementally; entering step t it holds
    # V(cand[k], t-1) and the new point p = t-1 is folded in below
    vsum = np.zeros(1)
    for t in range(1, n + 1):
        p = t - 1
        lo = int(cand[0])
        if p > lo:
            w = np.exp(-((v[lo:p] - v[p]) ** 2) * inv)
            suffix = np.cumsum(w[::-1])[::-1]
            suffix = np.concatenate([suffix, [0.0]])
            vsum = vsum + 2.0 * suffix[cand - lo] + 1.0
        else:
            vsum = vsum + 1.0
        seg_len = t - cand
        cost = seg_len - vsum / seg_len
        total = f[cand] + cost
        best = int(np.argmin(total))
        f[t] = total[best] + penalty
        prev[t] = cand[best]
        keep = total <= f[t]
        cand = np.append(cand[keep], t)
        vsum = np.append(vsum[keep], 0.0)  # V(t, t) = 0
    return prev
