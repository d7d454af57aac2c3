"""Five entropy estimators used by the feature bank.

All estimators return ``math.nan`` for inputs shorter than their minimum
length, and fall back to 0.0 for the degenerate conventions noted in each
docstring.  The histogram- and spectrum-based estimators are normalized to
[0, 1]; fuzzy entropy is non-negative but unbounded by construction.
"""

from __future__ import annotations

import math

import numpy as np


def _embed(x: np.ndarray, m: int, tau: int) -> np.ndarray:
    """Delay-embedding matrix with rows x[i], x[i+tau], ..., x[i+(m-1)tau]."""
    n = x.size - (m - 1) * tau
    if n < 1:
        return np.empty((0, m))
    return np.stack([x[k * tau: k * tau + n] for k in range(m)], axis=1)


def _chebyshev_centered(x: np.ndarray, m: int, tau: int) -> np.ndarray:
    """Pairwise Chebyshev distances between mean-centered delay templates."""
    emb = _embed(x, m, tau)
    emb = emb - emb.mean(axis=1, keepdims=True)
    k = emb.shape[0]
    d = np.zeros((k, k))
    for col in range(m):
        np.maximum(d, np.abs(emb[:, col, None] - emb[None, :, col]), out=d)
    return d


def _chebyshev_plain(x: np.ndarray, m: int) -> np.ndarray:
    """Pairwise Chebyshev distances between contiguous length-m templates."""
    emb = _embed(x, m, 1)
    k = emb.shape[0]
    d = np.zeros((k, k))
    for col in range(m):
        np.maximum(d, np.abs(emb[:, col, None] - emb[None, :, col]), out=d)
    return d


def _phi(dist: np.ndarray, r_abs: float, n: float) -> float:
    """Mean exponential similarity over ordered pairs i != j."""
    k = dist.shape[0]
    sim = np.exp(-((dist / r_abs) ** n))
    return (float(sim.sum()) - k) / (k * (k - 1))


def fuzzy_entropy(x: np.ndarray, m: int = 2, r: float = 0.2, n: float = 2.0, tau: int = 1) -> float:
    """Chen-style fuzzy entropy, ln(phi_m) - ln(phi_{m+1}).

    ``r`` is a fraction of the signal SD; templates are mean-centered and
    compared with Chebyshev distance under an exp(-(d/r_abs)^n) membership.
    Zero-variance input gives 0 by convention.
    """
    x = np.asarray(x, dtype=np.float64)
    k = x.size - m * tau  # template count, shared by phi_m and phi_{m+1}
    if k < 2 or x.size < m + 2:
        return math.nan
    sd = float(np.std(x))
    if sd == 0.0:
        return 0.0
    r_abs = r * sd
    d_m = _chebyshev_centered(x, m, tau)[:k, :k]
    d_m1 = _chebyshev_centered(x, m + 1, tau)[:k, :k]
    return math.log(_phi(d_m, r_abs, n)) - math.log(_phi(d_m1, r_abs, n))


def _dist_hist(d: np.ndarray, bins: int) -> np.ndarray:
    """Equal-width histogram counts over [min(d), max(d)], right edge closed."""
    lo = float(d.min())
    hi = float(d.max())
    if hi <= lo:
        return np.array([])
    idx = ((d - lo) * (bins / (hi - lo))).astype(np.int64)
    np.clip(idx, 0, bins - 1, out=idx)
    return np.bincount(idx, minlength=bins)


def dist_entropy(x: np.ndarray, m: int = 2, bins: int = 512) -> float:
    """Distribution entropy: log2 entropy of the inter-template distance histogram.

    Degenerate distance distributions (e.g. constant input) give 0.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size < m + 1:
        return math.nan
    dist = _chebyshev_plain(x, m)
    iu = np.triu_indices(dist.shape[0], k=1)
    d = dist[iu]
    counts = _dist_hist(d, bins)
    if counts.size == 0:
        return 0.0
    p = counts[counts > 0] / d.size
    h = -float(np.sum(p * np.log2(p)))
    return h / math.log2(bins)


def svd_entropy(x: np.ndarray, m: int = 4, tau: int = 1) -> float:
    """Entropy of the normalized singular spectrum of the trajectory matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < (m - 1) * tau + 1:
        return math.nan
    emb = _embed(x, m, tau)
    sigma = np.linalg.svd(emb, compute_uv=False)
    # suppress numerically-zero singular values (rank tolerance as in
    # numpy.linalg.matrix_rank) so rank-deficient inputs give exact results
    tol = sigma.max(initial=0.0) * max(emb.shape) * np.finfo(np.float64).eps
    sigma = sigma[sigma > tol]
    total = float(sigma.sum())
    if total == 0.0:
        return 0.0
    p = sigma / total
    p = p[p > 0]
    h = -float(np.sum(p * np.log(p)))
    return h / math.log(m) if m > 1 else 0.0


def perm_entropy(x: np.ndarray, m: int = 4, tau: int = 1) -> float:
    """Normalized ordinal-pattern entropy; ties broken by order of occurrence."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < (m - 1) * tau + 2:
        return math.nan
    emb = _embed(x, m, tau)
    # stable argsort implements the occurrence-order tie-break
    patterns = np.argsort(emb, axis=1, kind="stable")
    weights = (m ** np.arange(m)).astype(np.int64)
    codes = patterns @ weights
    _, counts = np.unique(codes, return_counts=True)
    p = counts / codes.size
    h = -float(np.sum(p * np.log(p)))
    return h / math.log(math.factorial(m))


def phase_entropy(x: np.ndarray, sectors: int = 16, tau: int = 1) -> float:
    """Angular entropy of the second-order difference plot.

    Points at the origin are discarded; an all-origin input (constant
    signal) gives 0 by convention.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size < 2 * tau + 1:
        return math.nan
    dx = x[tau:-tau] - x[:-2 * tau]
    dy = x[2 * tau:] - x[tau:-tau]
    mask = (dx != 0) | (dy != 0)
    dx, dy = dx[mask], dy[mask]
    if dx.size == 0:
        return 0.0
    angles = np.mod(np.arctan2(dy, dx), 2.0 * math.pi)
    idx = (angles * (sectors / (2.0 * math.pi))).astype(np.int64)
    np.clip(idx, 0, sectors - 1, out=idx)
    counts = np.bincount(idx, minlength=sectors)
    p = counts[counts > 0] / dx.size
    h = -float(np.sum(p * np.log(p)))
    return h / math.log(sectors)
