"""The 256-entry actimetric feature bank.

64 base methods (14 statistical + 5 entropies x 10 parameter sets each),
computed per segment, collected into a per-method series over the segments
of one kind, then aggregated with mean and sample standard deviation:
64 x {mean, std} x {activity, rest} = 256 features.

Canonical feature names: ``<group>.<agg>.<method>[.<paramtag>]`` with
``group`` in {activity, rest} and ``agg`` in {mean, std}.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import entropies
from .entropies import (
    _chebyshev_centered,
    _chebyshev_plain,
    _dist_hist,
    dist_entropy,
    fuzzy_entropy,
    perm_entropy,
    phase_entropy,
    svd_entropy,
)
from .segmentation import ACTIVITY, REST, Segmentation

STAT_METHODS = [
    "mean", "max", "min", "range", "std", "variance", "cv",
    "p1", "p5", "p25", "p50", "p75", "p95", "p99",
]
ENTROPY_METHODS = ["fuzzy_en", "dist_en", "svd_en", "perm_en", "phase_en"]
GROUPS = (ACTIVITY, REST)
AGGREGATIONS = ("mean", "std")

_PERCENTILES = {"p1": 1, "p5": 5, "p25": 25, "p50": 50, "p75": 75, "p95": 95, "p99": 99}


@dataclass(frozen=True)
class EntropyParams:
    m: int | None = None
    tau: int | None = None
    r: float | None = None
    n: float | None = None
    bins: int | None = None
    sectors: int | None = None

    def __post_init__(self):
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1")
        if self.tau is not None and self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.r is not None and self.r <= 0:
            raise ValueError("r must be > 0")
        if self.bins is not None and self.bins < 2:
            raise ValueError("bins must be >= 2")
        if self.sectors is not None and self.sectors < 2:
            raise ValueError("sectors must be >= 2")

    def tag(self) -> str:
        parts = []
        if self.m is not None:
            parts.append(f"m{self.m}")
        if self.r is not None:
            parts.append(f"r{int(round(self.r * 100)):02d}")
        if self.bins is not None:
            parts.append(f"b{self.bins}")
        if self.sectors is not None:
            parts.append(f"s{self.sectors}")
        if self.tau is not None:
            parts.append(f"t{self.tau}")
        return "_".join(parts)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def default_grids() -> dict[str, list[EntropyParams]]:
    """Registered parameter grids: exactly ten sets per entropy method."""
    return {
        "fuzzy_en": [EntropyParams(m=m, r=r, n=2.0, tau=1)
                     for m in (1, 2) for r in (0.10, 0.15, 0.20, 0.25, 0.30)],
        "dist_en": [EntropyParams(m=m, bins=b)
                    for m in (2, 3) for b in (64, 128, 256, 512, 1024)],
        "svd_en": [EntropyParams(m=m, tau=t) for m in (3, 4, 5, 6, 7) for t in (1, 2)],
        "perm_en": [EntropyParams(m=m, tau=t) for m in (3, 4, 5, 6, 7) for t in (1, 2)],
        "phase_en": [EntropyParams(sectors=s, tau=t)
                     for s in (4, 8, 16, 32, 64) for t in (1, 2)],
    }


def validate_grids(grids: dict[str, list[EntropyParams]]) -> None:
    for method in ENTROPY_METHODS:
        sets = grids.get(method, [])
        if len(sets) != 10:
            raise ValueError(f"{method}: expected 10 parameter sets, got {len(sets)}")
        tags = [p.tag() for p in sets]
        if len(set(tags)) != len(tags):
            raise ValueError(f"{method}: duplicate parameter tags")


def grids_to_json(grids: dict[str, list[EntropyParams]]) -> dict:
    return {method: [p.to_dict() for p in sets] for method, sets in grids.items()}


def grids_from_json(obj: dict) -> dict[str, list[EntropyParams]]:
    return {method: [EntropyParams(**d) for d in sets] for method, sets in obj.items()}


@dataclass(frozen=True)
class FeatureSpec:
    group: str
    aggregation: str
    method: str
    param_tag: str = ""

    @property
    def name(self) -> str:
        base = f"{self.group}.{self.aggregation}.{self.method}"
        return f"{base}.{self.param_tag}" if self.param_tag else base

    @classmethod
    def from_name(cls, name: str) -> "FeatureSpec":
        parts = name.split(".")
        if len(parts) == 3:
            return cls(parts[0], parts[1], parts[2])
        if len(parts) == 4:
            return cls(parts[0], parts[1], parts[2], parts[3])
        raise ValueError(f"bad feature name {name!r}")


def base_methods(grids: dict[str, list[EntropyParams]] | None = None) -> list[tuple[str, str]]:
    """The 64 (method, param_tag) pairs, statistical methods first."""
    grids = grids if grids is not None else default_grids()
    out = [(m, "") for m in STAT_METHODS]
    for method in ENTROPY_METHODS:
        out.extend((method, p.tag()) for p in grids[method])
    return out


def feature_names(grids: dict[str, list[EntropyParams]] | None = None) -> list[str]:
    """The 256 canonical names in deterministic (sorted) order."""
    names = [
        FeatureSpec(group, agg, method, tag).name
        for group in GROUPS
        for agg in AGGREGATIONS
        for method, tag in base_methods(grids)
    ]
    return sorted(names)


@dataclass
class FeatureVector:
    participant_id: str
    values: dict[str, float] = field(default_factory=dict)
    dropped_segments: dict[str, int] = field(default_factory=dict)

    def as_row(self, names: list[str]) -> list[float]:
        return [self.values[n] for n in names]


def stat_features(values: np.ndarray) -> dict[str, float]:
    """The 14 statistical descriptors; cv is missing when the mean is 0."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise ValueError("segment must have at least 2 samples")
    mean = float(np.mean(v))
    vmax = float(np.max(v))
    vmin = float(np.min(v))
    std = float(np.std(v, ddof=1))
    out = {
        "mean": mean,
        "max": vmax,
        "min": vmin,
        "range": vmax - vmin,
        "std": std,
        "variance": float(np.var(v, ddof=1)),
        "cv": std / mean if mean != 0.0 else math.nan,
    }
    for name, q in _PERCENTILES.items():
        out[name] = float(np.percentile(v, q))
    return out


def compute_entropy(values: np.ndarray, method: str, params: EntropyParams) -> float:
    if method == "fuzzy_en":
        return fuzzy_entropy(values, m=params.m, r=params.r, n=params.n, tau=params.tau)
    if method == "dist_en":
        return dist_entropy(values, m=params.m, bins=params.bins)
    if method == "svd_en":
        return svd_entropy(values, m=params.m, tau=params.tau)
    if method == "perm_en":
        return perm_entropy(values, m=params.m, tau=params.tau)
    if method == "phase_en":
        return phase_entropy(values, sectors=params.sectors, tau=params.tau)
    raise ValueError(f"unknown entropy method {method!r}")


def _segment_block(values: np.ndarray, grids: dict[str, list[EntropyParams]]) -> dict[str, float]:
    """All 64 base features for one segment.

    Fuzzy and distribution entropy share cached pairwise-distance matrices
    across their parameter grids when the grids permit (tau=1, n=2); other
    methods are cheap enough to call directly.
    """
    out: dict[str, float] = {}
    try:
        out.update(stat_features(values))
    except ValueError:
        out.update({method: math.nan for method in STAT_METHODS})

    x = np.asarray(values, dtype=np.float64)
    n_len = x.size
    sd = float(np.std(x))

    fuzzy_sets = grids["fuzzy_en"]
    fast_fuzzy = sd > 0.0 and all(p.tau == 1 and p.n == 2.0 for p in fuzzy_sets)
    if fast_fuzzy:
        dims = sorted({p.m for p in fuzzy_sets} | {p.m + 1 for p in fuzzy_sets})
        cache = {m: _chebyshev_centered(x, m, 1) if n_len - (m - 1) >= 1 else None for m in dims}
        for p in fuzzy_sets:
            k = n_len - p.m
            if k < 2 or n_len < p.m + 2:
                out[f"fuzzy_en.{p.tag()}"] = math.nan
                continue
            r_abs = p.r * sd
            d_m = cache[p.m][:k, :k]
            d_m1 = cache[p.m + 1][:k, :k]
            phi_m = entropies._phi(d_m, r_abs, p.n)
            phi_m1 = entropies._phi(d_m1, r_abs, p.n)
            out[f"fuzzy_en.{p.tag()}"] = math.log(phi_m) - math.log(phi_m1)
    else:
        for p in fuzzy_sets:
            out[f"fuzzy_en.{p.tag()}"] = compute_entropy(x, "fuzzy_en", p)

    dist_sets = grids["dist_en"]
    dist_cache: dict[int, np.ndarray | None] = {}
    for m in sorted({p.m for p in dist_sets}):
        if n_len < m + 1:
            dist_cache[m] = None
            continue
        dist = _chebyshev_plain(x, m)
        iu = np.triu_indices(dist.shape[0], k=1)
        dist_cache[m] = dist[iu]
    for p in dist_sets:
        d = dist_cache[p.m]
        if d is None:
            out[f"dist_en.{p.tag()}"] = math.nan
            continue
        counts = _dist_hist(d, p.bins)
        if counts.size == 0:
            out[f"dist_en.{p.tag()}"] = 0.0
        else:
            probs = counts[counts > 0] / d.size
            h = -float(np.sum(probs * np.log2(probs)))
            out[f"dist_en.{p.tag()}"] = h / math.log2(p.bins)

    for method in ("svd_en", "perm_en", "phase_en"):
        for p in grids[method]:
            out[f"{method}.{p.tag()}"] = compute_entropy(x, method, p)
    return out


def per_segment_series(
    segmentation: Segmentation,
    group: str,
    method: str,
    params: EntropyParams | None = None,
) -> tuple[list[float], int]:
    """Per-segment feature series in temporal order; missing entries dropped.

    Returns (series, n_dropped).
    """
    values = []
    dropped = 0
    for seg in segmentation.of_kind(group):
        if method in STAT_METHODS:
            try:
                v = stat_features(seg.values)[method]
            except ValueError:
                v = math.nan
        else:
            v = compute_entropy(seg.values, method, params or EntropyParams())
        if math.isnan(v):
            dropped += 1
        else:
            values.append(v)
    return values, dropped


def aggregate(ts: list[float]) -> tuple[float, float]:
    """Mean and sample std of a per-segment series; empty -> (nan, nan)."""
    if len(ts) == 0:
        return math.nan, math.nan
    arr = np.asarray(ts, dtype=np.float64)
    mean = float(np.mean(arr))
    std = 0.0 if arr.size == 1 else float(np.std(arr, ddof=1))
    return mean, std


def extract_all(
    segmentation: Segmentation,
    grids: dict[str, list[EntropyParams]] | None = None,
) -> FeatureVector:
    """The full 256-entry feature vector for one participant."""
    grids = grids if grids is not None else default_grids()
    validate_grids(grids)
    methods = base_methods(grids)
    vector = FeatureVector(segmentation.participant_id)
    for group in GROUPS:
        segments = segmentation.of_kind(group)
        blocks = [_segment_block(seg.values, grids) for seg in segments]
        for method, tag in methods:
            key = f"{method}.{tag}" if tag else method
            series = [b[key] for b in blocks if not math.isnan(b[key])]
            dropped = len(blocks) - len(series)
            if dropped:
                vector.dropped_segments[f"{group}.{key}"] = dropped
            mean, std = aggregate(series)
            spec_mean = FeatureSpec(group, "mean", method, tag)
            spec_std = FeatureSpec(group, "std", method, tag)
            vector.values[spec_mean.name] = mean
            vector.values[spec_std.name] = std
    assert len(vector.values) == 256
    return vector


def write_feature_csv(path: Path | str, vectors: list[FeatureVector],
                      grids: dict[str, list[EntropyParams]] | None = None) -> list[str]:
    """Feature matrix CSV: participant_id plus the 256 canonical columns.

    Missing values are written as empty cells.  Returns the column order.
    """
    names = feature_names(grids)
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["participant_id"] + names)
        for vec in vectors:
            row = [vec.participant_id]
            for name in names:
                value = vec.values[name]
                row.append("" if math.isnan(value) else repr(float(value)))
            writer.writerow(row)
    return names


def write_grid_sidecar(path: Path | str, grids: dict[str, list[EntropyParams]] | None = None) -> None:
    grids = grids if grids is not None else default_grids()
    with Path(path).open("w") as handle:
        json.dump(grids_to_json(grids), handle, indent=2, sort_keys=True)
        handle.write("\n")


def read_feature_csv(path: Path | str) -> tuple[list[str], list[str], np.ndarray]:
    """Read a feature matrix CSV back into (participant_ids, names, matrix)."""
    with Path(path).open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if not header or header[0] != "participant_id":
            raise ValueError(f"{path}: not a feature matrix CSV")
        names = header[1:]
        ids = []
        rows = []
        for row in reader:
            ids.append(row[0])
            rows.append([math.nan if cell == "" else float(cell) for cell in row[1:]])
    return ids, names, np.asarray(rows, dtype=np.float64)
