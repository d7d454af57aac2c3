"""Activity/rest segmentation of cleaned actigram series.

Pipeline: clean -> smooth -> kernel change-point detection -> threshold
classification -> merge.  The merge stage coalesces same-kind neighbours,
absorbs rest segments shorter than ``min_rest`` into activity, then
activity segments shorter than ``min_activity`` into rest, repeating to a
fixpoint so the final kinds strictly alternate.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .changepoint import detect_change_points, median_heuristic_bandwidth
from .errors import EmptySeriesError
from .ingest import ActigramSeries

ACTIVITY: "SegmentKind" = "activity"
REST: "SegmentKind" = "rest"
SegmentKind = Literal["activity", "rest"]


@dataclass
class SegmentationConfig:
    smoothing_window: int = 60          # minutes
    max_inactivity: int = 720           # zero runs longer than this are removed
    threshold_factor: float = 0.75      # fraction of the median smoothed value
    min_rest: int = 180                 # minutes
    min_activity: int = 240             # minutes
    cpd_kernel: str = "rbf"
    cpd_penalty: float = 10.0
    rbf_bandwidth: float | None = None  # None = median heuristic
    threshold_on: str = "smoothed"      # or "raw": curve the median is taken over

    def __post_init__(self):
        if self.smoothing_window < 1 or self.max_inactivity < 1:
            raise ValueError("durations must be positive")
        if self.min_rest < 1 or self.min_activity < 1:
            raise ValueError("durations must be positive")
        if not 0.0 < self.threshold_factor <= 1.0:
            raise ValueError("threshold_factor must be in (0, 1]")
        if self.cpd_penalty < 0:
            raise ValueError("cpd_penalty must be non-negative")
        if self.threshold_on not in ("smoothed", "raw"):
            raise ValueError("threshold_on must be 'smoothed' or 'raw'")


@dataclass
class Segment:
    kind: SegmentKind
    start_idx: int                      # inclusive, cleaned-series minutes
    end_idx: int                        # exclusive
    values: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    def __post_init__(self):
        if self.end_idx <= self.start_idx:
            raise ValueError("segment must be non-empty")

    @property
    def length(self) -> int:
        return self.end_idx - self.start_idx


@dataclass
class Segmentation:
    participant_id: str
    segments: list[Segment]
    cleaned_length: int
    cleaned_values: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    index_map: np.ndarray | None = field(default=None, repr=False)

    def of_kind(self, kind: SegmentKind) -> list[Segment]:
        return [s for s in self.segments if s.kind == kind]

    def boundaries(self) -> list[int]:
        """Interior boundaries plus the final index, in cleaned minutes."""
        return [s.end_idx for s in self.segments]

    def source_span(self, segment: Segment) -> tuple[int, int]:
        """Map a segment back to original minute indices (end exclusive)."""
        if self.index_map is None:
            return segment.start_idx, segment.end_idx
        return int(self.index_map[segment.start_idx]), int(self.index_map[segment.end_idx - 1]) + 1


def clean_series(series: ActigramSeries, cfg: SegmentationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Splice out gaps and remove maximal zero runs longer than max_inactivity.

    Returns (values, index_map) where index_map[i] is the original minute
    index of cleaned sample i.
    """
    values = series.counts.copy()
    index_map = series.minutes.copy()

    keep = np.ones(values.size, dtype=bool)
    is_zero = values == 0
    if is_zero.any():
        # maximal runs of zeros in the spliced sequence
        padded = np.concatenate([[False], is_zero, [False]])
        edges = np.diff(padded.astype(np.int8))
        starts = np.nonzero(edges == 1)[0]
        ends = np.nonzero(edges == -1)[0]
        for start, end in zip(starts, ends):
            if end - start > cfg.max_inactivity:
                keep[start:end] = False
    values = values[keep]
    index_map = index_map[keep]
    if values.size == 0:
        raise EmptySeriesError(f"series {series.participant_id!r} empty after cleaning")
    return values, index_map


def moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving mean; the window is truncated at the boundaries."""
    if window < 1:
        raise ValueError("window must be >= 1")
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return v.copy()
    if window == 1:
        return v.copy()
    left = (window - 1) // 2
    right = window // 2
    cs = np.concatenate([[0.0], np.cumsum(v)])
    idx = np.arange(v.size)
    lo = np.maximum(idx - left, 0)
    hi = np.minimum(idx + right + 1, v.size)
    return (cs[hi] - cs[lo]) / (hi - lo)


def classify_segments(
    smoothed: np.ndarray,
    breakpoints: list[int],
    cfg: SegmentationConfig,
    threshold_curve: np.ndarray | None = None,
) -> list[Segment]:
    """Label each inter-breakpoint span activity/rest against the global threshold."""
    curve = smoothed if threshold_curve is None else threshold_curve
    threshold = cfg.threshold_factor * float(np.median(curve))
    segments = []
    start = 0
    for end in breakpoints:
        mean = float(np.mean(smoothed[start:end]))
        kind: SegmentKind = ACTIVITY if mean > threshold else REST
        segments.append(Segment(kind, start, end, smoothed[start:end]))
        start = end
    return segments


def segmentation_threshold(smoothed: np.ndarray, cfg: SegmentationConfig) -> float:
    return cfg.threshold_factor * float(np.median(smoothed))


def _coalesce(segments: list[Segment]) -> list[Segment]:
    out: list[Segment] = []
    for seg in segments:
        if out and out[-1].kind == seg.kind:
            prev = out[-1]
            out[-1] = replace(prev, end_idx=seg.end_idx)
        else:
            out.append(replace(seg))
    return out


def _absorb_short(segments: list[Segment], kind: SegmentKind, min_len: int) -> list[Segment]:
    # relabel every too-short segment of the given kind; coalescing afterwards
    # merges it into its (opposite-kind) neighbours
    if len(segments) <= 1:
        return segments
    other: SegmentKind = REST if kind == ACTIVITY else ACTIVITY
    out = []
    for seg in segments:
        if seg.kind == kind and seg.length < min_len:
            out.append(replace(seg, kind=other))
        else:
            out.append(replace(seg))
    return _coalesce(out)


def merge_segments(provisional: list[Segment], cfg: SegmentationConfig,
                   participant_id: str = "", cleaned_values: np.ndarray | None = None,
                   index_map: np.ndarray | None = None) -> Segmentation:
    if not provisional:
        raise EmptySeriesError("no provisional segments")
    for a, b in zip(provisional, provisional[1:]):
        if a.end_idx != b.start_idx:
            raise ValueError("provisional segments must be contiguous")
    segments = _coalesce(provisional)
    while True:
        before = [(s.kind, s.start_idx, s.end_idx) for s in segments]
        segments = _absorb_short(segments, REST, cfg.min_rest)
        segments = _absorb_short(segments, ACTIVITY, cfg.min_activity)
        after = [(s.kind, s.start_idx, s.end_idx) for s in segments]
        if before == after:
            break
    if cleaned_values is not None:
        segments = [replace(s, values=cleaned_values[s.start_idx:s.end_idx]) for s in segments]
    return Segmentation(
        participant_id=participant_id,
        segments=segments,
        cleaned_length=provisional[-1].end_idx,
        cleaned_values=cleaned_values if cleaned_values is not None else np.empty(0),
        index_map=index_map,
    )


def segment_pipeline(series: ActigramSeries, cfg: SegmentationConfig | None = None) -> Segmentation:
    cfg = cfg or SegmentationConfig()
    cleaned, index_map = clean_series(series, cfg)
    smoothed = moving_average(cleaned, cfg.smoothing_window)
    bandwidth = cfg.rbf_bandwidth
    if cfg.cpd_kernel == "rbf" and bandwidth is None:
        bandwidth = median_heuristic_bandwidth(smoothed)
    breakpoints = detect_change_points(smoothed, cfg.cpd_penalty, cfg.cpd_kernel, bandwidth)
    threshold_curve = smoothed if cfg.threshold_on == "smoothed" else cleaned
    provisional = classify_segments(smoothed, breakpoints, cfg, threshold_curve)
    return merge_segments(provisional, cfg, series.participant_id, cleaned, index_map)
