"""Segmentation figures rendered to standalone SVG files.

SVG output is deterministic (fixed hashsalt, no embedded date) and each
activity/rest band carries a ``gid`` so tests can compare figures
structurally instead of pixel-wise.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .segmentation import ACTIVITY, Segmentation, SegmentationConfig, moving_average, segmentation_threshold

_BAND_COLORS = {True: "#f4a259", False: "#5b8e7d"}


def render_segmentation_svg(path: Path | str, segmentation: Segmentation,
                            cfg: SegmentationConfig | None = None) -> None:
    cfg = cfg or SegmentationConfig()
    values = segmentation.cleaned_values
    smoothed = moving_average(values, cfg.smoothing_window)
    threshold = segmentation_threshold(
        smoothed if cfg.threshold_on == "smoothed" else values, cfg)

    with plt.rc_context({"svg.hashsalt": "actipipe"}):
        fig, ax = plt.subplots(figsize=(12, 3.5))
        ax.plot(values, color="#c8c8c8", linewidth=0.4, label="counts")
        ax.plot(smoothed, color="#1f3b4d", linewidth=1.2, label="smoothed")
        ax.axhline(threshold, color="#b23a48", linewidth=1.0, linestyle="--", label="threshold")
        band_counts = {ACTIVITY: 0, "rest": 0}
        for seg in segmentation.segments:
            is_activity = seg.kind == ACTIVITY
            span = ax.axvspan(seg.start_idx, seg.end_idx, alpha=0.25,
                              color=_BAND_COLORS[is_activity])
            span.set_gid(f"band-{seg.kind}-{band_counts[seg.kind]}")
            band_counts[seg.kind] += 1
        ax.set_xlim(0, segmentation.cleaned_length)
        ax.set_xlabel("minutes (cleaned)")
        ax.set_ylabel("activity (a.u.)")
        ax.set_title(f"participant {segmentation.participant_id}")
        ax.legend(loc="upper right", fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
