"""Pearson correlation between actimetric and subjective features.

Two-tailed p-values come from the exact Student-t distribution with n-2
degrees of freedom, evaluated through the regularized incomplete beta
function.  Stars follow the usual convention: * for p < 0.05, ** for
p < 0.01.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

from .errors import InsufficientDataError, UndefinedStatisticError

SUBJECTIVE_COLUMNS = ["bmi_pct", "zsdsi", "debq_restr", "debq_extern", "debq_emo"]


@dataclass
class CorrelationCell:
    r: float
    n: int
    p: float
    stars: str

    @staticmethod
    def stars_for(p: float) -> str:
        if p < 0.01:
            return "**"
        if p < 0.05:
            return "*"
        return ""


def student_t_two_tailed(t: float, df: int) -> float:
    """P(|T| >= t) for T ~ Student-t with df degrees of freedom."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if math.isinf(t):
        return 0.0
    return float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))


def pearson_r(x, y) -> CorrelationCell:
    """Sample Pearson correlation with pairwise deletion of missing entries."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise ValueError("x and y must have equal length")
    mask = ~(np.isnan(x) | np.isnan(y))
    x, y = x[mask], y[mask]
    n = int(x.size)
    if n < 3:
        raise InsufficientDataError(f"need at least 3 paired observations, got {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt(np.sum(xc * xc)))
    sy = float(np.sqrt(np.sum(yc * yc)))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedStatisticError("zero variance in one of the variables")
    r = float(np.sum(xc * yc) / (sx * sy))
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = abs(r) * math.sqrt(df / (1.0 - r * r))
        p = student_t_two_tailed(t, df)
    return CorrelationCell(r=r, n=n, p=p, stars=CorrelationCell.stars_for(p))


def correlation_table(
    feature_matrix: np.ndarray,
    feature_names: list[str],
    subjective_matrix: np.ndarray,
    selected: list[str],
    subjective_names: list[str] | None = None,
) -> dict[str, dict[str, CorrelationCell | None]]:
    """Grid of cells over (selected actimetric feature x subjective column).

    Cells that cannot be computed (too few pairs, zero variance) are None.
    """
    subjective_names = subjective_names or SUBJECTIVE_COLUMNS
    name_idx = {n: i for i, n in enumerate(feature_names)}
    missing = [s for s in selected if s not in name_idx]
    if missing:
        raise ValueError(f"selected features not in matrix: {missing}")
    grid: dict[str, dict[str, CorrelationCell | None]] = {}
    for feat in selected:
        row: dict[str, CorrelationCell | None] = {}
        for j, subj in enumerate(subjective_names):
            try:
                row[subj] = pearson_r(feature_matrix[:, name_idx[feat]], subjective_matrix[:, j])
            except (InsufficientDataError, UndefinedStatisticError):
                row[subj] = None
        grid[feat] = row
    return grid


def write_correlation_csv(path: Path | str, grid: dict[str, dict[str, CorrelationCell | None]],
                          subjective_names: list[str] | None = None) -> None:
    """Mirror the published layout: significant cells as r+stars, others '-'."""
    subjective_names = subjective_names or SUBJECTIVE_COLUMNS
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["group", "aggregation", "method"] + subjective_names)
        for feat, row in grid.items():
            parts = feat.split(".")
            group, agg = parts[0], parts[1]
            method = ".".join(parts[2:])
            cells = []
            for subj in subjective_names:
                cell = row[subj]
                if cell is None or cell.p >= 0.05:
                    cells.append("-")
                else:
                    cells.append(f"{cell.r:.3f}{cell.stars}")
            writer.writerow([group, agg, method] + cells)
