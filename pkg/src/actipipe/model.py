"""KNN / LOOCV classification with MCC-based evaluation and feature search.

All metrics are computed on the confusion matrix pooled over the held-out
predictions of every LOOCV fold.  Imputation (column means) and min-max
scaling are fit per fold on the training split by default (``fold_safe``);
``global`` mode fits them once on the whole matrix.
"""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLabelsError

log = logging.getLogger(__name__)


@dataclass
class ModelConfig:
    k_neighbors: int = 5
    k_grid: tuple[int, ...] = (1, 3, 5, 7, 9, 11, 15)
    distance: str = "euclidean"
    leakage_mode: str = "fold_safe"     # or "global"
    selection_max_size: int = 5
    target: str = "fa"                  # or "sc"

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be positive")
        if self.distance != "euclidean":
            raise ValueError("only euclidean distance is supported")
        if self.leakage_mode not in ("fold_safe", "global"):
            raise ValueError("leakage_mode must be fold_safe or global")
        if self.selection_max_size < 1:
            raise ValueError("selection_max_size must be >= 1")
        if self.target not in ("fa", "sc"):
            raise ValueError("target must be fa or sc")


@dataclass
class ImputerParams:
    means: np.ndarray
    dropped: list[int] = field(default_factory=list)


@dataclass
class ScalerParams:
    mins: np.ndarray
    maxs: np.ndarray


@dataclass
class ConfusionMatrix:
    labels: list[int]
    counts: np.ndarray                  # rows = actual, cols = predicted

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.labels)
        if self.counts.shape != (k, k):
            raise ValueError("counts must be square over labels")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class ClassMetrics:
    label: int
    sensitivity: float
    specificity: float
    f1: float


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    mcc: float
    accuracy: float
    per_class: list[ClassMetrics]
    pooled: bool = True
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "labels": list(self.confusion.labels),
            "confusion": self.confusion.counts.tolist(),
            "mcc": self.mcc,
            "accuracy": self.accuracy,
            "per_class": [
                {"label": c.label, "sensitivity": c.sensitivity,
                 "specificity": c.specificity, "f1": c.f1}
                for c in self.per_class
            ],
            "pooled": self.pooled,
            "degenerate": self.degenerate,
        }


@dataclass
class SelectionResult:
    chosen_features: list[str]
    trajectory: list[tuple[str, float]]
    final_report: EvalReport

    def to_dict(self) -> dict:
        return {
            "chosen_features": list(self.chosen_features),
            "trajectory": [{"feature": f, "mcc": m} for f, m in self.trajectory],
            "final_report": self.final_report.to_dict(),
        }


def impute_mean(train: np.ndarray, apply_to: np.ndarray) -> tuple[np.ndarray, np.ndarray, ImputerParams]:
    """Fill NaNs with per-column training means; all-missing columns are zeroed."""
    train = np.asarray(train, dtype=np.float64)
    apply_to = np.asarray(apply_to, dtype=np.float64)
    with np.errstate(invalid="ignore"), warnings.catch_warnings():
        # all-missing columns are handled explicitly below
        warnings.simplefilter("ignore", category=RuntimeWarning)
        means = np.nanmean(train, axis=0)
    dropped = [int(i) for i in np.nonzero(np.isnan(means))[0]]
    if dropped:
        log.warning("impute_mean: features with no training values set to 0: %s", dropped)
        means = np.where(np.isnan(means), 0.0, means)
    filled_train = np.where(np.isnan(train), means, train)
    filled_apply = np.where(np.isnan(apply_to), means, apply_to)
    return filled_train, filled_apply, ImputerParams(means, dropped)


def minmax_scale(train: np.ndarray, apply_to: np.ndarray) -> tuple[np.ndarray, np.ndarray, ScalerParams]:
    """Scale to (v-min)/(max-min) with train stats; constant columns map to 0.

    Values outside the training range are not clipped.
    """
    train = np.asarray(train, dtype=np.float64)
    apply_to = np.asarray(apply_to, dtype=np.float64)
    mins = train.min(axis=0)
    maxs = train.max(axis=0)
    span = maxs - mins
    safe = np.where(span == 0, 1.0, span)
    scaled_train = np.where(span == 0, 0.0, (train - mins) / safe)
    scaled_apply = np.where(span == 0, 0.0, (apply_to - mins) / safe)
    return scaled_train, scaled_apply, ScalerParams(mins, maxs)


def knn_predict(train_x: np.ndarray, train_y: np.ndarray, query: np.ndarray, k: int) -> int:
    """Majority vote among the k nearest neighbours.

    Distance ties are broken by training-row order (stable sort), vote ties
    by the smallest class code.
    """
    if train_x.shape[0] == 0:
        raise ValueError("empty training set")
    if k > train_x.shape[0]:
        raise ValueError("k exceeds training-set size")
    dist = np.sqrt(np.sum((train_x - query) ** 2, axis=1))
    order = np.argsort(dist, kind="stable")[:k]
    labels, counts = np.unique(train_y[order], return_counts=True)
    return int(labels[np.argmax(counts)])


def _prepare_fold(train: np.ndarray, test: np.ndarray, mode: str,
                  full: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    if mode == "global":
        assert full is not None
        filled_full, _, imp = impute_mean(full, full)
        _, _, scaler = minmax_scale(filled_full, filled_full)
        span = scaler.maxs - scaler.mins
        safe = np.where(span == 0, 1.0, span)
        filled_train = np.where(np.isnan(train), imp.means, train)
        filled_test = np.where(np.isnan(test), imp.means, test)
        scaled_train = np.where(span == 0, 0.0, (filled_train - scaler.mins) / safe)
        scaled_test = np.where(span == 0, 0.0, (filled_test - scaler.mins) / safe)
        return scaled_train, scaled_test
    filled_train, filled_test, _ = impute_mean(train, test)
    scaled_train, scaled_test, _ = minmax_scale(filled_train, filled_test)
    return scaled_train, scaled_test


def loocv(x: np.ndarray, y: np.ndarray, cfg: ModelConfig | None = None,
          k: int | None = None) -> EvalReport:
    """Leave-one-out evaluation with pooled-confusion metrics."""
    cfg = cfg or ModelConfig()
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=np.int64)
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least 2 samples")
    labels = sorted(int(v) for v in np.unique(y))
    if len(labels) < 2:
        cm = ConfusionMatrix(labels, np.array([[n]]))
        return EvalReport(cm, 0.0, 1.0, [ClassMetrics(labels[0], 1.0, 0.0, 1.0)],
                          degenerate=True)
    k = k if k is not None else cfg.k_neighbors
    k = min(k, n - 1)
    label_pos = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    mask = np.ones(n, dtype=bool)
    for i in range(n):
        mask[i] = False
        train_x, test_x = _prepare_fold(x[mask], x[i:i + 1], cfg.leakage_mode, full=x)
        pred = knn_predict(train_x, y[mask], test_x[0], k)
        counts[label_pos[int(y[i])], label_pos[pred]] += 1
        mask[i] = True
    cm = ConfusionMatrix(labels, counts)
    return evaluate_confusion(cm)


def mcc_binary(cm: ConfusionMatrix) -> float:
    """Matthews correlation for a 2x2 matrix; zero denominator gives 0."""
    if len(cm.labels) != 2:
        raise ValueError("mcc_binary needs a 2x2 confusion matrix")
    c = cm.counts.astype(np.float64)
    tn, fp = c[0, 0], c[0, 1]
    fn, tp = c[1, 0], c[1, 1]
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return float((tp * tn - fp * fn) / math.sqrt(denom))


def mcc_multiclass(cm: ConfusionMatrix) -> float:
    """Gorodkin R_K generalization of the Matthews correlation."""
    c = cm.counts.astype(np.float64)
    s = c.sum()
    correct = np.trace(c)
    t = c.sum(axis=1)   # actual totals
    p = c.sum(axis=0)   # predicted totals
    num = correct * s - float(t @ p)
    denom = math.sqrt(s * s - float(p @ p)) * math.sqrt(s * s - float(t @ t))
    if denom == 0:
        return 0.0
    return float(num / denom)


def confusion_metrics(cm: ConfusionMatrix) -> tuple[float, list[ClassMetrics]]:
    """Accuracy plus one-vs-rest sensitivity/specificity/F1; 0/0 gives 0."""
    c = cm.counts.astype(np.float64)
    total = c.sum()
    accuracy = float(np.trace(c) / total) if total else 0.0
    per_class = []
    for i, label in enumerate(cm.labels):
        tp = c[i, i]
        fn = c[i].sum() - tp
        fp = c[:, i].sum() - tp
        tn = total - tp - fn - fp
        sens = tp / (tp + fn) if tp + fn else 0.0
        spec = tn / (tn + fp) if tn + fp else 0.0
        prec = tp / (tp + fp) if tp + fp else 0.0
        f1 = 2 * prec * sens / (prec + sens) if prec + sens else 0.0
        per_class.append(ClassMetrics(int(label), float(sens), float(spec), float(f1)))
    return accuracy, per_class


def evaluate_confusion(cm: ConfusionMatrix) -> EvalReport:
    mcc = mcc_binary(cm) if len(cm.labels) == 2 else mcc_multiclass(cm)
    accuracy, per_class = confusion_metrics(cm)
    return EvalReport(cm, mcc, accuracy, per_class)


def _selection_mcc(x: np.ndarray, y: np.ndarray, cols: list[int], cfg: ModelConfig) -> float:
    return loocv(x[:, cols], y, cfg).mcc


def forward_select(x: np.ndarray, y: np.ndarray, names: list[str],
                   cfg: ModelConfig | None = None) -> SelectionResult:
    """Greedy forward selection maximizing pooled LOOCV MCC.

    Candidates are examined in canonical-name order, so MCC ties resolve to
    the lexicographically smallest feature.
    """
    cfg = cfg or ModelConfig()
    if len(names) == 0:
        raise ValueError("no candidate features")
    if len(set(np.asarray(y).tolist())) < 2:
        raise DegenerateLabelsError("target labels contain a single class")
    order = sorted(range(len(names)), key=lambda i: names[i])
    chosen: list[int] = []
    trajectory: list[tuple[str, float]] = []
    best_mcc = -math.inf
    while len(chosen) < cfg.selection_max_size:
        best_col = None
        best_score = best_mcc
        for col in order:
            if col in chosen:
                continue
            score = _selection_mcc(x, y, chosen + [col], cfg)
            if score > best_score:
                best_score = score
                best_col = col
        if best_col is None:
            break
        chosen.append(best_col)
        best_mcc = best_score
        trajectory.append((names[best_col], best_mcc))
    final = loocv(x[:, chosen], y, cfg)
    return SelectionResult([names[c] for c in chosen], trajectory, final)


def exhaustive_select(x: np.ndarray, y: np.ndarray, names: list[str],
                      cfg: ModelConfig | None = None, max_size: int = 3) -> SelectionResult:
    """Exhaustive search over subsets of size <= max_size (cross-check aid)."""
    cfg = cfg or ModelConfig()
    order = sorted(range(len(names)), key=lambda i: names[i])
    best: tuple[float, list[int]] = (-math.inf, [])
    for size in range(1, max_size + 1):
        for combo in itertools.combinations(order, size):
            score = _selection_mcc(x, y, list(combo), cfg)
            if score > best[0]:
                best = (score, list(combo))
    cols = best[1]
    final = loocv(x[:, cols], y, cfg)
    trajectory = [(names[c], best[0]) for c in cols]
    return SelectionResult([names[c] for c in cols], trajectory, final)


def sweep_k(x: np.ndarray, y: np.ndarray, cfg: ModelConfig | None = None) -> tuple[int, dict[int, float]]:
    """Pooled LOOCV MCC per k on the grid; ties go to the smaller k."""
    cfg = cfg or ModelConfig()
    if not cfg.k_grid:
        raise ValueError("k_grid must be non-empty")
    scores: dict[int, float] = {}
    for k in sorted(cfg.k_grid):
        scores[k] = loocv(x, y, cfg, k=k).mcc
    best_k = max(sorted(scores), key=lambda k: scores[k])
    # max() keeps the first (smallest) k on ties because of the sorted scan
    return best_k, scores
