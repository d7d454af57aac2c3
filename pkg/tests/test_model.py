import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actipipe.errors import DegenerateLabelsError
from actipipe.model import (
    ConfusionMatrix,
    ModelConfig,
    confusion_metrics,
    evaluate_confusion,
    exhaustive_select,
    forward_select,
    impute_mean,
    knn_predict,
    loocv,
    mcc_binary,
    mcc_multiclass,
    minmax_scale,
    sweep_k,
)

# Published confusion matrices used as numeric anchors (rows = actual).
FA_CONFUSION = ConfusionMatrix([0, 1], np.array([[68, 0], [2, 8]]))
SC_CONFUSION_BOTH = ConfusionMatrix(
    [1, 2, 3, 4],
    np.array([[27, 3, 0, 3], [4, 11, 0, 1], [9, 3, 3, 0], [3, 1, 0, 10]]),
)
SC_CONFUSION_OAS = ConfusionMatrix(
    [1, 2, 3, 4],
    np.array([[31, 0, 1, 1], [9, 6, 0, 1], [11, 1, 1, 2], [4, 0, 0, 10]]),
)


# ------------------------------------------------------------ preprocessing

def test_impute_mean_basic():
    train = np.array([[1.0], [2.0], [np.nan], [3.0]])
    filled, _, params = impute_mean(train, train)
    assert filled[2, 0] == 2.0
    assert params.means[0] == 2.0


def test_impute_mean_no_missing_identity():
    train = np.array([[1.0, 2.0], [3.0, 4.0]])
    filled, applied, _ = impute_mean(train, train)
    assert np.array_equal(filled, train)
    assert np.array_equal(applied, train)


def test_impute_mean_all_missing_column_zeroed():
    train = np.array([[np.nan, 1.0], [np.nan, 3.0]])
    filled, _, params = impute_mean(train, train)
    assert params.dropped == [0]
    assert np.all(filled[:, 0] == 0.0)


def test_minmax_scale_basic():
    train = np.array([[0.0], [5.0], [10.0]])
    scaled, _, _ = minmax_scale(train, train)
    assert scaled[:, 0].tolist() == [0.0, 0.5, 1.0]


def test_minmax_scale_constant_column():
    train = np.array([[4.0], [4.0], [4.0]])
    scaled, _, _ = minmax_scale(train, train)
    assert np.all(scaled == 0.0)


def test_minmax_scale_no_clipping():
    train = np.array([[2.0], [6.0]])
    _, applied, _ = minmax_scale(train, np.array([[8.0]]))
    assert applied[0, 0] == 1.5


# ------------------------------------------------------------ knn

def test_knn_query_equals_training_point():
    x = np.array([[0.0, 0.0], [5.0, 5.0]])
    y = np.array([3, 9])
    assert knn_predict(x, y, np.array([5.0, 5.0]), 1) == 9


def test_knn_single_class():
    x = np.random.default_rng(0).normal(size=(10, 2))
    y = np.full(10, 4)
    assert knn_predict(x, y, np.zeros(2), 5) == 4


def test_knn_matches_exhaustive_distance_oracle():
    x = np.array([[0, 0], [1, 0], [0, 1], [5, 5], [6, 5], [5, 6]], dtype=float)
    y = np.array([0, 0, 0, 1, 1, 1])
    for query in (np.array([0.4, 0.4]), np.array([5.2, 5.4]), np.array([2.5, 2.5])):
        dists = np.linalg.norm(x - query, axis=1)
        order = np.argsort(dists, kind="stable")[:3]
        votes = y[order]
        values, counts = np.unique(votes, return_counts=True)
        expected = int(values[np.argmax(counts)])
        assert knn_predict(x, y, query, 3) == expected


def test_knn_distance_tie_row_order_and_vote_tie_smallest_class():
    x = np.array([[1.0], [-1.0]])
    y = np.array([7, 2])
    # both rows at distance 1; k=2 -> vote tie -> smallest class code
    assert knn_predict(x, y, np.array([0.0]), 2) == 2
    # k=1 -> distance tie -> earlier training row wins
    assert knn_predict(x, y, np.array([0.0]), 1) == 7


def test_knn_errors():
    with pytest.raises(ValueError):
        knn_predict(np.empty((0, 1)), np.empty(0, dtype=int), np.zeros(1), 1)
    with pytest.raises(ValueError):
        knn_predict(np.ones((2, 1)), np.array([0, 1]), np.zeros(1), 3)


# ------------------------------------------------------------ loocv

def test_loocv_perfectly_separable():
    y = np.array([0] * 10 + [1] * 10)
    x = y.astype(float)[:, None]
    report = loocv(x, y, ModelConfig(k_neighbors=3))
    assert report.mcc == 1.0
    assert np.array_equal(report.confusion.counts, np.diag([10, 10]))


def test_loocv_shuffled_labels_near_zero():
    rng = np.random.default_rng(77)
    x = rng.normal(size=(78, 5))
    y = np.array([1] * 10 + [0] * 68)
    rng.shuffle(y)
    report = loocv(x, y, ModelConfig())
    assert abs(report.mcc) < 0.3


def test_loocv_deterministic():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(30, 4))
    y = rng.integers(0, 2, 30)
    a = loocv(x, y).to_dict()
    b = loocv(x, y).to_dict()
    assert a == b


def test_loocv_degenerate_single_class():
    x = np.ones((5, 2))
    report = loocv(x, np.zeros(5, dtype=int))
    assert report.degenerate
    assert report.mcc == 0.0


def test_loocv_global_vs_fold_safe_modes_differ_in_fit():
    # with one giant outlier, global scaling squashes the training points
    rng = np.random.default_rng(8)
    x = rng.normal(size=(20, 1))
    y = (x[:, 0] > 0).astype(int)
    a = loocv(x, y, ModelConfig(leakage_mode="fold_safe"))
    b = loocv(x, y, ModelConfig(leakage_mode="global"))
    # both run; reports are well-formed (values may or may not coincide)
    assert a.confusion.total == b.confusion.total == 20


def test_loocv_imputation_happens_per_fold():
    x = np.array([[np.nan], [1.0], [0.0], [1.0], [0.0], [1.0]])
    y = np.array([0, 1, 0, 1, 0, 1])
    report = loocv(x, y, ModelConfig(k_neighbors=1))
    assert report.confusion.total == 6


# ------------------------------------------------------------ MCC / metrics

def test_mcc_binary_published_fa_matrix():
    assert mcc_binary(FA_CONFUSION) == pytest.approx(0.8816, abs=5e-4)


def test_mcc_binary_perfect_and_degenerate():
    assert mcc_binary(ConfusionMatrix([0, 1], np.diag([5, 5]))) == 1.0
    assert mcc_binary(ConfusionMatrix([0, 1], np.array([[7, 0], [3, 0]]))) == 0.0


def test_mcc_binary_requires_2x2():
    with pytest.raises(ValueError):
        mcc_binary(SC_CONFUSION_BOTH)


def test_mcc_multiclass_published_matrices():
    assert mcc_multiclass(SC_CONFUSION_BOTH) == pytest.approx(0.51, abs=5e-3)
    assert mcc_multiclass(SC_CONFUSION_OAS) == pytest.approx(0.46, abs=5e-3)


def test_mcc_multiclass_identity():
    mcc = mcc_multiclass(ConfusionMatrix([1, 2, 3, 4], np.eye(4, dtype=int) * 5))
    assert mcc == pytest.approx(1.0, abs=1e-12)


def test_mcc_agreement_on_2x2():
    rng = np.random.default_rng(13)
    for _ in range(50):
        counts = rng.integers(0, 30, size=(2, 2))
        cm = ConfusionMatrix([0, 1], counts)
        assert abs(mcc_binary(cm) - mcc_multiclass(cm)) < 1e-12


def test_mcc_permutation_invariance():
    rng = np.random.default_rng(14)
    counts = rng.integers(0, 20, size=(4, 4))
    cm = ConfusionMatrix([1, 2, 3, 4], counts)
    perm = rng.permutation(4)
    cm2 = ConfusionMatrix([1, 2, 3, 4], counts[np.ix_(perm, perm)])
    assert mcc_multiclass(cm) == pytest.approx(mcc_multiclass(cm2), abs=1e-12)


def test_confusion_metrics_published_values():
    acc, per_class = confusion_metrics(SC_CONFUSION_BOTH)
    sc1 = per_class[0]
    assert sc1.sensitivity == pytest.approx(0.818, abs=1e-3)
    assert sc1.specificity == pytest.approx(0.644, abs=1e-3)
    assert sc1.f1 == pytest.approx(0.710, abs=1e-3)

    acc, per_class = confusion_metrics(FA_CONFUSION)
    assert acc == pytest.approx(0.974, abs=1e-3)
    assert per_class[1].sensitivity == pytest.approx(0.8, abs=1e-3)
    assert per_class[1].specificity == pytest.approx(1.0, abs=1e-3)
    assert per_class[1].f1 == pytest.approx(0.889, abs=1e-3)

    acc, _ = confusion_metrics(SC_CONFUSION_OAS)
    assert acc == pytest.approx(0.615, abs=5e-3)


def test_confusion_metrics_zero_over_zero_convention():
    cm = ConfusionMatrix([0, 1], np.array([[5, 0], [0, 0]]))
    _, per_class = confusion_metrics(cm)
    assert per_class[1].sensitivity == 0.0
    assert per_class[1].f1 == 0.0


def test_evaluate_confusion_dispatch():
    assert evaluate_confusion(FA_CONFUSION).mcc == pytest.approx(mcc_binary(FA_CONFUSION))
    assert evaluate_confusion(SC_CONFUSION_BOTH).mcc == pytest.approx(
        mcc_multiclass(SC_CONFUSION_BOTH))


# ------------------------------------------------------------ selection

def test_forward_select_one_good_feature():
    rng = np.random.default_rng(23)
    y = np.array([0] * 20 + [1] * 20)
    x = np.column_stack([rng.normal(size=40) for _ in range(20)] + [y.astype(float)])
    names = [f"noise_{i:02d}" for i in range(20)] + ["signal"]
    result = forward_select(x, y, names, ModelConfig(k_neighbors=3))
    assert result.chosen_features[0] == "signal"
    assert result.trajectory[0][1] == 1.0
    assert result.final_report.mcc == 1.0
    assert len(result.trajectory) == 1  # no strict improvement possible after


def test_forward_select_xor_interaction():
    rng = np.random.default_rng(29)
    # XOR-like interaction with skewed marginals, so each planted feature
    # alone carries a weak signal the greedy search can latch onto
    n = 80
    a = (rng.random(n) < 0.7).astype(int)
    b = (rng.random(n) < 0.3).astype(int)
    y = a ^ b
    x = np.column_stack([
        a + rng.normal(0, 0.05, n),
        b + rng.normal(0, 0.05, n),
        rng.normal(size=n),
        rng.normal(size=n),
    ])
    names = ["planted_a", "planted_b", "noise_1", "noise_2"]
    result = forward_select(x, y, names, ModelConfig(k_neighbors=3))
    assert {"planted_a", "planted_b"} <= set(result.chosen_features)
    assert result.final_report.mcc >= 0.8


def test_forward_select_deterministic_and_capped():
    rng = np.random.default_rng(31)
    x = rng.normal(size=(40, 12))
    y = rng.integers(0, 2, 40)
    cfg = ModelConfig(selection_max_size=3)
    a = forward_select(x, y, [f"f{i}" for i in range(12)], cfg)
    b = forward_select(x, y, [f"f{i}" for i in range(12)], cfg)
    assert a.to_dict() == b.to_dict()
    assert len(a.chosen_features) <= 3


def test_forward_select_degenerate_labels():
    with pytest.raises(DegenerateLabelsError):
        forward_select(np.ones((5, 2)), np.zeros(5, dtype=int), ["a", "b"])


def test_exhaustive_select_agrees_with_forward_on_easy_plant():
    rng = np.random.default_rng(37)
    y = np.array([0] * 15 + [1] * 15)
    x = np.column_stack([rng.normal(size=30), y.astype(float), rng.normal(size=30)])
    names = ["n1", "signal", "n2"]
    fwd = forward_select(x, y, names, ModelConfig(k_neighbors=3))
    exh = exhaustive_select(x, y, names, ModelConfig(k_neighbors=3), max_size=2)
    assert fwd.final_report.mcc == exh.final_report.mcc == 1.0
    assert "signal" in exh.chosen_features


# ------------------------------------------------------------ sweep_k

def test_sweep_k_separable_prefers_smallest_k():
    y = np.array([0] * 12 + [1] * 12)
    x = y.astype(float)[:, None]
    best_k, scores = sweep_k(x, y, ModelConfig(k_grid=(1, 3, 5)))
    assert best_k == 1
    assert all(v == 1.0 for v in scores.values())


def test_sweep_k_label_noise_point_prefers_larger_k():
    # one mislabeled point in a tight cluster: k=1 echoes the noise,
    # larger k votes it away
    x = np.linspace(0, 1, 20)[:, None]
    y = (x[:, 0] > 0.5).astype(int)
    y[3] = 1  # label noise inside class 0
    best_k, scores = sweep_k(x, y, ModelConfig(k_grid=(1, 3, 5)))
    assert best_k > 1
    assert scores[best_k] >= scores[1]


def test_sweep_k_deterministic():
    rng = np.random.default_rng(41)
    x = rng.normal(size=(30, 3))
    y = rng.integers(0, 2, 30)
    assert sweep_k(x, y) == sweep_k(x, y)


# ------------------------------------------------------------ config guards

def test_model_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(k_neighbors=0)
    with pytest.raises(ValueError):
        ModelConfig(distance="manhattan")
    with pytest.raises(ValueError):
        ModelConfig(leakage_mode="other")
    with pytest.raises(ValueError):
        ModelConfig(target="bmi")


@given(st.integers(0, 1000))
@settings(max_examples=20, deadline=None)
def test_mcc_bounds(seed):
    rng = np.random.default_rng(seed)
    counts = rng.integers(0, 25, size=(3, 3))
    if counts.sum() == 0:
        counts[0, 0] = 1
    mcc = mcc_multiclass(ConfusionMatrix([0, 1, 2], counts))
    assert -1.0 - 1e-12 <= mcc <= 1.0 + 1e-12
