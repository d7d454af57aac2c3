import numpy as np
import pytest

from actipipe.changepoint import detect_change_points, median_heuristic_bandwidth

from oracles import cpd_dp


def test_constant_sequence_no_interior_breakpoints():
    x = np.full(500, 3.0)
    for kernel in ("rbf", "linear"):
        assert detect_change_points(x, 5.0, kernel) == [500]


def test_empty_input():
    assert detect_change_points(np.array([]), 1.0) == []


def test_negative_penalty_rejected():
    with pytest.raises(ValueError):
        detect_change_points(np.ones(5), -1.0)
    with pytest.raises(ValueError):
        detect_change_points(np.ones(5), 1.0, kernel="cosine")


def test_step_signal_linear_kernel_single_breakpoint():
    x = np.concatenate([np.zeros(1000), np.full(1000, 100.0)])
    bkps = detect_change_points(x, 50.0, kernel="linear")
    interior = bkps[:-1]
    assert len(interior) == 1
    assert abs(interior[0] - 1000) <= 5
    assert bkps == cpd_dp(x, 50.0, kernel="linear")


def test_two_step_staircase_two_breakpoints():
    x = np.concatenate([np.zeros(400), np.full(400, 50.0), np.full(400, 100.0)])
    for kernel, bw in (("linear", None), ("rbf", 10.0)):
        bkps = detect_change_points(x, 20.0, kernel, bw)
        interior = bkps[:-1]
        assert len(interior) == 2
        assert abs(interior[0] - 400) <= 5
        assert abs(interior[1] - 800) <= 5


def test_breakpoints_are_python_ints_sorted_end_inclusive():
    rng = np.random.default_rng(0)
    x = np.concatenate([rng.normal(0, 1, 200), rng.normal(8, 1, 200)])
    bkps = detect_change_points(x, 10.0, "rbf", 1.0)
    assert all(isinstance(b, int) for b in bkps)
    assert bkps == sorted(bkps)
    assert bkps[-1] == 400
    assert 0 not in bkps


def test_matches_dp_oracle_on_random_sequences():
    rng = np.random.default_rng(42)
    for trial in range(20):
        n = int(rng.integers(50, 400))
        n_seg = int(rng.integers(1, 5))
        levels = rng.normal(0, 5, n_seg)
        cuts = np.sort(rng.choice(np.arange(1, n), size=n_seg - 1, replace=False))
        bounds = [0, *cuts.tolist(), n]
        x = np.concatenate([
            np.full(bounds[i + 1] - bounds[i], levels[i]) for i in range(n_seg)
        ]) + rng.normal(0, 1.0, n)
        penalty = float(rng.uniform(1, 20))
        if trial % 2 == 0:
            bw = median_heuristic_bandwidth(x)
            assert detect_change_points(x, penalty, "rbf", bw) == \
                cpd_dp(x, penalty, "rbf", bw)
        else:
            assert detect_change_points(x, penalty, "linear") == \
                cpd_dp(x, penalty, "linear")


def test_rbf_scale_invariance_with_median_heuristic():
    rng = np.random.default_rng(5)
    x = np.concatenate([rng.normal(0, 1, 300), rng.normal(6, 1, 300)])
    a = detect_change_points(x, 10.0, "rbf", median_heuristic_bandwidth(x))
    b = detect_change_points(7.0 * x, 10.0, "rbf", median_heuristic_bandwidth(7.0 * x))
    assert a == b


def test_median_heuristic_fallbacks():
    assert median_heuristic_bandwidth(np.array([2.0])) == 1.0
    assert median_heuristic_bandwidth(np.full(100, 4.0)) == 1.0
    # mostly ties: falls back to the median of positive distances
    x = np.array([0.0] * 90 + [3.0] * 10)
    assert median_heuristic_bandwidth(x) == 3.0
