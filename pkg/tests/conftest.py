import numpy as np
import pytest

from actipipe.ingest import ActigramSeries

MINUTES_PER_DAY = 24 * 60


def square_wave(days: int = 7, active_minutes: int = 960,
                high: float = 100.0, low: float = 0.0) -> np.ndarray:
    day = np.concatenate([np.full(active_minutes, high),
                          np.full(MINUTES_PER_DAY - active_minutes, low)])
    return np.tile(day, days)


def series_from(counts: np.ndarray, pid: str = "P1") -> ActigramSeries:
    return ActigramSeries(pid, None, np.arange(len(counts)), counts)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
