"""Synthetic cohorts with planted circadian structure.

Each subject is a square-wave day/night activity profile with optional
day-to-day amplitude jitter, brief activity/rest inversions
("fragmentation") and additive Gaussian noise.  Class labels modulate the
amplitude variability and fragmentation so that dispersion-type features
separate the classes, while the planted segment boundaries are returned as
ground truth.

Randomness is drawn from numpy's PCG64 seeded with SeedSequence((seed,
subject_index)), so per-subject streams are reproducible and independent
of generation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .ingest import ActigramSeries, Dataset, SubjectRecord
from .segmentation import ACTIVITY, REST, Segment, Segmentation

MINUTES_PER_DAY = 24 * 60


@dataclass
class ClassEffect:
    amplitude_var: float = 1.0      # multiplier on day-to-day amplitude jitter
    fragmentation: float = 1.0      # multiplier on inversion probability


@dataclass
class SynthConfig:
    n_subjects: int = 78
    days: int = 7
    active_hours: int = 16
    mesor: float = 50.0
    day_amplitude: float = 50.0
    amp_rel_sd: float = 0.05        # day-to-day relative amplitude jitter
    noise_sd: float = 10.0
    fragmentation: float = 0.02     # per-hour inversion probability
    fa_prevalence: float = 10 / 78
    subjective_effect: float = 0.0  # shift of subjective scores per positive class
    class_effect: dict[int, ClassEffect] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.fragmentation <= 1.0:
            raise ValueError("fragmentation must be in [0, 1]")
        if not 0.0 <= self.fa_prevalence <= 1.0:
            raise ValueError("fa_prevalence must be in [0, 1]")
        for value in (self.mesor, self.day_amplitude, self.noise_sd, self.amp_rel_sd):
            if value < 0:
                raise ValueError("levels must be non-negative")
        if self.days < 1 or self.active_hours < 1 or self.active_hours > 24:
            raise ValueError("bad day structure")

    def effect_for(self, label: int) -> ClassEffect:
        return self.class_effect.get(label, ClassEffect())


_START_TIME = datetime(2019, 2, 4, 0, 0)


def _subject_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, index))))


def generate_subject(cfg: SynthConfig, label: int, index: int) -> tuple[ActigramSeries, Segmentation]:
    """One synthetic series plus its planted ground-truth segmentation."""
    rng = _subject_rng(cfg.seed, index)
    effect = cfg.effect_for(label)
    n = cfg.days * MINUTES_PER_DAY
    active_minutes = cfg.active_hours * 60

    # Class effects modulate the active phase only (daytime amplitude jitter
    # and daytime fragmentation); the rest phase stays at a fixed level so
    # rest-derived features carry no planted class signal.
    low = max(0.0, cfg.mesor - cfg.day_amplitude)
    base = np.empty(n)
    active_mask = np.zeros(n, dtype=bool)
    for day in range(cfg.days):
        jitter = cfg.amp_rel_sd * effect.amplitude_var * rng.standard_normal()
        high = cfg.mesor + cfg.day_amplitude * max(0.05, 1.0 + jitter)
        start = day * MINUTES_PER_DAY
        base[start:start + active_minutes] = high
        base[start + active_minutes:start + MINUTES_PER_DAY] = low
        active_mask[start:start + active_minutes] = True

    # Inversions are planted in interior active hours only: blocks adjacent
    # to a day/night edge would shift the detectable phase boundary itself,
    # bleeding active-level minutes into recovered rest segments.
    frag_p = min(1.0, cfg.fragmentation * effect.fragmentation)
    if frag_p > 0 and cfg.active_hours > 2:
        for day in range(cfg.days):
            for hour in range(1, cfg.active_hours - 1):
                if rng.random() >= frag_p:
                    continue
                length = int(rng.integers(20, 41))
                offset = int(rng.integers(0, 60 - length + 1))
                lo = day * MINUTES_PER_DAY + hour * 60 + offset
                hi = lo + length
                # blocks stay within one active hour, so they never straddle
                # a planted day/night boundary
                base[lo:hi] = low
                active_mask[lo:hi] = False

    counts = np.maximum(0.0, base + rng.normal(0.0, cfg.noise_sd, n)) if cfg.noise_sd > 0 else base.copy()

    pid = f"S{index:03d}"
    series = ActigramSeries(pid, _START_TIME, np.arange(n), counts)

    # ground truth from the pre-noise active/rest runs
    segments = []
    run_start = 0
    for i in range(1, n + 1):
        if i == n or active_mask[i] != active_mask[run_start]:
            kind = ACTIVITY if active_mask[run_start] else REST
            segments.append(Segment(kind, run_start, i, base[run_start:i]))
            run_start = i
    truth = Segmentation(pid, segments, n, base)
    return series, truth


def _synth_subject_record(rng: np.random.Generator, pid: str, fa: int, sc: int,
                          cfg: SynthConfig, bmi_missing: bool) -> SubjectRecord:
    shift = cfg.subjective_effect * fa
    zsdsi = float(np.clip(47.0 + 12.0 * rng.standard_normal() + 10.0 * shift, 25, 100))
    debq = [float(np.clip(base + sd * rng.standard_normal() + 0.5 * shift, 1, 5))
            for base, sd in ((2.2, 1.0), (2.9, 0.6), (2.0, 0.5))]
    bmi = None if bmi_missing else float(np.clip(48 + 25 * rng.standard_normal(), 0, 100))
    bmi_cat = None if bmi is None else (1 if bmi < 5 else 2 if bmi < 85 else 3 if bmi < 95 else 4)
    return SubjectRecord(
        participant_id=pid,
        sex=int(1 + (rng.random() < 0.25)),
        age=float(np.clip(21.5 + 9.6 * rng.standard_normal(), 15, 62)),
        fa=fa,
        sc=sc,
        bmi_pct=bmi,
        bmi_cat=bmi_cat,
        ov_ob=None if bmi_cat is None else int(bmi_cat >= 3),
        zsdsi=zsdsi,
        zsdsi_cat=int(zsdsi >= 60),
        debq_restr=debq[0],
        debq_restr_cat=int(debq[0] >= 2.2),
        debq_extern=debq[1],
        debq_extern_cat=int(debq[1] >= 2.93),
        debq_emo=debq[2],
        debq_emo_cat=int(debq[2] >= 1.96),
    )


def generate_cohort(cfg: SynthConfig) -> tuple[Dataset, dict[str, Segmentation]]:
    """Cohort with FA labels at the configured prevalence and planted truth."""
    # cohort-level stream, disjoint from the per-subject (seed, index) streams
    rng = _subject_rng(cfg.seed, 2**32)
    n = cfg.n_subjects
    n_positive = int(round(cfg.fa_prevalence * n))
    labels = np.zeros(n, dtype=np.int64)
    labels[:n_positive] = 1
    rng.shuffle(labels)

    # mirror the published missingness: a few absent BMI percentiles
    n_missing_bmi = min(3, n)
    missing_bmi = set(rng.choice(n, size=n_missing_bmi, replace=False).tolist())

    subjects = []
    series: dict[str, ActigramSeries] = {}
    truths: dict[str, Segmentation] = {}
    for i in range(n):
        fa = int(labels[i])
        s, truth = generate_subject(cfg, fa, i)
        sc = int(rng.integers(3, 8)) if fa else int(rng.choice([0, 0, 1, 1, 2, 2, 3]))
        subjects.append(_synth_subject_record(rng, s.participant_id, fa, sc, cfg, i in missing_bmi))
        series[s.participant_id] = s
        truths[s.participant_id] = truth
    return Dataset(subjects, series), truths
