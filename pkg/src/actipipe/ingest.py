"""Parsing and validation of raw accelerometer, actigram and subject files.

File schemas:
  raw CSV       header ``participant_id,t_seconds,x,y`` (1 Hz nominal)
  actigram CSV  header ``participant_id,timestamp_iso8601,count``; one row per
                minute, gaps expressed by absent rows, blank rows forbidden
  subject CSV   header matching :class:`SubjectRecord` field names; empty
                cell = missing
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySeriesError, FormatError

log = logging.getLogger(__name__)

SECONDS_PER_MINUTE = 60
MAX_SERIES_DAYS = 14


@dataclass(frozen=True)
class RawAccelSample:
    t: int
    x: float
    y: float


@dataclass(frozen=True)
class MinuteEpoch:
    minute_index: int
    count: float


@dataclass
class ActigramSeries:
    """Minute-resolution activity counts for one participant.

    ``minutes`` holds minute indices since series start (gaps are simply
    absent indices) and ``counts`` the matching activity values.
    """

    participant_id: str
    start_time: datetime | None
    minutes: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.minutes = np.asarray(self.minutes, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.float64)
        if self.minutes.size != self.counts.size:
            raise FormatError("minutes and counts length mismatch")
        if self.minutes.size == 0:
            raise EmptySeriesError(f"empty series for {self.participant_id!r}")
        if np.any(np.diff(self.minutes) <= 0):
            raise FormatError(f"minute indices not strictly increasing for {self.participant_id!r}")
        if np.any(self.counts < 0):
            raise FormatError(f"negative count in series for {self.participant_id!r}")
        duration_days = (int(self.minutes[-1]) + 1) / (24 * 60)
        if duration_days > MAX_SERIES_DAYS:
            raise FormatError(
                f"series for {self.participant_id!r} spans {duration_days:.1f} days (> {MAX_SERIES_DAYS})"
            )

    @property
    def epochs(self) -> list[MinuteEpoch]:
        return [MinuteEpoch(int(m), float(c)) for m, c in zip(self.minutes, self.counts)]

    @property
    def n_epochs(self) -> int:
        return int(self.minutes.size)

    def gaps(self) -> list[tuple[int, int]]:
        """Return (start_minute, length) for every run of absent minutes."""
        out = []
        diffs = np.diff(self.minutes)
        for pos in np.nonzero(diffs > 1)[0]:
            out.append((int(self.minutes[pos]) + 1, int(diffs[pos]) - 1))
        return out


@dataclass
class SubjectRecord:
    participant_id: str
    sex: int
    age: float
    fa: int
    sc: int
    bmi_pct: float | None = None
    bmi_cat: int | None = None
    ov_ob: int | None = None
    zsdsi: float | None = None
    zsdsi_cat: int | None = None
    debq_restr: float | None = None
    debq_extern: float | None = None
    debq_emo: float | None = None
    debq_restr_cat: int | None = None
    debq_extern_cat: int | None = None
    debq_emo_cat: int | None = None

    def __post_init__(self):
        _check_code("sex", self.sex, {1, 2})
        _check_code("fa", self.fa, {0, 1})
        if not 0 <= self.sc <= 7:
            raise FormatError(f"sc out of range 0-7: {self.sc}")
        if self.age <= 0:
            raise FormatError(f"non-positive age: {self.age}")
        _check_range("bmi_pct", self.bmi_pct, 0, 100)
        _check_code("bmi_cat", self.bmi_cat, {1, 2, 3, 4})
        _check_code("ov_ob", self.ov_ob, {0, 1})
        _check_range("zsdsi", self.zsdsi, 25, 100)
        _check_code("zsdsi_cat", self.zsdsi_cat, {0, 1})
        for name in ("debq_restr", "debq_extern", "debq_emo"):
            _check_range(name, getattr(self, name), 1, 5)
        for name in ("debq_restr_cat", "debq_extern_cat", "debq_emo_cat"):
            _check_code(name, getattr(self, name), {0, 1})


SUBJECT_COLUMNS = [
    "participant_id", "sex", "age", "bmi_pct", "bmi_cat", "ov_ob",
    "zsdsi", "zsdsi_cat", "debq_restr", "debq_restr_cat",
    "debq_extern", "debq_extern_cat", "debq_emo", "debq_emo_cat",
    "fa", "sc",
]

# Columns usable as model inputs for the "subjective" feature group.
SUBJECTIVE_FEATURES = [
    "sex", "age", "bmi_pct", "bmi_cat", "ov_ob", "zsdsi", "zsdsi_cat",
    "debq_restr", "debq_restr_cat", "debq_extern", "debq_extern_cat",
    "debq_emo", "debq_emo_cat",
]

_INT_FIELDS = {"sex", "bmi_cat", "ov_ob", "zsdsi_cat", "debq_restr_cat",
               "debq_extern_cat", "debq_emo_cat", "fa", "sc"}
_REQUIRED_FIELDS = {"participant_id", "sex", "age", "fa", "sc"}


def _check_code(name: str, value, allowed: set[int]) -> None:
    if value is not None and value not in allowed:
        raise FormatError(f"{name} outside codes {sorted(allowed)}: {value}")


def _check_range(name: str, value, lo: float, hi: float) -> None:
    if value is not None and not lo <= value <= hi:
        raise FormatError(f"{name} outside [{lo}, {hi}]: {value}")


@dataclass
class Dataset:
    subjects: list[SubjectRecord]
    series: dict[str, ActigramSeries] = field(default_factory=dict)

    def __post_init__(self):
        if self.series:
            subject_ids = {s.participant_id for s in self.subjects}
            series_ids = set(self.series)
            if subject_ids != series_ids:
                missing = sorted(subject_ids ^ series_ids)
                raise FormatError(f"subjects and series do not match 1:1; offending ids: {missing}")

    def class_counts(self) -> dict[str, dict[int, int]]:
        fa: dict[int, int] = {}
        sc: dict[int, int] = {}
        for rec in self.subjects:
            fa[rec.fa] = fa.get(rec.fa, 0) + 1
            cls = sc_to_class(rec.sc)
            sc[cls] = sc.get(cls, 0) + 1
        return {"fa": dict(sorted(fa.items())), "sc_class": dict(sorted(sc.items()))}


def sc_to_class(sc: int) -> int:
    """Map a 0-7 symptom count onto the four symptom-count classes."""
    if not 0 <= sc <= 7:
        raise FormatError(f"sc out of range 0-7: {sc}")
    if sc <= 1:
        return 1
    if sc == 2:
        return 2
    if sc == 3:
        return 3
    return 4


def bin_raw(samples: Sequence[RawAccelSample]) -> list[MinuteEpoch]:
    """Sum per-minute absolute first differences of both axes.

    Samples are grouped 60 per minute in arrival order; the predecessor of a
    minute's first sample is the last sample of the previous minute, and the
    very first sample of the recording contributes 0.
    """
    if len(samples) == 0:
        raise EmptySeriesError("no raw samples")
    t = np.array([s.t for s in samples], dtype=np.int64)
    if np.any(np.diff(t) <= 0):
        raise FormatError("raw sample timestamps not strictly increasing")
    x = np.array([s.x for s in samples], dtype=np.float64)
    y = np.array([s.y for s in samples], dtype=np.float64)
    contrib = np.zeros(len(samples))
    contrib[1:] = np.abs(np.diff(x)) + np.abs(np.diff(y))
    values = contrib.tolist()
    # plain left-to-right accumulation per minute, so results are exactly
    # reproducible by a straight re-implementation of the definition
    return [
        MinuteEpoch(start // SECONDS_PER_MINUTE, sum(values[start:start + SECONDS_PER_MINUTE]))
        for start in range(0, len(values), SECONDS_PER_MINUTE)
    ]


def _parse_timestamp(text: str, row_num: int) -> datetime:
    try:
        return datetime.fromisoformat(text)
    except ValueError as exc:
        raise FormatError(f"row {row_num}: bad timestamp {text!r}") from exc


def _read_rows(path: Path | str, expected_header: list[str]) -> Iterable[tuple[int, list[str]]]:
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if header != expected_header:
            raise FormatError(f"{path}: expected header {expected_header}, got {header}")
        for row_num, row in enumerate(reader, start=2):
            if not row or all(cell == "" for cell in row):
                raise FormatError(f"{path}: blank row {row_num}")
            if len(row) != len(expected_header):
                raise FormatError(f"{path}: row {row_num} has {len(row)} cells")
            yield row_num, row


def parse_actigrams(path: Path | str) -> dict[str, ActigramSeries]:
    """Parse a minute-binned actigram CSV, possibly holding several participants."""
    per_subject: dict[str, list[tuple[datetime, float, int]]] = {}
    for row_num, (pid, ts_text, count_text) in _iter_named(path, ["participant_id", "timestamp_iso8601", "count"]):
        ts = _parse_timestamp(ts_text, row_num)
        try:
            count = float(count_text)
        except ValueError as exc:
            raise FormatError(f"row {row_num}: bad count {count_text!r}") from exc
        if count < 0:
            raise FormatError(f"row {row_num}: negative count {count}")
        per_subject.setdefault(pid, []).append((ts, count, row_num))

    out: dict[str, ActigramSeries] = {}
    for pid, rows in per_subject.items():
        start = rows[0][0]
        minutes = []
        seen: dict[int, int] = {}
        for ts, _count, row_num in rows:
            delta = (ts - start).total_seconds()
            if delta % SECONDS_PER_MINUTE != 0:
                raise FormatError(f"row {row_num}: timestamp not minute-aligned")
            idx = int(delta // SECONDS_PER_MINUTE)
            if idx in seen:
                raise FormatError(
                    f"row {row_num}: duplicate minute {idx} for {pid!r} (first seen at row {seen[idx]})"
                )
            if idx < 0:
                raise FormatError(f"row {row_num}: timestamps out of order for {pid!r}")
            seen[idx] = row_num
            minutes.append(idx)
        counts = [c for _ts, c, _r in rows]
        out[pid] = ActigramSeries(pid, start, np.array(minutes), np.array(counts))
    if not out:
        raise EmptySeriesError(f"{path}: no data rows")
    return out


def _iter_named(path, header):
    for row_num, row in _read_rows(path, header):
        yield row_num, row


def parse_actigram(path: Path | str, fmt: str = "minute") -> ActigramSeries:
    """Parse a single-participant file, either minute-binned or raw 1 Hz."""
    if fmt == "minute":
        series = parse_actigrams(path)
        if len(series) != 1:
            raise FormatError(f"{path}: expected one participant, found {sorted(series)}")
        return next(iter(series.values()))
    if fmt == "raw":
        samples: list[RawAccelSample] = []
        pid = None
        for row_num, (row_pid, t_text, x_text, y_text) in _iter_named(
            path, ["participant_id", "t_seconds", "x", "y"]
        ):
            if pid is None:
                pid = row_pid
            elif row_pid != pid:
                raise FormatError(f"row {row_num}: multiple participants in raw file")
            try:
                samples.append(RawAccelSample(int(t_text), float(x_text), float(y_text)))
            except ValueError as exc:
                raise FormatError(f"row {row_num}: bad raw sample") from exc
        epochs = bin_raw(samples)
        return ActigramSeries(
            pid or "",
            None,
            np.array([e.minute_index for e in epochs]),
            np.array([e.count for e in epochs]),
        )
    raise FormatError(f"unknown actigram format {fmt!r}")


def parse_subjects(path: Path | str) -> list[SubjectRecord]:
    records = []
    for row_num, row in _read_rows(path, SUBJECT_COLUMNS):
        values = dict(zip(SUBJECT_COLUMNS, row))
        kwargs = {}
        for name, cell in values.items():
            if cell == "":
                if name in _REQUIRED_FIELDS:
                    raise FormatError(f"{path}: row {row_num}: missing required field {name!r}")
                kwargs[name] = None
                continue
            if name == "participant_id":
                kwargs[name] = cell
            elif name in _INT_FIELDS:
                try:
                    kwargs[name] = int(cell)
                except ValueError as exc:
                    raise FormatError(f"{path}: row {row_num}: bad integer {name}={cell!r}") from exc
            else:
                try:
                    kwargs[name] = float(cell)
                except ValueError as exc:
                    raise FormatError(f"{path}: row {row_num}: bad number {name}={cell!r}") from exc
        try:
            records.append(SubjectRecord(**kwargs))
        except FormatError as exc:
            raise FormatError(f"{path}: row {row_num}: {exc}") from exc
    if not records:
        raise EmptySeriesError(f"{path}: no subject rows")
    return records


def load_dataset(subjects_path: Path | str, actigram_path: Path | str) -> Dataset:
    subjects = parse_subjects(subjects_path)
    series = parse_actigrams(actigram_path)
    dataset = Dataset(subjects, series)
    counts = dataset.class_counts()
    log.info("loaded %d subjects; FA counts %s; SC class counts %s",
             len(subjects), counts["fa"], counts["sc_class"])
    return dataset


def _fmt(value: float) -> str:
    # repr round-trips doubles exactly, which keeps serialize(parse(f)) bit-stable
    return repr(float(value))


def write_actigram_csv(path: Path | str, series_list: Iterable[ActigramSeries]) -> None:
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["participant_id", "timestamp_iso8601", "count"])
        for series in series_list:
            start = series.start_time or datetime(2000, 1, 1)
            for minute, count in zip(series.minutes, series.counts):
                ts = start + timedelta(minutes=int(minute))
                writer.writerow([series.participant_id, ts.isoformat(), _fmt(count)])


def write_subjects_csv(path: Path | str, records: Iterable[SubjectRecord]) -> None:
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUBJECT_COLUMNS)
        for rec in records:
            row = []
            for name in SUBJECT_COLUMNS:
                value = getattr(rec, name)
                if value is None:
                    row.append("")
                elif name == "participant_id":
                    row.append(value)
                elif name in _INT_FIELDS:
                    row.append(str(int(value)))
                else:
                    row.append(_fmt(value))
            writer.writerow(row)


def write_raw_csv(path: Path | str, pid: str, samples: Iterable[RawAccelSample]) -> None:
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["participant_id", "t_seconds", "x", "y"])
        for s in samples:
            writer.writerow([pid, str(s.t), _fmt(s.x), _fmt(s.y)])


def series_is_gappy(series: ActigramSeries) -> bool:
    return len(series.gaps()) > 0 or bool(math.isnan(series.counts.sum()))
