import json
import subprocess
import sys

import numpy as np
import pytest

from actipipe.cli import main
from actipipe.config import RunConfig
from actipipe.features import read_feature_csv
from actipipe.ingest import write_actigram_csv, write_subjects_csv
from actipipe.synth import ClassEffect, SynthConfig, generate_cohort

from conftest import series_from, square_wave


@pytest.fixture(scope="module")
def small_cohort(tmp_path_factory):
    """A tiny planted cohort written in the CLI's file formats."""
    out = tmp_path_factory.mktemp("cohort")
    cfg = SynthConfig(n_subjects=8, days=2, seed=123, fa_prevalence=0.25,
                      class_effect={1: ClassEffect(amplitude_var=4.0, fragmentation=15.0)})
    dataset, _ = generate_cohort(cfg)
    ordered = sorted(dataset.series)
    write_actigram_csv(out / "actigrams.csv", [dataset.series[p] for p in ordered])
    write_subjects_csv(out / "subjects.csv", dataset.subjects)
    return out


@pytest.fixture(scope="module")
def extracted(small_cohort, tmp_path_factory):
    out = tmp_path_factory.mktemp("features")
    rc = main(["features", "--actigrams", str(small_cohort / "actigrams.csv"),
               "--out", str(out)])
    assert rc == 0
    return out


def test_config_init(tmp_path):
    path = tmp_path / "cfg.json"
    assert main(["config", "init", str(path)]) == 0
    assert RunConfig.from_json(path).to_dict() == RunConfig().to_dict()


def test_synth_writes_cohort_files(tmp_path):
    cfg = RunConfig()
    cfg.synth.n_subjects = 4
    cfg.synth.days = 1
    cfg_path = tmp_path / "cfg.json"
    cfg.to_json(cfg_path)
    out = tmp_path / "out"
    assert main(["synth", "--config", str(cfg_path), "--out", str(out)]) == 0
    for name in ("actigrams.csv", "subjects.csv", "truth_segments.csv"):
        assert (out / name).exists()


def test_ingest_summary(small_cohort, tmp_path):
    out = tmp_path / "out"
    rc = main(["ingest", "--subjects", str(small_cohort / "subjects.csv"),
               "--actigrams", str(small_cohort / "actigrams.csv"),
               "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "dataset_summary.json").read_text())
    assert summary["n_subjects"] == 8


def test_segment_csv_only_without_svg(small_cohort, tmp_path):
    out = tmp_path / "out"
    rc = main(["segment", "--actigrams", str(small_cohort / "actigrams.csv"),
               "--out", str(out)])
    assert rc == 0
    assert (out / "segments.csv").exists()
    assert not list(out.glob("*.svg"))
    header = (out / "segments.csv").read_text().splitlines()[0]
    assert header == "participant_id,kind,start_minute,end_minute"


def test_segment_with_svg_renders_bands(tmp_path):
    out = tmp_path / "out"
    wave = tmp_path / "wave.csv"
    write_actigram_csv(wave, [series_from(square_wave(days=7), pid="W1")])
    rc = main(["segment", "--actigrams", str(wave), "--out", str(out), "--svg"])
    assert rc == 0
    svg = (out / "segmentation_W1.svg").read_text()
    assert sum(1 for i in range(10) if f'id="band-activity-{i}"' in svg) == 7


def test_malformed_csv_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("participant_id,timestamp_iso8601,count\nP1,notatime,1\n")
    rc = main(["segment", "--actigrams", str(bad), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "row 2" in capsys.readouterr().err


def test_empty_after_cleaning_exit_3(tmp_path):
    zeros = tmp_path / "zeros.csv"
    write_actigram_csv(zeros, [series_from(np.zeros(3 * 24 * 60) + 0.0, pid="Z1")])
    rc = main(["segment", "--actigrams", str(zeros), "--out", str(tmp_path / "o")])
    assert rc == 3


def test_features_csv_shape(extracted):
    ids, names, matrix = read_feature_csv(extracted / "features.csv")
    assert len(ids) == 8
    assert len(names) == 256
    assert matrix.shape == (8, 256)
    assert (extracted / "feature_grids.json").exists()


def test_evaluate_separable_cohort(small_cohort, extracted, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["evaluate", "--features", str(extracted / "features.csv"),
               "--subjects", str(small_cohort / "subjects.csv"),
               "--group", "activity", "--target", "fa", "--out", str(out)])
    assert rc == 0
    report = json.loads((out / "eval_fa_activity.json").read_text())
    assert report["report"]["confusion"] is not None
    assert "MCC" in capsys.readouterr().out


def test_evaluate_degenerate_labels_exit_4(small_cohort, extracted, tmp_path):
    from actipipe.ingest import parse_subjects
    records = parse_subjects(small_cohort / "subjects.csv")
    for rec in records:
        rec.fa = 0
        rec.sc = 1
    degen = tmp_path / "degen.csv"
    write_subjects_csv(degen, records)
    rc = main(["evaluate", "--features", str(extracted / "features.csv"),
               "--subjects", str(degen), "--group", "activity", "--target", "fa",
               "--out", str(tmp_path / "o")])
    assert rc == 4


def test_metrics_only_mode_prints_mcc(tmp_path, capsys):
    confusion = {"labels": [1, 2, 3, 4],
                 "confusion": [[27, 3, 0, 3], [4, 11, 0, 1],
                               [9, 3, 3, 0], [3, 1, 0, 10]]}
    path = tmp_path / "cm.json"
    path.write_text(json.dumps(confusion))
    rc = main(["metrics", "--confusion", str(path), "--out", str(tmp_path / "o")])
    assert rc == 0
    out = capsys.readouterr().out
    mcc = float(out.split("MCC ")[1].split()[0])
    assert abs(mcc - 0.51) < 5e-3
    # same matrix through `evaluate --confusion`
    rc = main(["evaluate", "--confusion", str(path), "--out", str(tmp_path / "o2")])
    assert rc == 0


def test_select_writes_trajectory(small_cohort, extracted, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["select", "--features", str(extracted / "features.csv"),
               "--subjects", str(small_cohort / "subjects.csv"),
               "--group", "activity", "--target", "fa", "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "selection_fa_activity.json").read_text())
    assert payload["selection"]["chosen_features"]
    assert all(f.startswith("activity.") for f in payload["selection"]["chosen_features"])


def test_correlate_from_names(small_cohort, extracted, tmp_path):
    out = tmp_path / "out"
    rc = main(["correlate", "--features", str(extracted / "features.csv"),
               "--subjects", str(small_cohort / "subjects.csv"),
               "--feature-names", "activity.mean.mean,rest.mean.mean",
               "--out", str(out)])
    assert rc == 0
    lines = (out / "correlation.csv").read_text().splitlines()
    assert len(lines) == 3


def test_correlate_requires_selection_or_names(small_cohort, extracted, tmp_path):
    rc = main(["correlate", "--features", str(extracted / "features.csv"),
               "--subjects", str(small_cohort / "subjects.csv"),
               "--out", str(tmp_path / "o")])
    assert rc == 2


def test_repeated_runs_byte_identical(small_cohort, tmp_path):
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        rc = main(["features", "--actigrams", str(small_cohort / "actigrams.csv"),
                   "--out", str(out)])
        assert rc == 0
        outs.append((out / "features.csv").read_bytes())
    assert outs[0] == outs[1]


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "actipipe.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "actipipe" in proc.stdout
