"""Fixture-level checks plus the integration pass over a real verify run."""

import csv
import hashlib
import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from spdereports.bundle import BundleError, ReportBundle
from spdereports.cli import main as report_main
from spdereports.figures import (
    plot_diagnostic_ladder,
    plot_field,
    plot_holder,
    plot_moment_decay,
)


def _write_csv(path, columns, rows):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# canned fixtures
# ---------------------------------------------------------------------------

def test_holder_exact_power_law_annotation(tmp_path):
    lags = [0.1 * 2**k for k in range(5)]
    rows = [(h, h**0.5, r) for r in range(3) for h in lags]
    src = tmp_path / "holder_lags.csv"
    _write_csv(src, ["lag", "sup_increment", "replica"], rows)
    info = plot_holder(src, tmp_path / "h.png", eta_c=1.0 / 3.0)
    assert info["slope"] == pytest.approx(0.5, abs=1e-6)
    assert info["eta_c"] == pytest.approx(1.0 / 3.0)
    assert (tmp_path / "h.png").exists()


def test_holder_empty_csv_no_data(tmp_path):
    src = tmp_path / "holder_lags.csv"
    _write_csv(src, ["lag", "sup_increment", "replica"], [])
    info = plot_holder(src, tmp_path / "h.png")
    assert info == {"no_data": True}
    assert (tmp_path / "h.png").exists()


def test_decay_synthetic_minus_half_slope(tmp_path):
    ts = [0.0125 * 2**k for k in range(4)]
    rows = [(t, t**-0.5, 0.0, 100) for t in ts]
    src = tmp_path / "moment_decay.csv"
    _write_csv(src, ["t", "mean_moment", "stderr", "n_replicas"], rows)
    info = plot_moment_decay(src, tmp_path / "d.png")
    assert info["slope"] == pytest.approx(-0.5, abs=1e-6)
    assert info["reference"] == -0.5


def test_decay_prefers_harness_statistic(tmp_path):
    ts = [0.1, 0.2, 0.4]
    rows = [(t, t**-0.5 * (1 + 0.01 * i), 0.0, 10) for i, t in enumerate(ts)]
    src = tmp_path / "moment_decay.csv"
    _write_csv(src, ["t", "mean_moment", "stderr", "n_replicas"], rows)
    info = plot_moment_decay(src, tmp_path / "d.png", harness_slope=-0.512345)
    assert info["slope"] == pytest.approx(-0.512345, abs=1e-12)


def test_field_panel_rows_equal_snapshot_count(tmp_path):
    xs = np.linspace(-1, 1, 11)
    rows = [(t, x, np.exp(-x * x)) for t in (0.0, 0.1, 0.2) for x in xs]
    src = tmp_path / "field_snapshots.csv"
    _write_csv(src, ["t", "x", "value"], rows)
    info = plot_field(src, tmp_path / "f.png")
    assert info["n_panels"] == 3


def test_ladder_monotone_fixture(tmp_path):
    rows = [(2, 10.0, 0.4), (3, 100.0, 0.2), (4, 1000.0, 0.1), (5, 10000.0, 0.05)]
    src = tmp_path / "diagnostic_ladder.csv"
    _write_csv(src, ["n", "m", "functional"], rows)
    info = plot_diagnostic_ladder(src, tmp_path / "l.png")
    assert info["values"] == [0.4, 0.2, 0.1, 0.05]
    assert info["monotone_decreasing"] is True


# ---------------------------------------------------------------------------
# bundle hash discipline
# ---------------------------------------------------------------------------

def _mini_bundle(tmp_path):
    src = tmp_path / "holder_lags.csv"
    _write_csv(src, ["lag", "sup_increment", "replica"], [(0.1, 0.3, 0)])
    digest = hashlib.sha256(src.read_bytes()).hexdigest()
    manifest = {"outputs": {"holder_lags.csv": digest}, "config": {}}
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    return tmp_path


def test_bundle_verifies_hashes(tmp_path):
    root = _mini_bundle(tmp_path)
    ReportBundle(root)  # passes
    (root / "holder_lags.csv").write_text("lag,sup_increment,replica\n0.1,0.9,0\n")
    with pytest.raises(BundleError, match="hash mismatch"):
        ReportBundle(root)


def test_bundle_requires_manifest(tmp_path):
    with pytest.raises(BundleError, match="manifest"):
        ReportBundle(tmp_path)


# ---------------------------------------------------------------------------
# integration: a real verify output directory (secondary acceptance)
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def verify_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("verify")
    proc = subprocess.run(
        [sys.executable, "-m", "stableheat.cli", "verify", "--quick", "--out", str(out)],
        capture_output=True, text=True, timeout=1800,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    (run_dir,) = [p for p in out.iterdir() if p.is_dir()]
    return run_dir


def test_a12_all_four_commands_on_real_run(verify_dir, tmp_path):
    figdir = tmp_path / "figs"
    for command in ("holder", "decay", "field", "ladder"):
        rc = report_main([command, "--in", str(verify_dir), "--figures", str(figdir)])
        assert rc == 0
    assert {p.name for p in figdir.iterdir()} == {
        "holder.png", "moment_decay.png", "field.png", "ladder.png",
    }


def test_a12_annotations_match_harness_statistics(verify_dir, tmp_path):
    verdicts = json.loads((verify_dir / "verdicts.json").read_text())["checks"]
    info = plot_moment_decay(verify_dir / "moment_decay.csv", tmp_path / "d.png",
                             harness_slope=verdicts["A6"]["statistic"]["slope"])
    assert info["slope"] == pytest.approx(verdicts["A6"]["statistic"]["slope"], abs=1e-6)
    # the holder CSV re-fit reproduces the harness median to 1e-6
    info = plot_holder(verify_dir / "holder_lags.csv", tmp_path / "h.png", eta_c=1.0 / 3.0)
    assert info["median_fit"] == pytest.approx(
        verdicts["A7"]["statistic"]["median_eta_1.5"], abs=1e-6
    )


def test_a12_cli_all_and_tamper_detection(verify_dir, tmp_path):
    work = tmp_path / "copy"
    shutil.copytree(verify_dir, work)
    assert report_main(["all", "--in", str(work), "--figures", str(work / "figures")]) == 0
    # tamper with an indexed CSV: the bundle must refuse
    target = work / "holder_lags.csv"
    target.write_text(target.read_text() + "9.9,9.9,9\n")
    assert report_main(["all", "--in", str(work), "--figures", str(work / "figures")]) == 2
