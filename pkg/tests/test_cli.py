"""Command-line interface: subcommands, manifests, replay, exit codes."""

import json

import numpy as np
import pytest

from semionsim import cli, experiments
from semionsim.cli import main
from semionsim.dataset_io import read_dataset
from semionsim.experiments import RatePoint, ThresholdEstimate


def test_verify_single_check(capsys):
    assert main(["verify", "--only", "counts"]) == 0
    out = capsys.readouterr().out
    assert "counts" in out and "PASS" in out
    assert main(["verify", "--only", "nope"]) == 3


def test_verify_reports_named_failure(capsys, monkeypatch):
    from semionsim import verify

    monkeypatch.setitem(verify.CHECKS, "fixture",
                        lambda: (False, "deliberately corrupted"))
    assert main(["verify", "--only", "fixture"]) == 1
    out = capsys.readouterr().out
    assert "fixture" in out and "FAIL" in out


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["sample", "--d", "4"])
    assert info.value.code == 3
    # both p-eff and p0 given
    code = main(["sample", "--d", "4", "--n", "10", "--p-eff", "0.1",
                 "--p0", "0.05", "--out", str(tmp_path / "x.semd")])
    assert code == 3
    code = main(["sample", "--d", "4", "--n", "10", "--noise",
                 "depolarizing", "--p0", "0.05",
                 "--out", str(tmp_path / "x.semd")])
    assert code == 3


def test_sample_and_replay(tmp_path, capsys):
    out = tmp_path / "data.semd"
    csv_out = tmp_path / "data.csv"
    code = main(["sample", "--d", "3", "--p-eff", "0.08", "--n", "300",
                 "--seed", "11", "--out", str(out), "--csv", str(csv_out)])
    assert code == 0
    header, records = read_dataset(out)
    assert header.count == 300 and header.distance == 3
    first = out.read_bytes()
    manifest_path = tmp_path / "data.semd.manifest.json"
    assert manifest_path.exists()
    manifest = json.loads(manifest_path.read_text())
    assert manifest["command"] == "sample"
    assert str(out) in manifest["outputs"]

    # replay regenerates byte-identical outputs, with any worker count
    assert main(["replay", str(manifest_path)]) == 0
    assert out.read_bytes() == first
    assert main(["replay", str(manifest_path), "--workers", "3"]) == 0
    assert out.read_bytes() == first


def test_sample_empty_dataset(tmp_path):
    out = tmp_path / "empty.semd"
    assert main(["sample", "--d", "3", "--p-eff", "0.05", "--n", "0",
                 "--out", str(out)]) == 0
    header, records = read_dataset(out)
    assert header.count == 0


def test_sample_p0_conversion(tmp_path, capsys):
    out = tmp_path / "p0.semd"
    assert main(["sample", "--d", "2", "--p0", "0.045", "--n", "10",
                 "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "0.087975" in text
    header, _ = read_dataset(out)
    assert abs(header.p_eff - 0.087975) < 1e-12


def test_threshold_command(tmp_path, monkeypatch, capsys):
    def fake_scan(noise_kind, decoder, distances, grid, n=0, seed=0,
                  code="semion", workers=1, progress=None):
        points = [RatePoint(d, noise_kind, p, decoder, code, n, 1, 0.1,
                            0.05, 0.2, 0.0, 0.0, seed)
                  for d in distances for p in grid]
        if progress:
            progress(points[0])
        return ThresholdEstimate(decoder, noise_kind, code,
                                 {"4-5": 0.076}, 0.076, 0.001, points)

    monkeypatch.setattr(cli, "threshold_scan", fake_scan)
    out = tmp_path / "rates.csv"
    code = main(["threshold", "--distances", "4,5", "--grid",
                 "0.06:0.10:9", "--n", "50", "--out", str(out)])
    assert code == 0
    assert "0.07600" in capsys.readouterr().out
    assert out.exists()
    assert (tmp_path / "rates.csv.manifest.json").exists()

    def no_crossing(*a, **k):
        raise experiments.NoCrossingInWindow("nope")

    monkeypatch.setattr(cli, "threshold_scan", no_crossing)
    assert main(["threshold", "--distances", "4,5", "--grid",
                 "0.06:0.10:9", "--n", "50",
                 "--out", str(tmp_path / "r2.csv")]) == 2
    assert main(["threshold", "--distances", "4", "--grid", "0.06:0.10:9",
                 "--n", "50", "--out", str(tmp_path / "r3.csv")]) == 3


def test_train_and_eval_tiny(tmp_path, capsys):
    ckpt = tmp_path / "tiny.smlp"
    code = main(["train-mlp", "--d", "2", "--p-eff", "0.08", "--n", "600",
                 "--hidden", "1", "--nodes", "8", "--batch", "100",
                 "--seed", "4", "--out", str(ckpt)])
    assert code == 0
    assert ckpt.exists()
    out = tmp_path / "eval.csv"
    code = main(["eval", "--checkpoint", str(ckpt), "--d", "2",
                 "--p-eff", "0.06", "--n", "300", "--seed", "5",
                 "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert "mlp_accuracy" in text and "mwpm_p_bar" in text
    # missing checkpoint is a clear error
    assert main(["eval", "--checkpoint", str(tmp_path / "nope.smlp"),
                 "--d", "2", "--p-eff", "0.06", "--n", "10",
                 "--seed", "5", "--out", str(out)]) == 4
    # distance mismatch
    assert main(["eval", "--checkpoint", str(ckpt), "--d", "3",
                 "--p-eff", "0.06", "--n", "10", "--seed", "5",
                 "--out", str(out)]) == 4
