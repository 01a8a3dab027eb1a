import json

import pytest

from homoverlap import __version__
from homoverlap.cli import main
from homoverlap.config import RunConfig, format_config
from homoverlap.countsio import emit_counts
from homoverlap.apparatus import ApparatusParams
from homoverlap.mcsim import Preparation, RngStream, run_measurement


def run(tmp_path, *args):
    out = tmp_path / "out"
    assert main([*args, "--out", str(out)]) == 0
    return out


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    return header, [dict(zip(header, map(float, line.split(",")))) for line in lines[1:]]


def test_dip(tmp_path):
    out = run(tmp_path, "dip", "--periods", "20")
    header, rows = read_csv(out / "dip.csv")
    assert header == ["delay_um", "mean_coincidence_rate_hz", "stderr"]
    assert len(rows) == 81
    assert rows[0]["delay_um"] == -200 and rows[-1]["delay_um"] == 200
    summary = json.loads((out / "dip_summary.json").read_text())
    assert summary["min_shoulder_ratio"] == pytest.approx(0.008, abs=0.002)


def test_manifest(tmp_path):
    out = run(tmp_path, "pure-overlap", "--periods", "5", "--seed", "17")
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest) == {"artifact_files", "command", "config_snapshot", "inputs", "seed",
                             "tool_version"}
    assert manifest["command"] == "pure-overlap"
    assert manifest["seed"] == 17 == manifest["config_snapshot"]["seed"]
    assert manifest["artifact_files"] == ["pure_overlap.csv"]
    assert manifest["tool_version"] == __version__
    assert manifest["inputs"]["thetas_deg"] == [float(t) for t in range(0, 91, 5)]
    assert list(manifest) == sorted(manifest)


def test_pure_overlap_columns(tmp_path):
    out = run(tmp_path, "pure-overlap", "--periods", "20", "--thetas", "0,90")
    header, rows = read_csv(out / "pure_overlap.csv")
    assert header == ["theta_deg", "f_est", "f_err", "f_theory"]
    assert rows[0]["f_est"] == pytest.approx(1, abs=0.02)
    assert rows[1]["f_est"] == pytest.approx(0, abs=0.02)


def test_parallel_perp_flat_without_phase(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("arm_phase_deg = 0\nmode_overlap = 1\n", encoding="utf-8")
    out = run(tmp_path, "parallel-perp", "--config", str(cfg), "--periods", "20")
    _, par = read_csv(out / "parallel.csv")
    _, perp = read_csv(out / "perpendicular.csv")
    assert all(r["f_est"] == pytest.approx(1, abs=0.02) for r in par)
    assert all(r["f_est"] == pytest.approx(0, abs=0.02) for r in perp)
    doc = json.loads((out / "fit.json").read_text())
    assert set(doc["phase"]) == {"parallel", "perpendicular", "pooled"}


def test_fidelity_columns(tmp_path):
    out = run(tmp_path, "fidelity", "--periods", "20", "--p-grid", "0.2,1")
    header, rows = read_csv(out / "fidelity.csv")
    assert header == ["p", "f_est_V", "f_err_V", "f_th_V", "f_est_A", "f_err_A", "f_th_A"]
    assert rows[0]["f_th_V"] == pytest.approx(0.6)
    assert all(r["f_th_A"] == pytest.approx(0.5) for r in rows)
    assert rows[1]["f_est_V"] == pytest.approx(0.992, abs=0.02)


def test_purity_columns(tmp_path):
    out = run(tmp_path, "purity", "--periods", "50", "--p-grid", "0.6,1", "--mixing", "component")
    header, rows = read_csv(out / "purity.csv")
    assert header == ["p", "purity_est", "purity_err", "purity_th", "lambda1", "lambda1_err",
                      "lambda2", "lambda2_err", "clamped_flag", "entropy", "entropy_err"]
    assert rows[0]["purity_th"] == pytest.approx(0.68)


def test_mixed_table_json_format(tmp_path):
    out = run(tmp_path, "mixed-table", "--periods", "20", "--pairs", "0.2:0.4,0.6:0.8",
              "--format", "json")
    rows = json.loads((out / "mixed_table.json").read_text())
    assert [r["f_th"] for r in rows] == [pytest.approx(0.54), pytest.approx(0.74)]
    assert [r["d_th"] for r in rows] == [pytest.approx(0.1), pytest.approx(0.1)]
    summary = json.loads((out / "mixed_table_summary.json").read_text())
    assert summary["rows"][0]["f_reference"] == 0.545


def test_multimeter(tmp_path):
    out = run(tmp_path, "multimeter", "--periods", "20")
    header, rows = read_csv(out / "multimeter.csv")
    assert header == ["theta_deg", "p_one_same", "p_one_orth", "fidelity_est", "fidelity_err",
                      "fidelity_ideal"]
    assert [r["theta_deg"] for r in rows] == [0, -45, 45]
    assert all(r["fidelity_est"] == pytest.approx(0.748, abs=0.01) for r in rows)


def test_ingest(tmp_path):
    s = run_measurement(ApparatusParams(), Preparation.pure_pair(0, 0.6), 30, RngStream(3))
    counts = emit_counts(s, tmp_path / "counts.csv")
    out = run(tmp_path, "ingest", str(counts))
    doc = json.loads((out / "estimates.json").read_text())
    assert doc["totals"]["dip_counts"] == sum(r.coincidences for r in s.dip)
    assert doc["overlap"]["value"] == pytest.approx(0.992 * 0.6813, abs=0.02)


def test_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("period_index,delay_um,duration_s,coincidences\n0,200.0,1.0,5\n")
    assert main(["ingest", str(bad), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "no dip records" in err


def test_unknown_config_key_exit(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("sed = 3\n")
    assert main(["dip", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "unknown key" in capsys.readouterr().err


def test_config_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(format_config(RunConfig(seed=5, periods=7)), encoding="utf-8")
    out = run(tmp_path, "pure-overlap", "--config", str(cfg), "--seed", "9", "--thetas", "0,45")
    snap = json.loads((out / "manifest.json").read_text())["config_snapshot"]
    assert (snap["seed"], snap["periods"]) == (9, 7)
