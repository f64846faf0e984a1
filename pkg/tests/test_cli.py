import json

import pytest
from typer.testing import CliRunner

from nmkdv.ledger import load_runs
from nmkdv.main import app
from nmkdv.report import read_csv

runner = CliRunner()


def invoke(out_dir, *args):
    return runner.invoke(app, ["--out-dir", str(out_dir), *args])


def test_phase_writes_saddles(tmp_path):
    result = invoke(tmp_path, "phase", "--xi=-3")
    assert result.exit_code == 0, result.output
    record = json.loads((tmp_path / "saddles_xim3.json").read_text())
    z1 = record["saddles"]["zeta"][0]
    assert z1 == pytest.approx([0.86603, 0.5], abs=1e-5)
    assert record["config"]["command"] == "phase"


def test_phase_outside_region_exits_2(tmp_path):
    result = invoke(tmp_path, "phase", "--xi", "7")
    assert result.exit_code == 2
    assert load_runs()[-1]["exit_code"] == 2


def test_phase_signature_grid(tmp_path):
    result = invoke(tmp_path, "phase", "--xi", "0.5", "--grid=-2:2:11")
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "signature_xi0.5.csv").read_text().splitlines()
    assert lines[0].startswith("# config:")
    assert lines[1] == "re_z,im_z,sign"
    row = lines[2].split(",")
    assert float(row[0]) == -2.0 and float(row[1]) == -2.0 and row[2] in ("-1", "0", "1")


def test_bad_grid_exits_2(tmp_path):
    result = invoke(tmp_path, "phase", "--xi", "0", "--grid", "1:2")
    assert result.exit_code == 2


def test_truncated_datum_exits_5(tmp_path):
    result = invoke(tmp_path, "scatter", "--fixture", "truncated", "--no-poles", "--n-circle", "8")
    assert result.exit_code == 5


def test_background_scattering_is_trivial(tmp_path):
    result = invoke(tmp_path, "scatter", "--fixture", "background", "--no-poles", "--n-circle", "16")
    assert result.exit_code == 0, result.output
    data = json.loads((tmp_path / "scattering.json").read_text())
    assert data["diagnostics"]["max_det_error"] < 1e-10
    assert data["poles"] == []


def test_soliton_then_residual(tmp_path):
    result = invoke(tmp_path, "soliton", "--fixture", "one_pole", "--x-grid=-2:2:5", "--t-grid=-0.1:0.1:3")
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "soliton.csv").read_text().splitlines()
    assert len(lines) == 2 + 15

    poles = tmp_path / "poles.json"
    result = invoke(tmp_path, "verify", "residual", "--poles", str(poles), "--x-grid=-1:1:3", "--t-grid=-0.1:0.1:2")
    assert result.exit_code == 0, result.output
    summary = json.loads((tmp_path / "residual.json").read_text())
    assert summary["passed"] and summary["max_residual"] < 1e-4


def test_asym_then_decay(tmp_path):
    result = invoke(tmp_path, "--dump-intermediates", "asym", "--xi=-3", "--t", "100,1000,10000,100000")
    assert result.exit_code == 0, result.output
    fit = json.loads((tmp_path / "asym_fit.json").read_text())
    assert fit["fits"][0]["slope"] == pytest.approx(-0.5, abs=1e-6)
    assert fit["error_order"] == "O(t^-1)"
    assert (tmp_path / "asym_intermediates.json").exists()
    rows = read_csv(tmp_path / "asym.csv")
    assert [r["error_order"] for r in rows] == ["O(t^-1)"] * 4
    assert all(abs(float(r["im_f"])) < 1e-10 for r in rows)

    result = invoke(tmp_path, "verify", "decay", str(tmp_path / "asym.csv"))
    assert result.exit_code == 0, result.output
    decay = json.loads((tmp_path / "decay.json").read_text())
    assert decay["exponent"] == pytest.approx(-0.5, abs=1e-6)
    assert decay["samples"] == 4


def test_asym_rejects_small_times(tmp_path):
    result = invoke(tmp_path, "asym", "--xi", "0", "--t", "1,100")
    assert result.exit_code == 2


def test_decay_needs_enough_samples(tmp_path):
    invoke(tmp_path, "asym", "--xi", "1", "--t", "100,1000")
    result = invoke(tmp_path, "verify", "decay", str(tmp_path / "asym.csv"))
    assert result.exit_code == 1


def test_identical_runs_give_identical_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    invoke(a, "phase", "--xi", "1.5", "--grid=-1:1:5")
    invoke(b, "phase", "--xi", "1.5", "--grid=-1:1:5")
    for name in ("saddles_xi1.5.json", "signature_xi1.5.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_runs_lists_journal(tmp_path):
    invoke(tmp_path, "phase", "--xi", "0")
    invoke(tmp_path, "phase", "--xi", "9")
    runs = load_runs()
    assert [r["exit_code"] for r in runs] == [0, 2]
    result = runner.invoke(app, ["runs"])
    assert result.exit_code == 0
    assert "phase" in result.output
