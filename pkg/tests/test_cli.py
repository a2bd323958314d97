import csv
import filecmp
import json

import pytest

from cutproject import export as ex
from cutproject.cli import main

TAU = (1 + 5**0.5) / 2


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([args[0], "--out", str(out), "-q", *args[1:]])
    return code, out


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_generate_defaults(tmp_path, capsys):
    code, out = run(tmp_path, "generate", "--radius", "50")
    assert code == 0
    values = [float(r["value"]) for r in rows(out / "modelset.csv")]
    nonneg = [v for v in values if v >= 0][:4]
    assert nonneg == pytest.approx([0, 1, TAU, 1 + TAU], abs=1e-15)
    sample = ex.sample_from_json(json.loads((out / "modelset.json").read_text()))
    assert len(sample) == len(values)
    assert "min_gap" in capsys.readouterr().out


def test_generate_empty_window(tmp_path, capsys):
    code, out = run(tmp_path, "generate", "--window-lo", "1", "--window-hi", "0.5")
    assert code == 2
    assert "window empty" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize("args", [
    ["density", "--q-a", "2", "--q-b", "0"],
    ["density", "--p", "2", "--r", "-1"],
    ["eigen", "--grid", "3"],
    ["hutchinson", "--tol", "-1"],
    ["diffract", "--window-lo", "0.1"],
    ["generate", "--radius", "many"],
])
def test_config_errors(tmp_path, args):
    code, out = run(tmp_path, *args)
    assert code == 2
    assert not out.exists()


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "job.cfg"
    cfg.write_text("# golden ring\nradius = 20\nwindow_lo = -3/2 + 1/2*sqrt(5)\nwindow_hi = 3/2 - 1/2*sqrt(5)\nformat = json\n")
    code, out = run(tmp_path, "generate", "--config", str(cfg), "--radius", "30")
    assert code == 0
    assert sorted(p.name for p in out.iterdir()) == ["modelset.json"]
    obj = json.loads((out / "modelset.json").read_text())
    assert obj["radius"] == 30
    assert obj["window"]["hi"]["exact"] == "3/2 - 1/2*sqrt(5)"


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "job.cfg"
    cfg.write_text("colour = blue\n")
    code, _ = run(tmp_path, "generate", "--config", str(cfg))
    assert code == 2


def test_numeric_failure_exit_code(tmp_path, capsys):
    code, _ = run(tmp_path, "hutchinson", "--radius", "5", "--max-iter", "2", "--bins", "256")
    assert code == 3
    assert "no convergence" in capsys.readouterr().err


def test_density_outputs_deterministic(tmp_path):
    args = ["density", "--grid", "1024", "--powers", "1,2"]
    code1, out1 = run(tmp_path, *args, name="a")
    code2, out2 = run(tmp_path, *args, name="b")
    assert code1 == code2 == 0
    names = sorted(p.name for p in out1.iterdir())
    assert "density.svg" in names and "fhat_q1.csv" in names and "density_q2.json" in names
    for name in names:
        assert filecmp.cmp(out1 / name, out2 / name, shallow=False), name
    summary = rows(out1 / "density_summary.csv")
    assert all(abs(float(r["integral"]) - 1) < 1e-6 for r in summary)


def test_density_four_panel_svg(tmp_path):
    code, out = run(tmp_path, "density", "--grid", "512", "--format", "svg")
    assert code == 0
    svg = (out / "density.svg").read_text()
    assert svg.count("<polyline") == 8


def test_eigen(tmp_path):
    code, out = run(tmp_path, "eigen", "--radius", "300", "--grid", "2048")
    assert code == 0
    spectrum_rows = rows(out / "spectrum.csv")
    assert [int(r["multiplicity"]) for r in spectrum_rows] == [1] * 5
    assert float(spectrum_rows[1]["eigenvalue"]) == pytest.approx(-1 / TAU)
    summary = rows(out / "eigen_summary.csv")
    assert [int(r["sign_changes"]) for r in summary] == [0, 1, 2, 3, 4]
    assert all(float(r["residual"]) < 0.1 for r in summary)
    assert (out / "derivatives.svg").exists()


def test_diffract(tmp_path):
    code, out = run(tmp_path, "diffract", "--radius", "2000")
    assert code == 0
    summary = {r["quantity"]: r["value"] for r in rows(out / "diffract_summary.csv")}
    assert float(summary["intensity_at_zero"]) == 1
    assert summary["support_included"] == "True"
    probes = rows(out / "probes.csv")
    assert len(probes) == 5 and all(float(p["intensity"]) < 0.05**2 for p in probes)
    assert rows(out / "bragg_flat.csv")[0].keys() == {"k", "k_star", "re", "im", "intensity"}


def test_hutchinson(tmp_path, caplog):
    with caplog.at_level("INFO", logger="cutproject"):
        code = main(["hutchinson", "--out", str(tmp_path / "h"), "--radius", "50", "--bins", "1024"])
    assert code == 0
    assert any("iterations" in m for m in caplog.messages)
    masses = [float(r["mass"]) for r in rows(tmp_path / "h" / "measure.csv")]
    assert sum(masses) == pytest.approx(1, abs=1e-12)
    table = rows(tmp_path / "h" / "weak_convergence.csv")
    errs = [float(r["error_x2"]) for r in table]
    assert errs[-1] < errs[0]
