import csv
import io
import json

import pytest

from kottler.cli import Verdict, run, run_id


def call(argv, monkeypatch=None, tmp_path=None):
    if monkeypatch is not None:
        monkeypatch.chdir(tmp_path)
    out = io.StringIO()
    code = run(argv, stdout=out)
    text = out.getvalue()
    return code, (json.loads(text) if text else None)


def test_verdict_status():
    assert Verdict("a", 1.0, 1.0, 0.0).passed
    assert not Verdict("a", 1.1, 1.0, 0.05).passed
    assert Verdict("a", 1.04, 1.0, 0.05).status == "pass"
    err = Verdict.error("a", "boom")
    assert not err.passed and err.status == "error" and err.message == "boom"


def test_model_csv(tmp_path):
    code, rep = call(["model", "--n", "3", "--m", "0.1", "--out", "p.csv", "--output-dir", str(tmp_path)])
    assert code == 0
    with open(tmp_path / "p.csv") as fh:
        header = next(csv.reader(fh))
    assert header == ["r", "rho", "u", "dudr", "drhodr", "constraint_residual"]
    assert len(rep["run_id"]) == 16


def test_model_nariai(tmp_path):
    code, _ = call(["model", "--family", "nariai", "--n", "3", "--out", "n.csv", "--output-dir", str(tmp_path)])
    assert code == 0


def test_mass_out_of_range():
    assert call(["mass", "--n", "3", "--k", "0.5", "--class", "outer"])[0] == 2


def test_mass_ok():
    code, rep = call(["mass", "--n", "3", "--k", "1.2601705164785538", "--class", "outer"])
    assert code == 0
    assert rep["m"] == pytest.approx(0.1, abs=1e-9)


def test_roundtrip():
    code, rep = call(["verify", "roundtrip", "--n", "3", "--rho0", "0.46416"])
    assert code == 0
    assert rep["m_outer"] == pytest.approx(0.1, abs=1e-4)
    assert rep["m_inner"] == pytest.approx(rep["m_outer"], abs=1e-6)


def test_psi_and_expansion():
    code, rep = call(["psi", "--n", "3", "--m", "0.1", "--u", "0.5", "--branch", "outer"])
    assert code == 0 and rep["psi"] == pytest.approx(0.6728829727813683, rel=1e-12)
    assert call(["verify", "expansion", "--n", "3", "--m", "0.1"])[0] == 0


def test_evolve_and_gradest(tmp_path):
    code, _ = call(["evolve", "--n", "3", "--rho0", "0.46416", "--out", "e.csv", "--output-dir", str(tmp_path)])
    assert code == 0
    gradest = ["verify", "gradest", "--profile", str(tmp_path / "e.csv"), "--output-dir", str(tmp_path)]
    # an evolved profile carries no model mass, so it must be given
    assert call(gradest)[0] == 2
    code, rep = call(gradest + ["--m", repr(0.46416**3), "--out", "g.csv"])
    assert code == 0 and rep["ratio_max"] <= 1 + 1e-8


def test_loja_fit_pairs(tmp_path):
    code, rep = call(["loja", "--field", "neg_x2y2", "--points", "513", "--center", "1,0", "--window", "0.01,0.1",
                      "--pairs-out", "pairs.csv", "--output-dir", str(tmp_path)])
    assert code == 0
    assert rep["theta"] == pytest.approx(1.0, abs=0.05)
    assert rep["max_set_components"] == [1]
    assert (tmp_path / "pairs.csv").read_text().startswith("log_gap,log_grad_sq")


def test_loja_reverse_and_forward_error():
    code, rep = call(["loja", "--field", "torus_sin2sin2", "--window", "0.02,0.3", "--mode", "reverse",
                      "--theta", "0.9"])
    assert code == 0
    assert call(["loja", "--field", "neg_x2y2", "--center", "1,0", "--mode", "forward", "--theta", "2.5"])[0] == 2


@pytest.mark.parametrize("argv", [
    [],
    ["verify"],
    ["model", "--n", "3", "--m", "0.1", "--bogus"],
    ["model", "--n", "2", "--m", "0.1"],
    ["model", "--n", "3"],
    ["sweep", "--masses", "0.1:0.2:0"],
    ["loja", "--field", "neg_x2y2", "--window", "0.1"],
])
def test_usage_errors(argv):
    assert call(argv)[0] == 2


def test_config_file_defaults_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nn = 3\nm = 0.1\nsamples = 50\n")
    code, rep = call(["model", "--config", str(cfg)])
    assert code == 0 and rep["config"]["samples"] == 50
    code, rep = call(["model", "--config", str(cfg), "--samples", "60"])
    assert rep["config"]["samples"] == 60
    cfg.write_text("colour = red\n")
    assert call(["model", "--config", str(cfg)])[0] == 2
    cfg.write_text("family = ads\n")
    assert call(["model", "--config", str(cfg)])[0] == 2


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("KOTTLER_OUTPUT_DIR", str(tmp_path))
    code, _ = call(["model", "--n", "3", "--m", "0.1", "--out", "sub/p.csv"])
    assert code == 0 and (tmp_path / "sub" / "p.csv").exists()


def test_report_and_determinism(tmp_path):
    argv = ["model", "--n", "4", "--m", "0.03125", "--report", "r.json", "--output-dir", str(tmp_path)]
    code, first = call(argv)
    code2, second = call(argv)
    assert code == code2 == 0 and first == second
    assert json.loads((tmp_path / "r.json").read_text()) == first
    assert first["run_id"] == run_id(first["config"])


def test_sweep_roundtrip_workers_independent():
    base = ["sweep", "--kind", "roundtrip", "--n", "3", "--masses", "0.01:0.18:4"]
    out1, out4 = io.StringIO(), io.StringIO()
    assert run(base + ["--workers", "1"], stdout=out1) == 0
    assert run(base + ["--workers", "4"], stdout=out4) == 0
    assert out1.getvalue() == out4.getvalue()
    assert len(json.loads(out1.getvalue())["verdicts"]) == 8


def test_sweep_monotonicity():
    code, rep = call(["sweep", "--kind", "monotonicity", "--n", "3,4,5"])
    assert code == 0 and len(rep["verdicts"]) == 3


def test_sweep_records_case_errors():
    # a mass past m_max errors for that case only
    code, rep = call(["sweep", "--n", "3", "--masses", "0.1,0.5"])
    assert code == 1
    statuses = [v["status"] for v in rep["verdicts"]]
    assert "error" in statuses and "pass" in statuses
