import json

import pytest

from tracelab.cli import main

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


def run(tmp_path, *args):
    out = tmp_path / "out"
    return main([*args, "--out", str(out)]), out


def test_constants_subcommand(tmp_path):
    code, out = run(tmp_path, "constants", "--set", "theorem=T7", "--set", "alpha=1,1")
    assert code == 0
    payload = json.loads((out / "constants.json").read_text())
    assert payload["law"]["constant"] == pytest.approx(0.3183098861837907)
    assert "config_hash" in payload


def test_eig_writes_artifacts(tmp_path):
    code, out = run(tmp_path, "eig", "--set", "gamma=2", "--set", "k=6",
                    "--set", "half_widths=8", "--set", "spacing=0.05")
    assert code == 0
    assert (out / "spectrum.csv").exists()
    assert (out / "counting.png").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["spectrum"]["lowest"] == pytest.approx(1.0, abs=1e-3)


def test_fit_from_csv(tmp_path):
    code, out = run(tmp_path, "eig", "--set", "gamma=2", "--set", "k=40",
                    "--set", "half_widths=12", "--set", "spacing=0.03")
    assert code == 0
    code2, out2 = run(tmp_path / "fit", "fit",
                      "--set", f"input={out / 'spectrum.csv'}",
                      "--set", "fit_lo=5", "--set", "fit_hi=70",
                      "--set", "d_candidates=0")
    assert code2 == 0
    fit = json.loads((out2 / "fit.json").read_text())
    assert fit["power"] == pytest.approx(1.0, abs=0.1)  # harmonic N(E) ~ E/2
    assert (out2 / "fit.png").exists()


def test_trace_divergence_certificate(tmp_path):
    code, out = run(tmp_path, "trace", "--set", "source=sliced-gt", "--set", "alpha=1,1")
    assert code == 0
    cert = json.loads((out / "divergence.json").read_text())
    assert cert["quantity"] == "Z_SGT"


def test_trace_classical(tmp_path):
    code, out = run(tmp_path, "trace", "--set", "source=classical-1d",
                    "--set", "gamma=2")
    assert code == 0
    lines = (out / "trace.csv").read_text().strip().splitlines()
    assert lines[0].startswith("# config_hash")
    assert lines[1] == "t,value,error"
    assert (out / "trace.png").exists()


def test_fk_subcommand(tmp_path):
    code, out = run(tmp_path, "fk", "--set", "gamma=2", "--set", "t=1",
                    "--set", "paths=5000", "--set", "steps=32")
    assert code == 0
    payload = json.loads((out / "fk.json").read_text())
    assert payload["mean"] == pytest.approx(0.4254, abs=0.02)


def test_logvol_subcommand(tmp_path):
    code, out = run(tmp_path, "lemma-logvol", "--set", "integrand=exp")
    assert code == 0
    payload = json.loads((out / "logvol.json").read_text())
    assert payload["rel_diff"] < 1e-6


def test_zeta_subcommand(tmp_path):
    code, out = run(tmp_path, "zeta", "--set", "gamma=2", "--set", "k=40",
                    "--set", "half_widths=12", "--set", "spacing=0.03",
                    "--set", "s=2")
    assert code == 0
    payload = json.loads((out / "zeta.json").read_text())
    assert payload["total"] == pytest.approx(1.2337, abs=0.01)


def test_homotopy_subcommand(tmp_path):
    code, out = run(tmp_path, "homotopy", "--set", "j_list=1,4,16",
                    "--set", "half_widths=4", "--set", "spacing=0.1", "--set", "k=2")
    assert code == 0
    payload = json.loads((out / "homotopy.json").read_text())
    assert payload["monotone_in_j"] is True
    assert (out / "homotopy.png").exists()


def test_bad_config_exit_code(tmp_path):
    code, _ = run(tmp_path, "eig", "--set", "alpha=oops")
    assert code == 2
    code, _ = run(tmp_path, "trace", "--set", "source=unknown-source")
    assert code == 2


def test_convergence_failure_exit_code(tmp_path):
    # s below the counting growth power: the zeta tail diverges
    code, _ = run(tmp_path, "zeta", "--set", "gamma=2", "--set", "k=40",
                  "--set", "half_widths=12", "--set", "spacing=0.03",
                  "--set", "s=0.8")
    assert code == 3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("theorem = T4\nalpha = 1,1\n# comment\n")
    out = tmp_path / "out"
    code = main(["constants", "--config", str(cfg), "--set", "theorem=T7",
                 "--out", str(out)])
    assert code == 0
    payload = json.loads((out / "constants.json").read_text())
    assert payload["theorem"] == "T7"
    assert payload["config"]["theorem"] == "T7"


def test_verify_single_criterion(tmp_path):
    code, out = run(tmp_path, "verify", "--set", "criteria=12")
    assert code == 0
    report = json.loads((out / "verify_report.json").read_text())
    assert report["passed"] is True
    assert report["criteria"][0]["id"] == 12
