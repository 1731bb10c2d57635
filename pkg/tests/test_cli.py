import csv
import json
import math

import pytest

from optorigid import cli
from optorigid.cli import OUTPUT_ENV, main
from optorigid.config import load_config

ESTIMATE = ["--m", "1e-11", "--W_in", "1e-4", "--T0_sq", "1e-4", "--R_sq", "0.7", "--wavelength", "1e-6",
         "--d", "-0.55"]


def read_csv(path):
    with open(path) as fh:
        comment = fh.readline()
        rows = list(csv.reader(fh))
    header, body = rows[0], [[float(v) for v in r] for r in rows[1:]]
    return comment, header, body


def column(path, name):
    _, header, body = read_csv(path)
    i = header.index(name)
    return [r[i] for r in body]


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


class TestStabilityMap:
    def test_single_cell(self, tmp_path):
        assert run(tmp_path, "stability-map", "--d-values", "-0.7", "--y-values", "0.5") == 0
        doc = json.loads((tmp_path / "stability_map.json").read_text())
        assert [c["verdict"] for c in doc["cells"]] == ["stable"]

    def test_default_grid_has_no_stable_positive_detuning(self, tmp_path):
        assert run(tmp_path, "stability-map", "--d-points", "41", "--y-points", "21") == 0
        with open(tmp_path / "stability_map.csv") as fh:
            fh.readline()
            rows = list(csv.DictReader(fh))
        assert len(rows) == 41 * 21
        stable = [float(r["d"]) for r in rows if r["verdict"] == "stable"]
        assert stable and max(stable) < 0


class TestSpectraCommands:
    def test_susceptibility_columns(self, tmp_path):
        assert run(tmp_path, "susceptibility", "--d", "-0.55", "--y", "0.3", "--points", "50") == 0
        comment, header, body = read_csv(tmp_path / "susceptibility.csv")
        assert comment.startswith("#") and header[0] == "Omega_over_kappa0"
        assert len(body) == 50

    def test_psd_theta(self, tmp_path):
        assert run(tmp_path, "psd", "--d", "-0.55", "--y", "0.5", "--points", "20", "--theta", "0.3") == 0
        _, header, _ = read_csv(tmp_path / "psd.csv")
        assert header == ["Omega_over_kappa0", "S_F", "S_x", "S_f", "S_a", "S_p"]

    def test_neff_json(self, tmp_path):
        assert run(tmp_path, "neff", "--d", "-0.55", "--y", "0.01") == 0
        doc = json.loads((tmp_path / "neff.json").read_text())
        assert doc["n_eff"] > 0 and doc["cutoff_change"] < 0.01

    def test_neff_unstable_is_config_error(self, tmp_path):
        assert run(tmp_path, "neff", "--d", "0.55", "--y", "0.5") == 2

    def test_numerical_failure_exit(self, tmp_path, capsys):
        # a cutoff below the cavity linewidth cannot converge
        assert run(tmp_path, "neff", "--d", "-0.55", "--y", "0.01", "--cutoff", "0.05") == 3
        assert "numerical failure" in capsys.readouterr().err


class TestReport:
    def test_design_estimate(self, tmp_path, capsys):
        assert run(tmp_path, "report", *ESTIMATE, "--y", "0.01") == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["Omega0_simplified"] == pytest.approx(9.2e4, rel=0.02)
        assert doc["Omega_m"] == pytest.approx(8.6e4, rel=0.03)
        assert doc["kappa0_over_Omega0"] == pytest.approx(32.37, rel=0.01)
        assert doc["verdict"] == "stable" and doc["n_eff"] > 0
        assert "Omega_m" in capsys.readouterr().out

    def test_no_power(self, tmp_path):
        args = ["--m", "1e-11", "--omega_p", "1.88e15", "--kappa0", "1e6", "--delta", "-5.5e5",
                "--eta", "1e9", "--W_in", "0"]
        assert run(tmp_path, "report", *args) == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["verdict"] == "no rigidity"
        assert doc["Omega_m"] == 0 and doc["k0"] == 0 and doc["n_eff"] is None

    def test_unstable_still_reports(self, tmp_path):
        assert run(tmp_path, "report", "--d", "0.55", "--y", "0.5") == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["verdict"] == "unstable" and doc["n_eff"] is None


class TestMsiDesign:
    def test_design(self, tmp_path):
        assert run(tmp_path, "msi-design", "--T0_sq", "1e-4", "--R_sq", "0.7") == 0
        doc = json.loads((tmp_path / "msi_design.json").read_text())
        assert doc["T_bs"] ** 2 == pytest.approx(0.50274, abs=5e-6)
        assert doc["eta"] == pytest.approx(334.66, rel=1e-4)

    def test_invalid_targets(self, tmp_path):
        assert run(tmp_path, "msi-design", "--T0_sq", "1.5", "--R_sq", "0.7") == 2
        assert run(tmp_path, "msi-design", "--T0_sq", "1e-4", "--R_sq", "0.7", "--k", "1", "--wavelength", "1") == 2


class TestFigures:
    def test_bad_number(self, tmp_path):
        assert run(tmp_path, "reproduce-figure", "3") == 2
        assert run(tmp_path, "reproduce-figure") == 2

    def test_figure2_panels(self, tmp_path):
        assert run(tmp_path, "reproduce-figure", "2", "--points", "200") == 0
        for name in ("fig2_top.csv", "fig2_bottom.csv"):
            _, header, body = read_csv(tmp_path / name)
            assert header[0] == "Omega_over_kappa0" and len(body) == 200
        prov = json.loads((tmp_path / "reproduce-figure.provenance.json").read_text())
        assert [p["d"] for p in prov["panels"]] == [-0.55, (0.1 - math.sqrt(3)) / 2]

    def test_figure2_agreement_small_pump(self, tmp_path):
        assert run(tmp_path, "reproduce-figure", "2", "--points", "2000") == 0
        for name in ("fig2_top.csv", "fig2_bottom.csv"):
            for y in ("0.1", "0.3"):
                exact = max(column(tmp_path / name, f"chi_abs_y={y}"))
                approx = max(column(tmp_path / name, f"chi_m_abs_y={y}"))
                assert abs(approx / exact - 1) < 0.25

    def test_figure6_columns(self, tmp_path):
        assert run(tmp_path, "reproduce-figure", "--figure", "6", "--points", "100") == 0
        _, header, _ = read_csv(tmp_path / "fig6_top.csv")
        assert header == ["Omega_over_kappa0", "S_f_tan=0", "S_f_tan=0.5", "S_f_tan=1", "S_f_tan=2", "chi_abs"]


class TestConfigHandling:
    def test_file_and_override(self, tmp_path):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("# sweep\nd = -0.55\ny = 0.3\npoints = 10\n")
        out = tmp_path / "o"
        assert main(["susceptibility", "--config", str(cfgfile), "--points", "7", "--out", str(out)]) == 0
        assert len(read_csv(out / "susceptibility.csv")[2]) == 7
        prov = json.loads((out / "susceptibility.provenance.json").read_text())
        assert prov["config"]["points"] == 7 and prov["config"]["y"] == 0.3

    @pytest.mark.parametrize("text", ["d -0.55\n", "d = abc\n", "bogus = 1\n", "y = nan\n", "{not json"])
    def test_malformed(self, tmp_path, text):
        cfgfile = tmp_path / "bad.cfg"
        cfgfile.write_text(text)
        assert run(tmp_path, "neff", "--config", str(cfgfile)) == 2

    def test_missing_file(self, tmp_path):
        assert run(tmp_path, "neff", "--config", str(tmp_path / "nope.cfg")) == 2

    def test_mixed_styles(self, tmp_path, capsys):
        args = ["--d", "-0.55", "--y", "0.3", "--m", "1e-11"]
        assert run(tmp_path, "psd", *args) == 2
        assert "mixed parameter styles" in capsys.readouterr().err

    def test_unknown_flag(self, tmp_path):
        assert run(tmp_path, "psd", "--nonsense", "1") == 2

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
        assert main(["neff", "--d", "-0.55", "--y", "0.01"]) == 0
        assert (tmp_path / "env" / "neff.json").exists()

    def test_flag_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
        assert run(tmp_path / "flag", "neff", "--d", "-0.55", "--y", "0.01") == 0
        assert (tmp_path / "flag" / "neff.json").exists()
        assert not (tmp_path / "env").exists()

    def test_prefix(self, tmp_path):
        assert run(tmp_path, "neff", "--d", "-0.55", "--y", "0.01", "--prefix", "a_") == 0
        assert (tmp_path / "a_neff.json").exists() and (tmp_path / "a_neff.provenance.json").exists()


REPLAYS = [
    ("psd", ["--d", "-0.6", "--y", "0.4", "--points", "64", "--theta", "0.2"]),
    ("stability-map", ["--d-points", "9", "--y-points", "5"]),
    ("report", ESTIMATE + ["--y", "0.01"]),
    ("reproduce-figure", ["5", "--points", "50"]),
    ("simulate", ["--d", "-0.7", "--y", "0.5", "--duration", "200", "--ensemble", "2", "--seed", "5"]),
]


@pytest.mark.parametrize("command,args", REPLAYS, ids=[r[0] for r in REPLAYS])
def test_sidecar_replay_is_bit_identical(tmp_path, command, args):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main([command, *args, "--out", str(first)]) == 0
    sidecar = first / f"{command}.provenance.json"
    doc = json.loads(sidecar.read_text())
    assert doc["version"] and doc["command"] == command
    assert load_config(sidecar) == doc["config"]
    assert main([command, "--config", str(sidecar), "--out", str(second)]) == 0
    for name in doc["outputs"]:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_simulate_seed_changes_output(tmp_path):
    base = ["simulate", "--d", "-0.7", "--y", "0.5", "--duration", "200", "--ensemble", "1"]
    assert main([*base, "--seed", "1", "--out", str(tmp_path / "a")]) == 0
    assert main([*base, "--seed", "2", "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "simulate_trajectory.csv").read_bytes()
    b = (tmp_path / "b" / "simulate_trajectory.csv").read_bytes()
    assert a != b


def test_simulate_unstable_reports_growth(tmp_path):
    assert run(tmp_path, "simulate", "--d", "0.55", "--y", "0.5", "--duration", "150", "--ensemble", "4") == 0
    doc = json.loads((tmp_path / "simulate.json").read_text())
    assert doc["diverged"] and doc["growth_rate"] == pytest.approx(doc["max_real_part"], rel=0.1)


def test_negative_exponent_values():
    assert cli._bind_negative_values(["--delta", "-5.5e5", "--d", "-1", "-h"]) == [
        "--delta=-5.5e5", "--d=-1", "-h"]


def test_commands_cover_handlers():
    assert set(cli.COMMANDS) == set(cli.HANDLERS)
