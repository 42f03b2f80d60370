import os
import subprocess
import sys
from pathlib import Path

import pytest

from convolve_hf.cli import main
from convolve_hf.config import parse_config
from convolve_hf.errors import ConfigError

REPO = Path(__file__).resolve().parent.parent


def write_config(tmp_path: Path, body: str, name="run.cfg") -> Path:
    path = tmp_path / name
    path.write_text(body)
    return path


SCF_SMOKE = """
grid.n = 32
grid.extent = 12.0
system.nuclei = 2.0, 0.0, 0.0, 0.0
scf.max_iter = 200
scf.mixing = 0.6
residuals.source = scf
residuals.t = 1.6
output.dir = {out}
"""


class TestConfigParsing:
    def test_defaults_and_comments(self):
        cfg = parse_config("# only a comment\n\ngrid.n = 48  # inline\n")
        assert cfg.grid_n == 48
        assert cfg.grid_extent == 10.0
        assert cfg.scf_eigensolver == "imaginary_time"

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="grid.m"):
            parse_config("grid.m = 48\n")

    def test_malformed_nucleus_named(self):
        with pytest.raises(ConfigError, match="system.nuclei"):
            parse_config("system.nuclei = 2.0, 0.0, 0.0\n")

    def test_multiple_nuclei(self):
        cfg = parse_config("system.nuclei = 1.0,0.7,0,0 ; 1.0,-0.7,0,0\n")
        assert len(cfg.nuclei) == 2
        assert cfg.nuclei[1][1] == (-0.7, 0.0, 0.0)

    def test_module_preconditions_enforced(self):
        with pytest.raises(ConfigError):
            parse_config("grid.n = 33\n")  # odd
        with pytest.raises(ConfigError):
            parse_config("scf.mixing = 0.0\n")
        with pytest.raises(ConfigError):
            parse_config("basis.beta = 1.0\n")
        with pytest.raises(ConfigError):
            parse_config("system.nuclei = 2.0, 99.0, 0.0, 0.0\n")  # outside box

    def test_time_step_auto(self):
        assert parse_config("scf.time_step = auto\n").scf_time_step is None
        assert parse_config("scf.time_step = 0.004\n").scf_time_step == 0.004

    def test_orders_default_ladder(self):
        cfg = parse_config("basis.count = 8\n")
        assert cfg.orders() == (2, 4, 6, 8)
        cfg = parse_config("basis.count = 8\nexpand.orders = 3, 5\n")
        assert cfg.orders() == (3, 5)


class TestShippedConfigs:
    @pytest.mark.parametrize(
        "name",
        ["he.cfg", "he_quick.cfg", "h2.cfg", "hydrogen_identity.cfg",
         "zero_orbital.cfg", "extend_sweep.cfg", "verify.cfg"],
    )
    def test_parses_and_validates(self, name):
        from convolve_hf.config import load_config

        cfg = load_config(REPO / "configs" / name)
        assert cfg.grid_n >= 8


class TestScfCommand:
    def test_smoke_run_writes_contract_files(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, SCF_SMOKE.format(out=out))
        code = main(["scf", "--config", str(cfg), "--quiet"])
        assert code == 0
        history = (out / "scf_history.csv").read_text().splitlines()
        assert history[0] == "iteration,energy,orbital_change,epsilon"
        assert len(history) > 1
        plane = (out / "orbital_z0.csv").read_text().splitlines()
        assert plane[0] == "x,y,value"
        assert len(plane) == 1 + 32 * 32
        summary = (out / "summary.txt").read_text()
        assert "virial_ratio" in summary and "converged = True" in summary

    def test_non_convergence_exit_code_keeps_history(self, tmp_path):
        out = tmp_path / "out"
        body = SCF_SMOKE.format(out=out).replace("scf.max_iter = 200", "scf.max_iter = 2")
        cfg = write_config(tmp_path, body)
        assert main(["scf", "--config", str(cfg), "--quiet"]) == 2
        assert (out / "scf_history.csv").exists()

    def test_malformed_config_exit_code(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "system.nuclei = banana\n")
        assert main(["scf", "--config", str(cfg), "--quiet"]) == 1
        assert "system.nuclei" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["scf", "--config", str(tmp_path / "absent.cfg")]) == 1


class TestExtendSweepCommand:
    def test_sweep_monotone_and_flagged(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(
            tmp_path,
            f"""
grid.n = 48
grid.extent = 10.0
poisson.t_values = 1.6, 0.8, 0.4
window.alpha = 0.05
output.dir = {out}
""",
        )
        assert main(["extend-sweep", "--config", str(cfg), "--quiet"]) == 0
        lines = (out / "extension_sweep.csv").read_text().splitlines()
        assert lines[0] == (
            "t,l2_distance,sup_distance,sup_norm,paper_bound_4_over_pi_t,"
            "harmonicity_defect,flag"
        )
        rows = [line.split(",") for line in lines[1:]]
        dists = [float(r[1]) for r in rows]
        assert dists == sorted(dists, reverse=True)  # monotone toward small t
        flags = {float(r[0]): r[6] for r in rows}
        assert flags[1.6] == "" and flags[0.4] == "unresolved"

    def test_empty_height_list_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, "poisson.t_values =\n")
        assert main(["extend-sweep", "--config", str(cfg), "--quiet"]) == 1


class TestResidualsCommand:
    def test_hydrogen_identity_rows(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "residuals", "--config", str(REPO / "configs" / "hydrogen_identity.cfg"),
            "--out", str(out), "--quiet",
        ])
        assert code == 0
        lines = (out / "residuals.csv").read_text().splitlines()
        assert lines[0].startswith("pipeline,term1_l2")
        table = {line.split(",")[0]: line.split(",") for line in lines[1:]}
        assert set(table) == {"strong", "thm4", "thm5", "thm4_vs_strong_crosscheck"}
        assert float(table["thm4"][9]) <= 0.05
        assert float(table["thm5"][9]) <= 0.05

    def test_zero_orbital_rows_vanish(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "residuals", "--config", str(REPO / "configs" / "zero_orbital.cfg"),
            "--out", str(out), "--quiet",
        ])
        assert code == 0
        for line in (out / "residuals.csv").read_text().splitlines()[1:]:
            cells = line.split(",")
            assert all(float(c) == 0.0 for c in cells[1:10])


class TestExpandCommand:
    def test_zero_source_ladder_vanishes(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(
            tmp_path,
            f"""
grid.n = 32
grid.extent = 8.0
system.nuclei = 1.0, 0.0, 0.0, 0.0
residuals.source = zero
residuals.t = 1.2
basis.count = 1
basis.alpha0 = 0.5
output.dir = {out}
""",
        )
        assert main(["expand", "--config", str(cfg), "--quiet"]) == 0
        lines = (out / "expansion_ladder.csv").read_text().splitlines()
        assert lines[0] == "n,fit_error_l2,thm6_sup,thm6_l2,thm7_sup,thm7_l2,K_bound"
        cells = lines[1].split(",")
        assert all(float(c) == 0.0 for c in cells[1:6])

    def test_unit_beta_rejected(self, tmp_path):
        cfg = write_config(tmp_path, "basis.beta = 1.0\n")
        assert main(["expand", "--config", str(cfg), "--quiet"]) == 1


class TestVerifyCommand:
    def test_default_config_passes(self, tmp_path):
        out = tmp_path / "out"
        code = main([
            "verify", "--config", str(REPO / "configs" / "verify.cfg"),
            "--out", str(out), "--quiet",
        ])
        assert code == 0
        lines = (out / "verify_results.csv").read_text().splitlines()
        assert lines[0] == "check,value,bound,status"
        assert all(line.endswith(",pass") for line in lines[1:])

    def test_grid_n_flag_overrides_config(self, tmp_path):
        # a deliberately hopeless grid: failing checks prove the override
        # reached the run (the config's own N=64 passes)
        out = tmp_path / "out"
        code = main([
            "verify", "--config", str(REPO / "configs" / "verify.cfg"),
            "--grid-n", "16", "--out", str(out), "--quiet",
        ])
        assert code == 3
        text = (out / "verify_results.csv").read_text()
        assert ",FAIL" in text

    def test_violated_sup_hook_names_the_check(self, tmp_path, capsys):
        base = (REPO / "configs" / "verify.cfg").read_text()
        cfg = write_config(tmp_path, base + "\nverify.violate_sup = true\n")
        code = main(["verify", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"])
        assert code == 3
        err = capsys.readouterr().err
        assert "thm4b_sup_bound" in err and "precondition" in err


class TestOutputOverrides:
    def test_env_var_honored_when_flag_absent(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, f"output.dir = {tmp_path / 'from_config'}\n")
        monkeypatch.setenv("CONVOLVE_HF_OUT", str(tmp_path / "from_env"))
        assert main(["verify", "--config", str(cfg), "--quiet"]) == 0
        assert (tmp_path / "from_env" / "verify_results.csv").exists()
        assert not (tmp_path / "from_config").exists()

    def test_flag_wins_over_env(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, "grid.n = 64\n")
        monkeypatch.setenv("CONVOLVE_HF_OUT", str(tmp_path / "from_env"))
        out = tmp_path / "from_flag"
        assert main(["verify", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
        assert (out / "verify_results.csv").exists()
        assert not (tmp_path / "from_env").exists()

    def test_console_script_entry_point(self, tmp_path):
        cfg = write_config(tmp_path, "grid.n = 16\ngrid.extent = 2.0\n")
        proc = subprocess.run(
            [sys.executable, "-m", "convolve_hf.cli", "extend-sweep",
             "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
