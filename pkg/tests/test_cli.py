import json

import pytest

from optorot.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main


def _cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_point_default(capsys):
    assert main(["point"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["stable"] and out["E_N"] > 0
    assert out["nu_min"] >= 0.5 - 1e-9


def test_point_verify_solvers(capsys):
    assert main(["point", "--verify-solvers"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["solver_deviation"] <= 1e-8


def test_bad_config_exit_code(tmp_path, capsys):
    assert main(["point", "--config", _cfg(tmp_path, "mass = -1\n")]) == EXIT_CONFIG
    assert "mass" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["point", "--config", str(tmp_path / "absent.cfg")]) == EXIT_CONFIG


def test_unstable_point_exit_code(tmp_path, capsys):
    assert main(["point", "--config", _cfg(tmp_path, "P_in = 5\n")]) == EXIT_NUMERIC
    out = json.loads(capsys.readouterr().out)
    assert out["stable"] is False and "E_N" not in out


def test_stability(capsys):
    assert main(["stability"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["routh_hurwitz_pass"] and out["consistent"]
    assert len(out["bistability_roots_phi"]) >= 1


def test_verify(capsys):
    assert main(["verify", "--instances", "20", "--seed", "3"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["pass"]


def test_sweep_from_flags(tmp_path, capsys):
    prefix = tmp_path / "t"
    code = main(["sweep", "--axis", "temperature", "--min", "1", "--max", "100",
                 "--points", "4", "--spacing", "log", "--out", str(prefix)])
    assert code == EXIT_OK
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == 5
    assert (tmp_path / "t.svg").exists() and (tmp_path / "t.json").exists()


def test_sweep_from_config(tmp_path, capsys):
    cfg = _cfg(tmp_path, "T = 10\n[sweep]\naxis = angular_momentum\nmin = 1\nmax = 60\npoints = 6\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "l")]) == EXIT_OK
    assert "switches at angular_momentum" in capsys.readouterr().out


def test_sweep_without_axis(capsys):
    assert main(["sweep"]) == EXIT_CONFIG


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
