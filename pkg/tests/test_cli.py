import subprocess
import sys
from pathlib import Path

import pytest

from dnls_continuum import cli, harness
from dnls_continuum import kernel as ks

SAMPLE = """\
[kernel]
variant = nearest_neighbor

[experiment]
h_ladder = 0.25, 0.125
box_length = 16
t_final = 0.1
dt = 0.01
sample_interval = 0.05
output_dir = {out}

[datum]
type = gaussian

[test_function.1]
type = sech
"""


@pytest.fixture(autouse=True)
def no_env(monkeypatch):
    monkeypatch.delenv(harness.OUTPUT_ENV, raising=False)


def write_config(tmp_path, out="from_config"):
    p = tmp_path / "exp.ini"
    p.write_text(SAMPLE.format(out=tmp_path / out))
    return p


@pytest.mark.parametrize("token,spec", [("PurePower(0.75)", ks.PurePower(0.75)), ("pure_power:1.5", ks.PurePower(1.5)),
                                        ("NearestNeighbor", ks.NearestNeighbor()), ("Exponential(2)", ks.Exponential(2.0))])
def test_kernel_tokens(token, spec):
    assert cli.parse_kernel_token(token) == spec


@pytest.mark.parametrize("token", ["PurePower", "Gauss(1)", "PurePower(-1)", "NearestNeighbor(2)"])
def test_bad_kernel_tokens(token):
    with pytest.raises(Exception):
        cli.parse_kernel_token(token)


def test_limit_writes_to_config_dir(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert cli.main(["limit", "--config", str(cfg)]) == 0
    out = tmp_path / "from_config"
    assert (out / "limit_rows.csv").exists() and (out / "limit_summary.txt").exists()
    assert "fitted slope l2_error" in capsys.readouterr().out


def test_env_overrides_config_and_out_overrides_env(tmp_path, monkeypatch):
    cfg = write_config(tmp_path)
    monkeypatch.setenv(harness.OUTPUT_ENV, str(tmp_path / "from_env"))
    assert cli.main(["limit", "--config", str(cfg)]) == 0
    assert (tmp_path / "from_env" / "limit_rows.csv").exists()
    assert cli.main(["limit", "--config", str(cfg), "--out", str(tmp_path / "from_cli")]) == 0
    assert (tmp_path / "from_cli" / "limit_rows.csv").exists()
    assert not (tmp_path / "from_config").exists()


def test_limit_errors(tmp_path, capsys):
    assert cli.main(["limit", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.ini"
    bad.write_text(SAMPLE.format(out=tmp_path).replace("box_length = 16", "box_length = 15"))
    assert cli.main(["limit", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "bad.ini:5" in err and "0.25, 0.125" in err
    assert cli.main(["limit", "--config", str(tmp_path / "missing.ini")]) == 2
    wide = tmp_path / "wide.ini"
    wide.write_text(SAMPLE.format(out=tmp_path).replace("type = gaussian", "type = sech"))
    assert cli.main(["limit", "--config", str(wide)]) == 2
    assert "not resolved" in capsys.readouterr().err


def test_check_empty_suite(tmp_path):
    assert cli.main(["check", "--no-kernels", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "checks.csv").read_text().startswith("kernel,check,verdict")


def test_check_failure_exit_code(tmp_path, monkeypatch):
    from dnls_continuum.verification import CheckReport

    monkeypatch.setattr(harness, "kernel_checks", lambda spec, seed=0: [CheckReport("fake", [], [], "fail", 0.0, "K", "")])
    monkeypatch.setattr(harness, "lattice_checks", lambda seed=0: [])
    assert cli.main(["check", "--kernel", "NearestNeighbor", "--out", str(tmp_path)]) == 1


def test_symbol(tmp_path, capsys):
    assert cli.main(["symbol", "--kernel", "PurePower(0.75)", "--kernel", "NearestNeighbor", "--j-max", "3", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "symbol.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 3
    assert sum(line.startswith("kernel,") for line in lines) == 1


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "dnls_continuum", "symbol", "--kernel", "NearestNeighbor", "--j-max", "2", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "NearestNeighbor,Super1" in res.stdout


def test_help_lists_subcommands():
    text = cli.build_parser().format_help()
    assert all(cmd in text for cmd in ("limit", "check", "symbol"))
