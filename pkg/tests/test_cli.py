import subprocess
import sys

import pytest

from chargequbit import cli
from chargequbit.cli import EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_OK, EXIT_ORACLE, main
from chargequbit.sweep import CSV_HEADER, OracleCheckEntry, read_csv


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_rates_at_cycle_time(capsys):
    code, out, _ = run(["rates", "--preset", "si-donors", "--dt-ps", "100"], capsys)
    assert code == EXIT_OK
    rows = read_csv(out)
    assert len(rows) == 1
    assert rows[0].d_p == pytest.approx(2.9196076072029474e-3, rel=1e-12)


def test_rates_by_splitting_matches_cycle_time(capsys):
    _, by_dt, _ = run(["rates", "--preset", "gaas-dots", "--dt-ps", "100"], capsys)
    eps_mev = read_csv(by_dt)[0].epsilon / 1.602176634e-22
    _, by_eps, _ = run(["rates", "--preset", "gaas-dots", "--epsilon-meV", repr(eps_mev)], capsys)
    a, b = read_csv(by_dt), read_csv(by_eps)
    assert [r.gamma for r in a] == pytest.approx([r.gamma for r in b], rel=1e-12)


def test_flags_override_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset = si-dots\na_nm = 25\ndt_min_ps = 10\ndt_max_ps = 100\n"
                   "points_per_decade = 2\n")
    out_path = tmp_path / "sweep.csv"
    code, out, _ = run(["sweep", "--config", str(cfg), "--a-nm", "40", "--output",
                        str(out_path)], capsys)
    assert code == EXIT_OK and out == ""
    text = out_path.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    rows = read_csv(text)
    assert len(rows) == 3
    _, base, _ = run(["sweep", "--config", str(cfg)], capsys)
    assert read_csv(base)[0].b2 == pytest.approx(rows[0].b2 * (40 / 25) ** 2)


def test_config_errors_exit_2(tmp_path, capsys):
    code, _, err = run(["sweep", "--preset", "si-dots", "--a-nm", "-1"], capsys)
    assert code == EXIT_CONFIG and "a_nm" in err
    bad = tmp_path / "bad.cfg"
    bad.write_text("preset = si-dots\nbogus = 3\n")
    code, _, err = run(["sweep", "--config", str(bad)], capsys)
    assert code == EXIT_CONFIG and "line 2" in err
    code, _, _ = run(["sweep", "--config", str(tmp_path / "missing.cfg")], capsys)
    assert code == EXIT_CONFIG
    code, _, _ = run(["sweep", "--preset", "si-dots", "--channels", "piezo-gaussian"], capsys)
    assert code == EXIT_CONFIG


def test_crossover_output(capsys):
    code, out, _ = run(["crossover", "--preset", "gaas-dots"], capsys)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "channel,dt_star_s,d_a,d_p,found"
    assert len(lines) == 3 and all(line.endswith("true") for line in lines[1:])


def test_optimize_output(capsys):
    code, out, _ = run(["optimize", "--preset", "si-dots", "--dt-ps", "1000",
                        "--a-min-nm", "10", "--a-max-nm", "60", "--L-min-nm", "30",
                        "--L-max-nm", "200"], capsys)
    assert code == EXIT_OK
    header, row = out.splitlines()
    assert header == "channel,dt_s,a_m,l_m,d"
    assert float(row.split(",")[2]) == pytest.approx(60e-9, rel=1e-6)


def test_oracle_check_exit_codes(capsys):
    code, out, _ = run(["oracle-check", "--preset", "si-donors", "--points-per-decade", "2"],
                       capsys)
    assert code == EXIT_OK
    assert out.splitlines()[0] == "channel,quantity,points,max_rel_dev,tolerance,status"
    code, out, _ = run(["oracle-check", "--preset", "si-donors", "--points-per-decade", "1",
                        "--max-subdivisions", "1"], capsys)
    assert code == EXIT_NONCONVERGENCE
    assert "nonconverged" in out


def test_oracle_check_fail_exit_code(monkeypatch, capsys):
    # no physical configuration inside the judged window misses the budget,
    # so a failing entry is injected to pin the exit-code mapping
    failing = [OracleCheckEntry("deformation-hydrogenic", "b2", 1, 0.5, 0.02, "fail")]
    monkeypatch.setattr(cli, "oracle_check", lambda config, b2_points: failing)
    code, out, _ = run(["oracle-check", "--preset", "si-donors"], capsys)
    assert code == EXIT_ORACLE
    assert out.splitlines()[1].endswith(",fail")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chargequbit.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
