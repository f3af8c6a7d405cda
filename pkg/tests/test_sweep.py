import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chargequbit.exceptions import ConfigError, ValidationError
from chargequbit.rates import splitting_from_cycle_time
from chargequbit.sweep import (
    CSV_HEADER,
    bisect_crossover,
    config_from_pairs,
    csv_text,
    find_crossover,
    minimize_geometry,
    oracle_check,
    parse_config,
    parse_pairs,
    read_csv,
    rows_at,
    run_sweep,
    write_csv,
)
from chargequbit.units import Channel, Shape

CUSTOM = """
# GaAs-like dots, written out in full
name = custom
xi_eV = 7.0
s_mps = 5140
rho_gcc = 5.31
e14_cpm2 = 0.16
kappa = 12.8
a_nm = 20     # dot radius
L_nm = 80
shape = gaussian
channels = deformation-gaussian, piezo-gaussian
dt_min_ps = 10
dt_max_ps = 1000
points_per_decade = 5
"""


def test_parse_custom_config():
    cfg = parse_config(CUSTOM)
    assert cfg.geometry.a == pytest.approx(20e-9) and cfg.geometry.l == pytest.approx(80e-9)
    assert cfg.channels == (Channel.DEFORMATION_GAUSSIAN, Channel.PIEZO_GAUSSIAN)
    assert cfg.material.piezo_m > 0
    grid = cfg.grid()
    assert len(grid) == 11
    assert grid[0] == pytest.approx(1e-11) and grid[-1] == pytest.approx(1e-9)


def test_preset_defaults_and_override():
    cfg = config_from_pairs({"preset": "si-dots", "a_nm": "10"})
    assert cfg.geometry.a == pytest.approx(10e-9)
    assert cfg.geometry.l == pytest.approx(50e-9)
    assert len(cfg.grid()) == 81
    # switching a GaAs preset to hydrogenic swaps in the channels that apply
    cfg = config_from_pairs({"preset": "gaas-dots", "shape": "hydrogenic"})
    assert cfg.channels == (Channel.DEFORMATION_HYDROGENIC,)
    assert cfg.geometry.shape is Shape.HYDROGENIC


def test_linear_grid_and_single_point():
    cfg = config_from_pairs({"preset": "si-dots", "dt_min_ps": "10", "dt_max_ps": "20",
                             "log_grid": "false", "points_per_decade": "10"})
    assert np.allclose(np.diff(cfg.grid()), np.diff(cfg.grid())[0])
    single = config_from_pairs({"preset": "si-dots", "dt_min_ps": "5", "dt_max_ps": "5"})
    assert single.grid() == pytest.approx([5e-12])


@pytest.mark.parametrize("text,line", [
    ("preset si-dots", 1),
    ("preset = si-dots\nfoo = 1", 2),
    ("preset = si-dots\npreset = gaas-dots", 2),
    ("\n\nxi_eV =", 3),
])
def test_syntax_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        parse_pairs(text)
    assert info.value.line == line


@pytest.mark.parametrize("pairs,key", [
    ({"preset": "si-dots", "a_nm": "-3"}, "a_nm"),
    ({"preset": "si-dots", "s_mps": "0"}, "s_mps"),
    ({"preset": "si-dots", "a_nm": "abc"}, "a_nm"),
    ({"preset": "si-dots", "channels": "piezo-gaussian"}, "channels"),
    ({"preset": "si-dots", "dt_min_ps": "100", "dt_max_ps": "10"}, "dt_min_ps"),
    ({"preset": "si-dots", "log_grid": "maybe"}, "log_grid"),
    ({"preset": "nope"}, "preset"),
    ({"xi_eV": "3.3"}, "s_mps"),
    ({"preset": "si-dots", "shape": "square"}, "shape"),
    ({"preset": "si-dots", "e14_cpm2": "0.1"}, "kappa"),
])
def test_invalid_values_name_the_key(pairs, key):
    with pytest.raises(ConfigError) as info:
        config_from_pairs(pairs)
    assert info.value.field == key


def test_rows_and_combined_channel():
    cfg = config_from_pairs({"preset": "gaas-dots", "combine_channels": "true"})
    rows = rows_at(cfg, 1e-10)
    assert [r.channel for r in rows] == ["deformation-gaussian", "piezo-gaussian", "total"]
    total = rows[-1]
    assert total.gamma == pytest.approx(rows[0].gamma + rows[1].gamma)
    assert total.b2 == pytest.approx(rows[0].b2 + rows[1].b2)
    assert total.d == max(total.d_a, total.d_p)


def test_sweep_rows_sorted_and_consistent():
    cfg = config_from_pairs({"preset": "si-donors", "points_per_decade": "4"})
    rows = run_sweep(cfg)
    dts = [r.dt for r in rows]
    assert dts == sorted(dts)
    for r in rows:
        assert r.epsilon == pytest.approx(splitting_from_cycle_time(r.dt))
        assert r.d == max(r.d_a, r.d_p)


def test_csv_roundtrip_is_exact(tmp_path):
    cfg = config_from_pairs({"preset": "gaas-dots", "points_per_decade": "3"})
    rows = run_sweep(cfg)
    path = tmp_path / "out.csv"
    write_csv(rows, path)
    text = path.read_bytes().decode()
    assert text == csv_text(rows)
    assert "\r" not in text
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    back = read_csv(text)
    for a, b in zip(rows, back):
        assert (a.dt, a.gamma, a.b2, a.d_a, a.d_p, a.regime_ok) == \
            (b.dt, b.gamma, b.b2, b.d_a, b.d_p, b.regime_ok)
        assert b.epsilon == pytest.approx(a.epsilon, rel=1e-15)


def test_csv_to_stream():
    buf = io.StringIO()
    write_csv(run_sweep(config_from_pairs({"preset": "si-dots", "dt_min_ps": "1",
                                            "dt_max_ps": "1"})), buf)
    assert buf.getvalue().count("\n") == 2


def test_bisect_crossover_on_known_curve():
    dt_star = bisect_crossover(lambda dt: 1e-12 / dt, 1e-3, 1e-10, 1e-8)
    assert dt_star == pytest.approx(1e-9, rel=1e-11)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=-11.5, max_value=-8.5), st.floats(min_value=0.5, max_value=3.0))
def test_bisect_crossover_power_laws(log_root, power):
    root = 10.0**log_root
    dt_star = bisect_crossover(lambda dt: (root / dt) ** power, 1.0, 1e-12, 1e-8)
    assert dt_star == pytest.approx(root, rel=1e-11)


def test_bisect_requires_bracket():
    with pytest.raises(ValidationError):
        bisect_crossover(lambda dt: 0.0, 1.0, 1e-12, 1e-8)


def test_find_crossover_on_presets():
    cfg = config_from_pairs({"preset": "gaas-dots"})
    res = find_crossover(cfg, "piezo-gaussian")
    assert res.found
    assert res.d_a == pytest.approx(res.d_p, rel=1e-9)
    assert 1e-12 < res.dt_star < 1e-8
    none = find_crossover(config_from_pairs({"preset": "si-dots", "dt_min_ps": "100"}),
                          "deformation-gaussian")
    assert not none.found and "no crossover" in none.message


def test_minimize_geometry_prefers_large_dots():
    cfg = config_from_pairs({"preset": "si-dots"})
    best = minimize_geometry(cfg, (10e-9, 60e-9), (30e-9, 200e-9), "deformation-gaussian", 1e-9)
    assert best.d <= best.seed_best
    assert best.a == pytest.approx(60e-9, rel=1e-6)
    assert 30e-9 <= best.l <= 200e-9
    fixed = minimize_geometry(cfg, (25e-9, 25e-9), (50e-9, 50e-9), "deformation-gaussian", 1e-9)
    assert (fixed.a, fixed.l) == pytest.approx((25e-9, 50e-9))


def test_minimize_geometry_rejects_bad_bounds():
    cfg = config_from_pairs({"preset": "si-dots"})
    with pytest.raises(ValidationError):
        minimize_geometry(cfg, (60e-9, 10e-9), (30e-9, 200e-9), "deformation-gaussian", 1e-9)


def test_oracle_check_statuses():
    cfg = config_from_pairs({"preset": "gaas-dots", "points_per_decade": "2"})
    entries = oracle_check(cfg, b2_points=2)
    gammas = [e for e in entries if e.quantity == "gamma"]
    assert {e.status for e in gammas} == {"pass"}
    assert all(e.points == len(cfg.grid()) for e in gammas)
    # the preset has L = 2a, outside the judged regime for dephasing
    assert {e.status for e in entries if e.quantity == "b2"} == {"info"}


def test_oracle_check_reports_nonconvergence():
    cfg = config_from_pairs({"preset": "si-donors", "points_per_decade": "1",
                             "max_subdivisions": "1"})
    statuses = {e.status for e in oracle_check(cfg, b2_points=1)}
    assert "nonconverged" in statuses


def test_oracle_check_judges_valid_dephasing():
    cfg = config_from_pairs({"preset": "si-donors", "dt_min_ps": "100", "dt_max_ps": "1000",
                             "points_per_decade": "1"})
    entries = [e for e in oracle_check(cfg, b2_points=2) if e.quantity == "b2"]
    assert [e.status for e in entries] == ["pass"]
    assert math.isfinite(entries[0].max_rel_dev) and entries[0].max_rel_dev < 0.02
