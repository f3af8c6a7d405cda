import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from chargequbit.exceptions import NonConvergenceError, ValidationError
from chargequbit.quadrature import (
    CouplingEnvelope,
    QuadratureSettings,
    b2_closed_form_residual,
    b2_time_dependent_oracle,
    gamma_golden_rule_oracle,
    gaussian_cutoff,
    hydrogenic_cutoff,
    integrate_adaptive,
    integrate_oscillatory,
    piezo_angular_factor,
    polarization_triad,
)
from chargequbit.rates import gamma, splitting_from_cycle_time
from chargequbit.units import Channel, QubitGeometry, preset

GAAS = preset("gaas-dots")
SI = preset("si-dots")
DONORS = preset("si-donors")


@pytest.mark.parametrize("f,a,b", [
    (np.exp, 0.0, 3.0),
    (lambda x: 1.0 / (1.0 + x * x), -50.0, 50.0),
    (lambda x: np.sqrt(x), 0.0, 1.0),
    (lambda x: np.exp(-x * x) * np.cos(3 * x), -6.0, 6.0),
])
def test_adaptive_matches_scipy(f, a, b):
    ref, _ = integrate.quad(lambda x: float(f(np.array(x))), a, b, epsabs=0, epsrel=1e-12,
                            limit=500)
    res = integrate_adaptive(f, a, b, QuadratureSettings(rel_tol=1e-12))
    assert res.value == pytest.approx(ref, rel=1e-11)
    assert res.error <= 1e-12 * abs(res.value)


def test_adaptive_endpoint_singularity():
    lo = 1e-12
    exact = -1.0 - (lo * math.log(lo) - lo)
    res = integrate_adaptive(np.log, lo, 1.0, QuadratureSettings(rel_tol=1e-12))
    assert res.value == pytest.approx(exact, rel=1e-11)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=8), st.floats(-3, 0), st.floats(0.1, 3))
def test_polynomials_exact(coeffs, a, width):
    poly = np.polynomial.Polynomial(coeffs)
    exact = poly.integ()(a + width) - poly.integ()(a)
    res = integrate_adaptive(poly, a, a + width)
    assert res.value == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_reversed_and_empty_interval():
    assert integrate_adaptive(np.cos, 1.0, 1.0).value == 0.0
    assert integrate_adaptive(np.cos, 1.0, 0.0).value == pytest.approx(-math.sin(1.0))


def test_infinite_bounds_rejected():
    with pytest.raises(ValidationError):
        integrate_adaptive(np.exp, 0.0, math.inf)


def test_budget_exhaustion_reports_estimate():
    tight = QuadratureSettings(rel_tol=1e-14, max_subdivisions=3)
    with pytest.raises(NonConvergenceError) as info:
        integrate_adaptive(lambda x: np.sin(1.0 / (x + 1e-3)), 0.0, 1.0, tight)
    assert info.value.estimate is not None


def test_oscillatory_breakpoints():
    t = 200.0
    res = integrate_oscillatory(lambda q: np.sin(0.5 * t * q) ** 2 * np.exp(-q), 0.0, 40.0,
                                math.pi / t)
    exact = 0.5 * (1 - math.exp(-40)) - 0.5 * (1 / (1 + t * t))
    assert res.value == pytest.approx(exact, rel=1e-9)
    assert res.panels >= int(40.0 * t / math.pi)


def test_cutoffs():
    a = 7e-9
    assert math.exp(-0.5 * (a * gaussian_cutoff(a)) ** 2) == pytest.approx(1e-18)
    assert (1 + 0.25 * (a * hydrogenic_cutoff(a)) ** 2) ** -4 == pytest.approx(1e-18)


def test_piezo_angular_factor():
    assert piezo_angular_factor([0, 0, 1]) == 0.0
    assert piezo_angular_factor(np.ones(3) / math.sqrt(3)) == pytest.approx(1 / 3)
    with pytest.raises(ValidationError):
        piezo_angular_factor([1, 1, 0])


def test_polarization_triad_orthonormal():
    triad = polarization_triad(np.array([0.48, 0.6, 0.64]))
    assert triad @ triad.T == pytest.approx(np.eye(3), abs=1e-14)


def test_coupling_independent_of_volume_and_midpoint():
    q = np.array([1e8, 3e8])
    e = np.array([[0.6, 0.0, 0.8], [0.0, 0.6, 0.8]])
    base = CouplingEnvelope(Channel.PIEZO_GAUSSIAN, GAAS.material, GAAS.geometry)
    moved = CouplingEnvelope(Channel.PIEZO_GAUSSIAN, GAAS.material, GAAS.geometry,
                             volume=1e-12, midpoint=(3e-8, -1e-8, 5e-9))
    assert moved.coupling_sq(q, e) * moved.volume == pytest.approx(
        base.coupling_sq(q, e) * base.volume, rel=1e-13)
    eps = splitting_from_cycle_time(50e-12)
    assert gamma_golden_rule_oracle("piezo-gaussian", GAAS.material, GAAS.geometry, eps,
                                    volume=1e-15) == pytest.approx(
        gamma_golden_rule_oracle("piezo-gaussian", GAAS.material, GAAS.geometry, eps),
        rel=1e-12)


@pytest.mark.parametrize("direction", [(1, 0, 0), (0.6, 0.8, 0.0),
                                       (1 / math.sqrt(3),) * 3])
def test_deformation_isotropic(direction):
    eps = splitting_from_cycle_time(30e-12)
    ch = Channel.DEFORMATION_GAUSSIAN
    ref = gamma(ch, GAAS.material, GAAS.geometry, eps)
    val = gamma_golden_rule_oracle(ch, GAAS.material, GAAS.geometry, eps, l_direction=direction)
    assert val == pytest.approx(ref, rel=1e-12)


def test_piezo_depends_on_crystal_direction():
    eps = splitting_from_cycle_time(30e-12)
    along_001 = gamma_golden_rule_oracle("piezo-gaussian", GAAS.material, GAAS.geometry, eps)
    along_111 = gamma_golden_rule_oracle("piezo-gaussian", GAAS.material, GAAS.geometry, eps,
                                         l_direction=(1 / math.sqrt(3),) * 3)
    assert along_001 == pytest.approx(gamma("piezo-gaussian", GAAS.material, GAAS.geometry, eps),
                                      rel=1e-10)
    assert abs(along_111 / along_001 - 1) > 1e-3


def test_b2_oracle_frozen():
    # finite-time mode sums evaluated with mpmath (20 digits), independently
    donors = b2_time_dependent_oracle(Channel.DEFORMATION_HYDROGENIC, DONORS.material,
                                      QubitGeometry(3e-9, 60e-9, "hydrogenic"), 100e-12)
    assert donors == pytest.approx(5.8342564678852213e-3, rel=1e-9)
    dots = b2_time_dependent_oracle(Channel.DEFORMATION_GAUSSIAN, SI.material,
                                    QubitGeometry(5e-9, 100e-9), 100e-12)
    assert dots == pytest.approx(3.154491066774700575e-3, rel=1e-9)


def test_b2_oracle_zero_time_and_growth():
    ch = Channel.DEFORMATION_HYDROGENIC
    assert b2_time_dependent_oracle(ch, DONORS.material, DONORS.geometry, 0.0) == 0.0
    early = b2_time_dependent_oracle(ch, DONORS.material, DONORS.geometry, 1e-13)
    late = b2_time_dependent_oracle(ch, DONORS.material, DONORS.geometry, 1e-10)
    assert 0 < early < late


def test_piezo_residual_is_about_ten_percent_at_preset():
    res = b2_closed_form_residual(Channel.PIEZO_GAUSSIAN, GAAS.material, GAAS.geometry, 1e-9)
    # mpmath evaluation of the long-time integral gives a ratio of 0.9003
    assert res.relative == pytest.approx(-0.0997, abs=2e-3)


def test_oracle_nonconvergence_propagates():
    tiny = QuadratureSettings(max_subdivisions=1)
    with pytest.raises(NonConvergenceError):
        b2_time_dependent_oracle(Channel.DEFORMATION_HYDROGENIC, DONORS.material,
                                 DONORS.geometry, 1e-10, tiny)
