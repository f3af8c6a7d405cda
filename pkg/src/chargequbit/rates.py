"""Closed-form relaxation rates and dephasing exponents.

Relaxation (NOT gate) is single-phonon emission on the resonant shell
``k = eps / (hbar s)`` at zero temperature; dephasing (phase gate) is
described by the saturated spectral exponent ``B^2``. All inputs are SI.
"""

import enum
import math
from dataclasses import dataclass


from ._validation import check_nonnegative, check_positive
from .exceptions import ChannelError, ValidationError
from .special import exp_integral_e1, piezo_bracket_ratio, stable_sinc_deficit
from .units import HBAR, Channel, check_channel

DEFAULT_REGIME_THRESHOLD = 0.1


class GateKind(enum.Enum):
    NOT = "not"
    PHASE = "phase"


@dataclass(frozen=True)
class GateSpec:
    """A single-qubit gate run at level splitting ``epsilon`` [J].

    The NOT gate uses a pure tunnelling term, the phase gate a pure bias;
    both last one cycle ``dt = pi * hbar / epsilon``.
    """

    kind: GateKind
    epsilon: float

    def __post_init__(self):
        if not isinstance(self.kind, GateKind):
            object.__setattr__(self, "kind", GateKind(str(self.kind).lower()))
        check_positive(self.epsilon, "epsilon")

    @property
    def dt(self):
        return cycle_time(self.epsilon)

    @property
    def tunnel_bias(self):
        """``(eps_A, eps_P)`` split of the splitting for this gate."""
        if self.kind is GateKind.NOT:
            return self.epsilon, 0.0
        return 0.0, self.epsilon


def cycle_time(epsilon):
    """Gate duration ``pi hbar / epsilon`` [s]."""
    return math.pi * HBAR / check_positive(epsilon, "epsilon")


def splitting_from_cycle_time(dt):
    """Inverse of :func:`cycle_time`."""
    return math.pi * HBAR / check_positive(dt, "dt")


@dataclass(frozen=True)
class RegimeReport:
    ak: float
    lk: float
    long_wavelength: bool


def wavevector_from_splitting(epsilon, material):
    """Wavenumber of the emitted phonon, ``k = epsilon / (s hbar)`` [1/m]."""
    epsilon = check_nonnegative(epsilon, "epsilon")
    return epsilon / (material.s * HBAR)


def regime_check(geometry, k, threshold=DEFAULT_REGIME_THRESHOLD):
    """Flag whether ``a k`` and ``L k`` are both below ``threshold``."""
    k = check_nonnegative(k, "k")
    threshold = float(threshold)
    if not threshold > 0:
        raise ValidationError("threshold must be > 0", field="threshold")
    ak = geometry.a * k
    lk = geometry.l * k
    return RegimeReport(ak=ak, lk=lk, long_wavelength=bool(ak < threshold and lk < threshold))


def _deformation_prefactor(material):
    return material.xi**2 / (4 * math.pi * material.rho * material.s**2 * HBAR)


def gamma_deformation_gaussian(material, geometry, epsilon):
    """Relaxation rate [1/s] from deformation coupling in Gaussian dots."""
    check_channel(Channel.DEFORMATION_GAUSSIAN, material, geometry)
    k = wavevector_from_splitting(epsilon, material)
    return float(
        _deformation_prefactor(material)
        * k**3
        * math.exp(-0.5 * (geometry.a * k) ** 2)
        * stable_sinc_deficit(k * geometry.l)
    )


def gamma_piezo_gaussian(material, geometry, epsilon):
    """Relaxation rate [1/s] from piezoelectric coupling in Gaussian dots.

    The bracket is evaluated as ``f(kL)/(kL)^5`` so that the ``1/(L^5 k^4)``
    prefactor never divides by zero.
    """
    check_channel(Channel.PIEZO_GAUSSIAN, material, geometry)
    k = wavevector_from_splitting(epsilon, material)
    m = material.piezo_m
    return float(
        m**2
        * k
        / (20 * math.pi * material.rho * material.s**2 * HBAR)
        * math.exp(-0.5 * (geometry.a * k) ** 2)
        * piezo_bracket_ratio(k * geometry.l)
    )


def gamma_deformation_hydrogenic(material, geometry, epsilon):
    """Relaxation rate [1/s] for a pair of hydrogen-like donor states."""
    check_channel(Channel.DEFORMATION_HYDROGENIC, material, geometry)
    k = wavevector_from_splitting(epsilon, material)
    return float(
        _deformation_prefactor(material)
        * k**3
        / (1 + 0.25 * (geometry.a * k) ** 2) ** 4
        * stable_sinc_deficit(k * geometry.l)
    )


def gamma_asymptotic(channel, material, geometry, epsilon):
    """Long-wavelength power law for the relaxation rate.

    No regime check is done here; see :func:`regime_check`.
    """
    channel = check_channel(channel, material, geometry)
    epsilon = check_nonnegative(epsilon, "epsilon")
    s, rho, l = material.s, material.rho, geometry.l
    if channel.is_deformation:
        return material.xi**2 * l**2 * epsilon**5 / (24 * math.pi * rho * s**7 * HBAR**6)
    return material.piezo_m**2 * l**2 * epsilon**3 / (120 * math.pi * rho * s**5 * HBAR**4)


_GAMMA = {
    Channel.DEFORMATION_GAUSSIAN: gamma_deformation_gaussian,
    Channel.PIEZO_GAUSSIAN: gamma_piezo_gaussian,
    Channel.DEFORMATION_HYDROGENIC: gamma_deformation_hydrogenic,
}


def gamma(channel, material, geometry, epsilon):
    """Dispatch to the closed-form relaxation rate of ``channel``."""
    return _GAMMA[Channel.parse(channel)](material, geometry, epsilon)


def _b2_denominator(material, geometry):
    return math.pi**2 * material.rho * material.s**3 * geometry.a**2 * HBAR


def b2_deformation_gaussian(material, geometry):
    """Saturated dephasing exponent for deformation coupling, Gaussian dots."""
    check_channel(Channel.DEFORMATION_GAUSSIAN, material, geometry)
    return material.xi**2 / (2 * _b2_denominator(material, geometry))


def b2_piezo_gaussian(material, geometry):
    """Saturated dephasing exponent for piezoelectric coupling, Gaussian dots."""
    check_channel(Channel.PIEZO_GAUSSIAN, material, geometry)
    m = material.piezo_m
    a, l = geometry.a, geometry.l
    if l == 0:
        return 0.0
    r2 = (a / l) ** 2
    z = 0.5 * math.pi**2 * r2
    bracket = -math.expm1(-z) + 3 * r2 * exp_integral_e1(z)
    return m**2 * l**2 * bracket / (60 * _b2_denominator(material, geometry))


def b2_deformation_hydrogenic(material, geometry):
    """Saturated dephasing exponent for hydrogen-like donor states."""
    check_channel(Channel.DEFORMATION_HYDROGENIC, material, geometry)
    return material.xi**2 / (3 * _b2_denominator(material, geometry))


_B2 = {
    Channel.DEFORMATION_GAUSSIAN: b2_deformation_gaussian,
    Channel.PIEZO_GAUSSIAN: b2_piezo_gaussian,
    Channel.DEFORMATION_HYDROGENIC: b2_deformation_hydrogenic,
}


def b2(channel, material, geometry):
    """Dispatch to the closed-form dephasing exponent of ``channel``."""
    return _B2[Channel.parse(channel)](material, geometry)


def default_channels(material, geometry):
    """Every channel that applies to this material/geometry pair."""
    out = []
    for channel in Channel:
        try:
            check_channel(channel, material, geometry)
        except ChannelError:
            continue
        out.append(channel)
    return tuple(out)

