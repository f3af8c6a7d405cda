"""Physical constants, unit conversion and the built-in material presets.

Everything inside the package is SI. Conversions happen only at the
boundary (config parsing, CLI flags, CSV output).
"""

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

from ._validation import check_finite, check_positive
from .exceptions import ChannelError, ValidationError


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34  # J s
    e_charge: float = 1.602176634e-19  # C
    eps0: float = 8.8541878128e-12  # F/m

    def __post_init__(self):
        for name in ("hbar", "e_charge", "eps0"):
            check_positive(getattr(self, name), name)


CONSTANTS = PhysicalConstants()
HBAR = CONSTANTS.hbar
E_CHARGE = CONSTANTS.e_charge
EPS0 = CONSTANTS.eps0

_ENERGY_UNITS = {"J": 1.0, "eV": E_CHARGE, "meV": 1e-3 * E_CHARGE}
_LENGTH_TIME_UNITS = {"m": 1.0, "nm": 1e-9, "s": 1.0, "ps": 1e-12, "ns": 1e-9}


def convert_energy(value, unit):
    """Convert an energy given in ``unit`` (J, eV or meV) to joules."""
    value = check_finite(value, "value")
    try:
        return value * _ENERGY_UNITS[unit]
    except KeyError:
        raise ValidationError(f"unknown energy unit {unit!r}", field="unit") from None


def energy_to_unit(value, unit):
    """Inverse of :func:`convert_energy`."""
    value = check_finite(value, "value")
    try:
        return value / _ENERGY_UNITS[unit]
    except KeyError:
        raise ValidationError(f"unknown energy unit {unit!r}", field="unit") from None


def convert_length_time(value, unit):
    """Convert a length (m, nm) or time (s, ps, ns) to SI."""
    value = check_finite(value, "value")
    try:
        return value * _LENGTH_TIME_UNITS[unit]
    except KeyError:
        raise ValidationError(f"unknown length/time unit {unit!r}", field="unit") from None


def length_time_to_unit(value, unit):
    value = check_finite(value, "value")
    try:
        return value / _LENGTH_TIME_UNITS[unit]
    except KeyError:
        raise ValidationError(f"unknown length/time unit {unit!r}", field="unit") from None


def density_from_gcc(value):
    """g/cm^3 -> kg/m^3."""
    return check_finite(value, "rho") * 1000.0


def piezo_modulus(e14, kappa, constants=CONSTANTS):
    """Piezoelectric modulus ``M = e * e14 / (eps0 * kappa)`` in J/m.

    ``e14`` is the piezoelectric constant in C/m^2 and ``kappa`` the static
    dielectric constant.
    """
    e14 = check_positive(e14, "e14")
    kappa = check_positive(kappa, "kappa")
    return constants.e_charge * e14 / (constants.eps0 * kappa)


class Shape(enum.Enum):
    GAUSSIAN = "gaussian"
    HYDROGENIC = "hydrogenic"


class Channel(enum.Enum):
    """Electron-phonon coupling mechanism."""

    DEFORMATION_GAUSSIAN = "deformation-gaussian"
    PIEZO_GAUSSIAN = "piezo-gaussian"
    DEFORMATION_HYDROGENIC = "deformation-hydrogenic"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(c.value for c in cls)
            raise ChannelError(f"unknown channel {value!r}; expected one of {names}",
                               field="channel") from None

    @property
    def is_deformation(self):
        return self is not Channel.PIEZO_GAUSSIAN


@dataclass(frozen=True)
class Material:
    """Substrate constants.

    Attributes
    ----------
    name : str
    xi : float
        Deformation potential [J].
    s : float
        Sound speed [m/s], one isotropic value for all branches.
    rho : float
        Mass density [kg/m^3].
    piezo_m : float or None
        Piezoelectric modulus M [J/m]; None for inversion-symmetric crystals.
    """

    name: str
    xi: float
    s: float
    rho: float
    piezo_m: Optional[float] = None

    def __post_init__(self):
        # xi may be zero for artificial test materials; s and rho may not
        check_finite(self.xi, "xi")
        if self.xi < 0:
            raise ValidationError("xi must be >= 0", field="xi")
        check_positive(self.s, "s")
        check_positive(self.rho, "rho")
        if self.piezo_m is not None:
            check_finite(self.piezo_m, "piezo_m")
            if self.piezo_m < 0:
                raise ValidationError("piezo_m must be >= 0", field="piezo_m")


@dataclass(frozen=True)
class QubitGeometry:
    """Double-dot geometry: dot size ``a`` and center distance ``l`` (both m)."""

    a: float
    l: float
    shape: Shape = Shape.GAUSSIAN

    def __post_init__(self):
        check_positive(self.a, "a")
        check_finite(self.l, "l")
        if self.l < 0:
            raise ValidationError("l must be >= 0", field="l")
        if not isinstance(self.shape, Shape):
            object.__setattr__(self, "shape", Shape(self.shape))


def check_channel(channel, material, geometry):
    """Raise ChannelError unless ``channel`` applies to this material/geometry."""
    channel = Channel.parse(channel)
    if channel is Channel.PIEZO_GAUSSIAN:
        if material.piezo_m is None:
            raise ChannelError(f"material {material.name!r} has no piezo modulus",
                               field="piezo_m")
        if geometry.shape is not Shape.GAUSSIAN:
            raise ChannelError("piezo coupling is only defined for Gaussian dots", field="shape")
    elif channel is Channel.DEFORMATION_GAUSSIAN:
        if geometry.shape is not Shape.GAUSSIAN:
            raise ChannelError("deformation-gaussian needs a Gaussian geometry", field="shape")
    elif geometry.shape is not Shape.HYDROGENIC:
        raise ChannelError("deformation-hydrogenic needs a hydrogenic geometry", field="shape")
    return channel


class Preset(NamedTuple):
    material: Material
    geometry: QubitGeometry
    channels: tuple


# user-facing units, as quoted for each structure
PRESET_PARAMETERS = {
    "gaas-dots": {
        "name": "GaAs", "xi_eV": 7.0, "s_mps": 5.14e3, "rho_gcc": 5.31,
        "e14_cpm2": 0.16, "kappa": 12.8, "a_nm": 25.0, "L_nm": 50.0, "shape": "gaussian",
        "channels": ("deformation-gaussian", "piezo-gaussian"),
    },
    "si-dots": {
        "name": "Si", "xi_eV": 3.3, "s_mps": 9.0e3, "rho_gcc": 2.33,
        "a_nm": 25.0, "L_nm": 50.0, "shape": "gaussian",
        "channels": ("deformation-gaussian",),
    },
    "si-donors": {
        "name": "Si", "xi_eV": 3.3, "s_mps": 9.0e3, "rho_gcc": 2.33,
        "a_nm": 3.0, "L_nm": 50.0, "shape": "hydrogenic",
        "channels": ("deformation-hydrogenic",),
    },
}


def build_material(name, xi_eV, s_mps, rho_gcc, e14_cpm2=None, kappa=None):
    """Material from user-facing units; the piezo modulus needs both e14 and kappa."""
    if (e14_cpm2 is None) != (kappa is None):
        raise ValidationError("e14_cpm2 and kappa must be given together", field="kappa")
    piezo_m = None if e14_cpm2 is None else piezo_modulus(e14_cpm2, kappa)
    return Material(name=name, xi=convert_energy(xi_eV, "eV"), s=check_finite(s_mps, "s"),
                    rho=density_from_gcc(rho_gcc), piezo_m=piezo_m)


def build_geometry(a_nm, L_nm, shape="gaussian"):
    return QubitGeometry(a=convert_length_time(a_nm, "nm"), l=convert_length_time(L_nm, "nm"),
                         shape=Shape(shape))


def _build_preset(params):
    material = build_material(params["name"], params["xi_eV"], params["s_mps"],
                              params["rho_gcc"], params.get("e14_cpm2"), params.get("kappa"))
    geometry = build_geometry(params["a_nm"], params["L_nm"], params["shape"])
    return Preset(material, geometry, tuple(Channel(c) for c in params["channels"]))


PRESETS = {name: _build_preset(p) for name, p in PRESET_PARAMETERS.items()}
GAAS = PRESETS["gaas-dots"].material
SILICON = PRESETS["si-dots"].material


def preset(name):
    """Return the ``(material, geometry, channels)`` preset called ``name``.

    Available names: ``gaas-dots``, ``si-dots``, ``si-donors``.
    """
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}", field="preset"
        ) from None
