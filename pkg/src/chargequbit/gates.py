"""Density-matrix maps for the NOT and phase gates and the resulting gate errors.

Two bases are in play. The NOT gate is written in the energy basis
``{|+>, |->}`` with ``|+-> = (|0> +- |1>)/sqrt(2)`` (``|+>`` is the ground
state), the phase gate in the position basis ``{|0>, |1>}``. Every
:class:`DensityMatrix2` carries its basis tag and the gate maps refuse a
mismatched input instead of silently converting.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ._validation import check_nonnegative
from .exceptions import BasisError, ValidationError
from .rates import GateKind, b2, cycle_time, gamma
from .units import HBAR, Channel

ENERGY = "energy"
POSITION = "position"
_BASES = (ENERGY, POSITION)

HERMITIAN_TOL = 1e-14
TRACE_TOL = 1e-14
PSD_TOL = 1e-12

_PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
# maps energy-basis components to position-basis components and back
_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _native_basis(kind):
    return ENERGY if GateKind(kind) is GateKind.NOT else POSITION


class DensityMatrix2:
    """A validated single-qubit density matrix with a basis tag."""

    __slots__ = ("_m", "basis")

    def __init__(self, matrix, basis=POSITION):
        if basis not in _BASES:
            raise BasisError(f"basis must be one of {_BASES}, got {basis!r}", field="basis")
        m = np.array(matrix, dtype=complex)
        if m.shape != (2, 2) or not np.all(np.isfinite(m)):
            raise ValidationError("density matrix must be a finite 2x2 array", field="rho")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("density matrix is not Hermitian", field="rho")
        if abs(np.trace(m) - 1.0) > TRACE_TOL:
            raise ValidationError("density matrix trace differs from 1", field="rho")
        if _hermitian_eigvals(m)[0] < -PSD_TOL:
            raise ValidationError("density matrix is not positive semidefinite", field="rho")
        m.setflags(write=False)
        self._m = m
        self.basis = basis

    @property
    def matrix(self):
        return self._m

    @classmethod
    def from_bloch(cls, vector, basis=POSITION):
        r = np.asarray(vector, dtype=float)
        if r.shape != (3,) or np.linalg.norm(r) > 1 + 1e-12:
            raise ValidationError("Bloch vector must be a 3-vector with norm <= 1", field="vector")
        return cls(_bloch_to_matrix(r), basis)

    @classmethod
    def pure(cls, amplitudes, basis=POSITION):
        psi = np.asarray(amplitudes, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), basis)

    def bloch_vector(self):
        return np.real(np.einsum("kij,ji->k", _PAULI, self._m))

    def to_basis(self, basis):
        if basis not in _BASES:
            raise BasisError(f"unknown basis {basis!r}", field="basis")
        if basis == self.basis:
            return self
        m = _HADAMARD @ self._m @ _HADAMARD
        return DensityMatrix2(0.5 * (m + m.conj().T), basis)

    def purity(self):
        return float(np.real(np.trace(self._m @ self._m)))

    def eigenvalues(self):
        return _hermitian_eigvals(self._m)

    def __repr__(self):
        return f"DensityMatrix2({self._m.tolist()!r}, basis={self.basis!r})"


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if math.sqrt(self.x**2 + self.y**2 + self.z**2) > 1 + 1e-12:
            raise ValidationError("Bloch vector norm exceeds 1", field="vector")

    def as_array(self):
        return np.array([self.x, self.y, self.z])


def _bloch_to_matrix(r):
    r = np.asarray(r, dtype=float)
    return 0.5 * (np.eye(2) + np.einsum("...k,kij->...ij", r, _PAULI))


def _hermitian_eigvals(m):
    """Ascending eigenvalues of Hermitian 2x2 matrices from the closed form."""
    a = np.real(m[..., 0, 0])
    d = np.real(m[..., 1, 1])
    b = np.abs(m[..., 0, 1])
    mean = 0.5 * (a + d)
    radius = np.hypot(0.5 * (a - d), b)
    return np.stack([mean - radius, mean + radius], axis=-1)


def _require_basis(rho, kind):
    want = _native_basis(kind)
    if rho.basis != want:
        raise BasisError(f"{GateKind(kind).value} gate acts in the {want} basis, "
                         f"got a {rho.basis}-basis matrix", field="basis")


def _not_map(m, gamma_dt, phase):
    """Vectorised NOT-gate relaxation on (..., 2, 2) energy-basis arrays."""
    decay = np.exp(-gamma_dt)
    out = np.empty_like(m)
    out[..., 1, 1] = m[..., 1, 1] * decay
    out[..., 0, 0] = 1.0 - out[..., 1, 1]
    off = m[..., 0, 1] * np.exp(-0.5 * gamma_dt + 1j * phase)
    out[..., 0, 1] = off
    out[..., 1, 0] = np.conj(off)
    return out


def _phase_map(m, b2_value, phase):
    out = m.copy()
    off = m[..., 0, 1] * np.exp(-b2_value + 1j * phase)
    out[..., 0, 1] = off
    out[..., 1, 0] = np.conj(off)
    return out


def _ideal_map(m, phase):
    out = m.copy()
    out[..., 0, 1] = m[..., 0, 1] * np.exp(1j * phase)
    out[..., 1, 0] = np.conj(out[..., 0, 1])
    return out


def evolve_not(rho0, gamma_rate, epsilon, dt):
    """State after the NOT gate with phonon-emission rate ``gamma_rate``.

    ``rho0`` must be in the energy basis. Populations relax towards the
    ground state ``|+>`` at rate ``gamma_rate`` and the coherence decays at
    half that rate while precessing at ``epsilon / hbar``.
    """
    _require_basis(rho0, GateKind.NOT)
    gamma_rate = check_nonnegative(gamma_rate, "gamma")
    dt = check_nonnegative(dt, "dt")
    phase = check_nonnegative(epsilon, "epsilon") * dt / HBAR
    return DensityMatrix2(_not_map(rho0.matrix, gamma_rate * dt, phase), ENERGY)


def evolve_phase(rho0, b2_value, epsilon, dt):
    """State after the phase gate with dephasing exponent ``b2_value``.

    ``rho0`` must be in the position basis; populations are untouched.
    """
    _require_basis(rho0, GateKind.PHASE)
    b2_value = check_nonnegative(b2_value, "b2")
    dt = check_nonnegative(dt, "dt")
    phase = check_nonnegative(epsilon, "epsilon") * dt / HBAR
    return DensityMatrix2(_phase_map(rho0.matrix, b2_value, phase), POSITION)


def ideal_evolution(rho0, epsilon, dt, gate_kind):
    """Environment-free evolution ``exp(-i H t/hbar) rho0 exp(i H t/hbar)``.

    In each gate's native basis the qubit Hamiltonian is
    ``diag(-epsilon/2, +epsilon/2)``, so only the coherence picks up a phase.
    """
    kind = GateKind(gate_kind)
    _require_basis(rho0, kind)
    dt = check_nonnegative(dt, "dt")
    phase = check_nonnegative(epsilon, "epsilon") * dt / HBAR
    return DensityMatrix2(_ideal_map(rho0.matrix, phase), rho0.basis)


def deviation(rho_actual, rho_ideal):
    """Deviation operator ``rho_actual - rho_ideal`` as a 2x2 array."""
    if rho_actual.basis != rho_ideal.basis:
        raise BasisError("deviation needs both matrices in the same basis", field="basis")
    return rho_actual.matrix - rho_ideal.matrix


def operator_norm(h):
    """Largest absolute eigenvalue of a Hermitian 2x2 operator."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2):
        raise ValidationError("expected a 2x2 operator", field="h")
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > 1e-12 * scale:
        raise ValidationError("operator is not Hermitian", field="h")
    return float(np.max(np.abs(_hermitian_eigvals(h))))


def error_not(gamma_rate, dt):
    """NOT-gate error ``1 - exp(-gamma dt)``."""
    gamma_rate = check_nonnegative(gamma_rate, "gamma")
    dt = check_nonnegative(dt, "dt")
    return -math.expm1(-gamma_rate * dt)


def error_phase(b2_value):
    """Phase-gate error ``(1 - exp(-B^2)) / 2``."""
    return -0.5 * math.expm1(-check_nonnegative(b2_value, "b2"))


def error_max(d_a, d_p):
    return max(float(d_a), float(d_p))


def fibonacci_sphere(n):
    """``n`` nearly uniform unit vectors on the sphere (golden-angle spiral)."""
    n = int(n)
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(1.0 - z * z)
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def deviation_norms(gate_kind, strength, epsilon, dt, bloch_vectors):
    """Deviation norm for many initial states given as Bloch vectors.

    ``strength`` is the relaxation rate for the NOT gate and the dephasing
    exponent for the phase gate. Vectors are interpreted in the gate's
    native basis.
    """
    kind = GateKind(gate_kind)
    m = _bloch_to_matrix(np.atleast_2d(bloch_vectors)).astype(complex)
    phase = epsilon * dt / HBAR
    if kind is GateKind.NOT:
        actual = _not_map(m, strength * dt, phase)
    else:
        actual = _phase_map(m, strength, phase)
    diff = actual - _ideal_map(m, phase)
    return np.max(np.abs(_hermitian_eigvals(diff)), axis=-1)


def _angles_to_vector(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi),
                     math.cos(theta)])


def sup_deviation_oracle(gate_kind, strength, epsilon, dt, grid_density=10_000):
    """Maximise the deviation norm over pure initial states.

    A Fibonacci grid of ``grid_density`` points on the Bloch sphere seeds a
    Nelder-Mead refinement in (theta, phi) around the best grid point. The
    result should reproduce :func:`error_not` / :func:`error_phase`.
    """
    if int(grid_density) < 32:
        raise ValidationError("grid_density must be >= 32", field="grid_density")
    strength = check_nonnegative(strength, "strength")
    epsilon = check_nonnegative(epsilon, "epsilon")
    dt = check_nonnegative(dt, "dt")
    grid = fibonacci_sphere(grid_density)
    norms = deviation_norms(gate_kind, strength, epsilon, dt, grid)
    best = int(np.argmax(norms))
    x, y, z = grid[best]
    start = np.array([math.acos(max(-1.0, min(1.0, z))), math.atan2(y, x)])

    def negative(angles):
        v = _angles_to_vector(*angles)
        return -float(deviation_norms(gate_kind, strength, epsilon, dt, v)[0])

    res = minimize(negative, start, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
    return max(float(norms[best]), -float(res.fun))


@dataclass(frozen=True)
class ErrorReport:
    channel: Channel
    epsilon: float
    dt: float
    gamma: float
    b2: float
    d_a: float
    d_p: float
    d: float

    def __post_init__(self):
        if not (0.0 <= self.d_p <= 0.5 and 0.0 <= self.d_a <= 1.0):
            raise ValidationError("error measures out of range", field="d")


def error_report(channel, material, geometry, epsilon, dt=None):
    """Per-gate errors for one channel at splitting ``epsilon``.

    ``dt`` defaults to the cycle time ``pi hbar / epsilon``.
    """
    channel = Channel.parse(channel)
    if dt is None:
        dt = cycle_time(epsilon)
    g = gamma(channel, material, geometry, epsilon)
    bb = b2(channel, material, geometry)
    d_a = error_not(g, dt)
    d_p = error_phase(bb)
    return ErrorReport(channel=channel, epsilon=epsilon, dt=dt, gamma=g, b2=bb,
                       d_a=d_a, d_p=d_p, d=error_max(d_a, d_p))

