"""Numerical cross-checks built directly from the electron-phonon couplings.

Nothing here uses the closed-form brackets of :mod:`chargequbit.rates`;
rates come from a golden-rule sphere integral on the resonant shell and
dephasing exponents from the time-dependent mode sum, so agreement between
the two routes is a genuine check.
"""

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import check_nonnegative, check_positive
from .exceptions import NonConvergenceError, ValidationError
from .rates import b2
from .special import stable_sinc_deficit
from .units import HBAR, Channel, check_channel

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes, ascending
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])

_CHUNK = 20_000


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances and budgets for the numerical oracles.

    ``max_subdivisions`` caps the number of panels an adaptive integral may
    use; ``radial_cutoff_factor`` is the fraction of the peak squared form
    factor below which the radial integral is truncated.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-30
    max_subdivisions: int = 4_000_000
    radial_cutoff_factor: float = 1e-18

    def __post_init__(self):
        check_positive(self.rel_tol, "rel_tol")
        check_positive(self.abs_tol, "abs_tol")
        if int(self.max_subdivisions) < 1:
            raise ValidationError("max_subdivisions must be >= 1", field="max_subdivisions")
        if not 0 < self.radial_cutoff_factor < 1:
            raise ValidationError("radial_cutoff_factor must lie in (0, 1)",
                                  field="radial_cutoff_factor")


DEFAULT_SETTINGS = QuadratureSettings()


class QuadResult(NamedTuple):
    value: float
    error: float
    panels: int


def _gk15(f, lo, hi):
    """Kronrod estimate and |K - G| for every panel [lo_i, hi_i]."""
    values = np.empty(lo.size)
    errors = np.empty(lo.size)
    for start in range(0, lo.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        center = 0.5 * (lo[sl] + hi[sl])
        half = 0.5 * (hi[sl] - lo[sl])
        y = np.asarray(f(center[:, None] + half[:, None] * _NODES), dtype=float)
        if not np.all(np.isfinite(y)):
            raise ValidationError("integrand is not finite on the interval", field="f")
        k = half * (y @ _KRONROD)
        g = half * (y @ _GAUSS)
        values[sl] = k
        errors[sl] = np.abs(k - g)
    return values, errors


def integrate_adaptive(f, a, b, settings=DEFAULT_SETTINGS, breakpoints=None):
    """Globally adaptive Gauss-Kronrod (7/15) integration of ``f`` over [a, b].

    ``f`` must accept a numpy array of abscissae of any shape. Panels whose
    error exceeds their width-proportional share of the tolerance are
    bisected until ``sum(errors) <= max(rel_tol*|I|, abs_tol)``. Panel sums
    are accumulated with :func:`math.fsum` in abscissa order, so results
    are reproducible bit for bit.

    Returns ``QuadResult(value, error, panels)``; raises
    :class:`NonConvergenceError` carrying the best estimate when the panel
    budget runs out.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValidationError("integration bounds must be finite; truncate first", field="interval")
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    edges = [a, b]
    if breakpoints is not None:
        inner = np.asarray(breakpoints, dtype=float)
        edges = np.unique(np.concatenate([[a, b], inner[(inner > a) & (inner < b)]]))
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    budget = int(settings.max_subdivisions)
    if lo.size > budget:
        raise NonConvergenceError(
            f"{lo.size} initial panels exceed max_subdivisions={budget}")
    vals, errs = _gk15(f, lo, hi)
    width = b - a
    while True:
        order = np.argsort(lo, kind="stable")
        total = math.fsum(vals[order])
        err = math.fsum(errs[order])
        tol = max(settings.rel_tol * abs(total), settings.abs_tol)
        if err <= tol:
            return QuadResult(sign * total, err, lo.size)
        share = tol * (hi - lo) / width
        split = np.flatnonzero(errs > share)
        room = budget - lo.size
        if room <= 0:
            raise NonConvergenceError(
                f"adaptive quadrature did not converge within {budget} panels "
                f"(estimate {sign * total:.6e}, error {err:.3e})",
                estimate=sign * total, error=err)
        if split.size > room:
            split = split[np.argsort(errs[split], kind="stable")[::-1][:room]]
        mid = 0.5 * (lo[split] + hi[split])
        if np.any((mid <= lo[split]) | (mid >= hi[split])):
            raise NonConvergenceError(
                "adaptive quadrature reached machine resolution",
                estimate=sign * total, error=err)
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_vals, new_errs = _gk15(f, new_lo, new_hi)
        keep = np.ones(lo.size, dtype=bool)
        keep[split] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        vals = np.concatenate([vals[keep], new_vals])
        errs = np.concatenate([errs[keep], new_errs])


def integrate_oscillatory(f, a, b, half_period, settings=DEFAULT_SETTINGS):
    """Adaptive integration with panel edges at every multiple of ``half_period``."""
    half_period = check_positive(half_period, "half_period")
    n = int(math.floor((b - a) / half_period))
    breaks = a + half_period * np.arange(1, n + 1)
    return integrate_adaptive(f, a, b, settings, breakpoints=breaks)


def gaussian_cutoff(a, factor=DEFAULT_SETTINGS.radial_cutoff_factor):
    """Wavenumber where ``exp(-a^2 q^2 / 2)`` has dropped to ``factor``."""
    return math.sqrt(-2.0 * math.log(factor)) / a


def hydrogenic_cutoff(a, factor=DEFAULT_SETTINGS.radial_cutoff_factor):
    """Wavenumber where ``(1 + a^2 q^2 / 4)^-4`` has dropped to ``factor``."""
    return 2.0 * math.sqrt(factor ** -0.25 - 1.0) / a


@functools.lru_cache(maxsize=64)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def _check_unit(e):
    e = np.asarray(e, dtype=float)
    if e.shape != (3,) or not np.all(np.isfinite(e)):
        raise ValidationError("expected a finite 3-vector", field="e")
    if abs(float(np.linalg.norm(e)) - 1.0) > 1e-12:
        raise ValidationError("direction must be a unit vector", field="e")
    return e


def piezo_angular_factor(e):
    """Polarisation-summed squared piezo factor for propagation direction ``e``.

    Equals ``e1^2 e2^2 + e2^2 e3^2 + e3^2 e1^2`` (cubic crystal axes).
    """
    e = _check_unit(e)
    return float(_piezo_factor(e))


def _piezo_factor(e):
    e1, e2, e3 = e[..., 0], e[..., 1], e[..., 2]
    return (e1 * e2) ** 2 + (e2 * e3) ** 2 + (e3 * e1) ** 2


def polarization_triad(e):
    """An orthonormal triad whose first member is ``e`` (longitudinal branch)."""
    e = _check_unit(e)
    helper = np.array([1.0, 0.0, 0.0]) if abs(e[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t1 = np.cross(e, helper)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(e, t1)
    return np.stack([e, t1, t2])


@dataclass(frozen=True)
class CouplingEnvelope:
    """Squared electron-phonon coupling of one channel, summed over branches.

    ``volume`` is the nominal normalisation volume and ``midpoint`` the
    double-dot centre R; neither can change any physical output, and both
    are kept only so that cancellation can be checked. ``l_direction`` is
    the inter-dot axis in crystal coordinates (only the piezo channel cares).
    """

    channel: Channel
    material: object
    geometry: object
    volume: float = 1.0
    midpoint: tuple = (0.0, 0.0, 0.0)
    l_direction: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "channel",
                           check_channel(self.channel, self.material, self.geometry))
        check_positive(self.volume, "volume")
        _check_unit(self.l_direction)

    def form_factor(self, q):
        """Squared confinement form factor (1 at q = 0)."""
        a = self.geometry.a
        q = np.asarray(q, dtype=float)
        if self.channel is Channel.DEFORMATION_HYDROGENIC:
            return (1.0 + 0.25 * (a * q) ** 2) ** -4
        return np.exp(-0.5 * (a * q) ** 2)

    def cutoff(self, settings=DEFAULT_SETTINGS):
        if self.channel is Channel.DEFORMATION_HYDROGENIC:
            return hydrogenic_cutoff(self.geometry.a, settings.radial_cutoff_factor)
        return gaussian_cutoff(self.geometry.a, settings.radial_cutoff_factor)

    def coupling_sq(self, q, e):
        """``sum_lambda |g_{q,lambda}|^2`` [J^2] for wavenumbers ``q`` and unit directions ``e``.

        ``q`` broadcasts against ``e[..., 0]``.
        """
        q = np.asarray(q, dtype=float)
        e = np.asarray(e, dtype=float)
        mat = self.material
        qvec = q[..., None] * e
        phase = np.exp(-1j * (qvec @ np.asarray(self.midpoint, dtype=float)))
        l_vec = self.geometry.l * np.asarray(self.l_direction, dtype=float)
        dipole = np.sin(0.5 * (qvec @ l_vec))
        norm = HBAR / (2.0 * mat.rho * mat.s * self.volume)
        envelope = np.sqrt(self.form_factor(q))
        if self.channel is Channel.PIEZO_GAUSSIAN:
            g = mat.piezo_m * np.sqrt(norm / q) * phase * envelope * dipole
            return np.abs(g) ** 2 * _piezo_factor(e)
        g = 1j * q * mat.xi * np.sqrt(norm / q) * phase * envelope * dipole
        return np.abs(g) ** 2

    def mode_density(self):
        """Number of modes per unit d^3q, ``V / (2 pi)^3``."""
        return self.volume / (2.0 * math.pi) ** 3


def _sphere_grid(n_mu, n_phi):
    mu, w_mu = _leggauss(n_mu)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    sin_t = np.sqrt(1.0 - mu * mu)
    e = np.stack(
        [
            sin_t[:, None] * np.cos(phi)[None, :],
            sin_t[:, None] * np.sin(phi)[None, :],
            np.broadcast_to(mu[:, None], (n_mu, n_phi)),
        ],
        axis=-1,
    )
    w = w_mu[:, None] * np.full(n_phi, 2.0 * math.pi / n_phi)[None, :]
    return e, w


def _sphere_integral(func, start, settings, max_nodes=4096):
    """Integrate ``func(e) -> values`` over the unit sphere.

    Gauss-Legendre in cos(theta) times the periodic trapezoid rule in phi,
    doubling both until consecutive estimates agree to a tenth of the
    requested tolerance.
    """
    n = max(16, int(start))
    previous = None
    while n <= max_nodes:
        e, w = _sphere_grid(n, 2 * n)
        value = float(np.sum(func(e) * w))
        if previous is not None:
            tol = max(0.1 * settings.rel_tol * abs(value), settings.abs_tol)
            if abs(value - previous) <= tol:
                return value
        previous = value
        n *= 2
    raise NonConvergenceError("sphere quadrature did not converge", estimate=previous)


def _polar_integral(func, start, settings, max_nodes=8192):
    """``2 pi * int_{-1}^{1} func(mu) dmu`` by Gauss-Legendre with doubling."""
    n = max(16, int(start))
    previous = None
    while n <= max_nodes:
        mu, w = _leggauss(n)
        value = 2.0 * math.pi * float(np.sum(func(mu) * w))
        if previous is not None:
            tol = max(0.1 * settings.rel_tol * abs(value), settings.abs_tol)
            if abs(value - previous) <= tol:
                return value
        previous = value
        n *= 2
    raise NonConvergenceError("polar quadrature did not converge", estimate=previous)


def shell_angular_integral(envelope, q, settings=DEFAULT_SETTINGS):
    """``int dOmega V sum_lambda |g(q, Omega)|^2`` over the sphere of radius q [J^2 m^3]."""
    lq = envelope.geometry.l * q
    start = 16 + 2 * math.ceil(lq)
    scale = envelope.volume
    if envelope.channel.is_deformation:
        axis = np.asarray(envelope.l_direction, dtype=float)
        # deformation coupling depends only on the angle to the dot axis
        def along_axis(mu):
            e = _rotate_from_z(mu, axis)
            return envelope.coupling_sq(np.full(mu.shape, q), e)
        return scale * _polar_integral(along_axis, start, settings)
    return scale * _sphere_integral(
        lambda e: envelope.coupling_sq(np.full(e.shape[:-1], q), e), start, settings)


def _rotate_from_z(mu, axis):
    """Unit vectors at polar cosine ``mu`` from ``axis`` (azimuth fixed)."""
    perp = np.cross(axis, [1.0, 0.0, 0.0] if abs(axis[0]) < 0.9 else [0.0, 1.0, 0.0])
    perp /= np.linalg.norm(perp)
    sin_t = np.sqrt(np.clip(1.0 - mu * mu, 0.0, None))
    return mu[:, None] * axis[None, :] + sin_t[:, None] * perp[None, :]


def gamma_golden_rule_oracle(channel, material, geometry, epsilon, settings=DEFAULT_SETTINGS,
                             volume=1.0, l_direction=(0.0, 0.0, 1.0)):
    """Zero-temperature emission rate from Fermi's golden rule [1/s].

    ``Gamma = (2 pi / hbar) sum_q |g_q|^2 delta(eps - hbar s q)``; the
    radial delta function puts every phonon on the shell ``q = k`` and the
    remaining angular integral is done numerically.
    """
    epsilon = check_positive(epsilon, "epsilon")
    env = CouplingEnvelope(channel, material, geometry, volume=volume, l_direction=l_direction)
    k = epsilon / (HBAR * material.s)
    angular = shell_angular_integral(env, k, settings) / env.volume
    # the mode density V/(2 pi)^3 cancels the 1/V inside |g|^2
    density = env.mode_density() * k**2 / (HBAR * material.s)
    return (2.0 * math.pi / HBAR) * density * angular


def _frame_about(axis, mu, n_phi):
    """Unit vectors at polar cosine ``mu`` about ``axis`` on an azimuthal ring."""
    helper = [1.0, 0.0, 0.0] if abs(axis[0]) < 0.9 else [0.0, 1.0, 0.0]
    u = np.cross(axis, helper)
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    sin_t = np.sqrt(np.clip(1.0 - mu * mu, 0.0, None))
    ring = np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * v
    return mu[:, None, None] * axis + sin_t[:, None, None] * ring[None, :, :]


def _piezo_radial_angular(env, settings, n_phi=32):
    """Vectorised ``q -> int dOmega V |g|^2`` for the piezo channel.

    The sphere is parametrised about the inter-dot axis, so the dipole
    factor depends on the polar node only and the azimuthal sum of the
    polarisation factor (a trigonometric polynomial of degree 4, integrated
    exactly by the ring) is done once up front.
    """
    axis = np.asarray(env.l_direction, dtype=float)
    mat = env.material
    qmax = env.cutoff(settings)
    x_max = env.geometry.l * qmax

    def build(n):
        mu, w_mu = _leggauss(n)
        e = _frame_about(axis, mu, n_phi)
        ring_weight = (2.0 * math.pi / n_phi) * _piezo_factor(e).sum(axis=1)
        return mu, w_mu * ring_weight

    def evaluate(q, mu, weights):
        q = np.asarray(q, dtype=float)
        strength = HBAR * mat.piezo_m**2 / (2.0 * mat.rho * mat.s * q) * env.form_factor(q)
        dipole = np.sin(0.5 * env.geometry.l * q[..., None] * mu) ** 2
        return strength * (dipole @ weights)

    n = 16 + 2 * math.ceil(x_max)
    mu, weights = build(n)
    # confirm the polar grid against the crystal-frame sphere integral at the cutoff
    reference = shell_angular_integral(env, qmax, settings)
    if abs(float(evaluate(qmax, mu, weights)) - reference) > max(
            settings.rel_tol * abs(reference), settings.abs_tol):
        mu, weights = build(4 * n)
    return lambda q: evaluate(q, mu, weights)


def b2_time_dependent_oracle(channel, material, geometry, t, settings=DEFAULT_SETTINGS,
                             volume=1.0, l_direction=(0.0, 0.0, 1.0)):
    """Dephasing exponent ``B^2(t)`` from the mode sum at finite time.

    ``B^2(t) = (8/hbar^2) sum_q |g_q|^2 / (s q)^2 * sin^2(s q t / 2)`` with
    the radial integral split at every half period ``pi / (s t)`` of the
    time factor.
    """
    t = check_nonnegative(t, "t")
    env = CouplingEnvelope(channel, material, geometry, volume=volume, l_direction=l_direction)
    if t == 0:
        return 0.0
    s = material.s
    mat = material
    qmax = env.cutoff(settings)
    if env.channel.is_deformation:
        l = geometry.l
        # sphere average of sin^2(q.L/2) done in closed form
        def angular(q):
            return (HBAR * q * mat.xi**2 / (2 * mat.rho * s) * env.form_factor(q)
                    * 2.0 * math.pi * stable_sinc_deficit(q * l))
    else:
        angular = _piezo_radial_angular(env, settings)

    prefactor = 8.0 / HBAR**2 / (2.0 * math.pi) ** 3 / s**2

    def integrand(q):
        return np.sin(0.5 * s * q * t) ** 2 * angular(q)

    result = integrate_oscillatory(integrand, 0.0, qmax, math.pi / (s * t), settings)
    return prefactor * result.value


@dataclass(frozen=True)
class DephasingResidual:
    oracle: float
    closed_form: float
    relative: float


def b2_closed_form_residual(channel, material, geometry, t, settings=DEFAULT_SETTINGS):
    """Compare the finite-time oracle with the saturated closed form at time ``t``.

    The closed forms drop a correction of relative size ~(a/L)^2; this
    reports it rather than folding it in.
    """
    oracle = b2_time_dependent_oracle(channel, material, geometry, t, settings)
    closed = b2(channel, material, geometry)
    rel = oracle / closed - 1.0 if closed else float("nan")
    return DephasingResidual(oracle=oracle, closed_form=closed, relative=rel)
