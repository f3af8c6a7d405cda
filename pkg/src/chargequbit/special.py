"""Special functions and cancellation-free brackets used by the rate formulas."""

import math
from fractions import Fraction

import numpy as np

from .exceptions import ValidationError

EULER_GAMMA = 0.57721566490153286061

SINC_DEFICIT_SWITCH = 0.5
PIEZO_BRACKET_SWITCH = 2.0

_E1_SERIES_MAX = 1.0
_EPS = 1e-17
_TINY = 1e-300


def _e1_scalar(z):
    if not z > 0 or math.isnan(z):
        raise ValidationError(f"E1 needs z > 0, got {z!r}", field="z")
    if math.isinf(z):
        return 0.0
    if z <= _E1_SERIES_MAX:
        # -gamma - ln z - sum_k (-z)^k / (k k!)
        total = 0.0
        term = 1.0
        k = 1
        while True:
            term *= -z / k
            contrib = term / k
            total += contrib
            if abs(contrib) < _EPS * abs(total):
                break
            k += 1
        return -EULER_GAMMA - math.log(z) - total
    # modified Lentz evaluation of the continued fraction for E1
    b = z + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-z)


def exp_integral_e1(z):
    """Exponential integral ``E1(z) = int_z^inf exp(-t)/t dt`` for real z > 0.

    Power series for ``z <= 1``, continued fraction above. Accepts a scalar
    or an array; relative accuracy is about 1e-15 across the range.
    """
    if np.ndim(z) == 0:
        return _e1_scalar(float(z))
    arr = np.asarray(z, dtype=float)
    return np.array([_e1_scalar(v) for v in arr.ravel()]).reshape(arr.shape)


# 1 - sin(x)/x = sum_{n>=1} (-1)^(n+1) x^(2n) / (2n+1)!
_SINC_COEFFS = [(-1) ** (n + 1) / math.factorial(2 * n + 1) for n in range(1, 11)]


def _polyval_even(coeffs, x2):
    """sum_i coeffs[i] * x2**i via Horner, lowest order first."""
    acc = np.zeros_like(x2)
    for c in reversed(coeffs):
        acc = acc * x2 + c
    return acc


def stable_sinc_deficit(x):
    """Return ``1 - sin(x)/x`` without cancellation near zero.

    Uses the Taylor series below ``SINC_DEFICIT_SWITCH`` and the direct
    expression above it.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValidationError("x must be >= 0", field="x")
    small = x < SINC_DEFICIT_SWITCH
    xs = np.where(small, x, 0.0)
    xd = np.where(small, 1.0, x)
    series = xs * xs * _polyval_even(_SINC_COEFFS, xs * xs)
    direct = 1.0 - np.sin(xd) / xd
    out = np.where(small, series, direct)
    return out[()] if out.ndim == 0 else out


def _piezo_series_coeffs(max_power):
    # coefficient of x^(2m+1) in x^5 + 10x^3 cos x - 105 x cos x + 105 sin x - 45 x^2 sin x
    coeffs = []
    for m in range(3, (max_power - 1) // 2 + 1):
        c = Fraction(10 * (-1) ** (m - 1), math.factorial(2 * m - 2))
        c -= Fraction(45 * (-1) ** (m - 1), math.factorial(2 * m - 1))
        c += Fraction(-105 * (-1) ** m, math.factorial(2 * m))
        c += Fraction(105 * (-1) ** m, math.factorial(2 * m + 1))
        coeffs.append(c)
    return coeffs


# x^7 through x^41; the x, x^3 and x^5 coefficients vanish identically
PIEZO_SERIES = _piezo_series_coeffs(41)
_PIEZO_FLOAT = [float(c) for c in PIEZO_SERIES]


def piezo_bracket_direct(x):
    """Naive ``x^5 + 5x(2x^2 - 21)cos x + 15(7 - 3x^2)sin x``."""
    x = np.asarray(x, dtype=float)
    return x**5 + 5 * x * (2 * x * x - 21) * np.cos(x) + 15 * (7 - 3 * x * x) * np.sin(x)


def stable_piezo_bracket(x):
    """Piezoelectric angular bracket ``f(x)``, accurate for all x >= 0.

    ``f(x) = x^7/6 - 11 x^9/1512 + ...`` near zero, where the direct form
    loses every digit to cancellation.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValidationError("x must be >= 0", field="x")
    small = x < PIEZO_BRACKET_SWITCH
    xs = np.where(small, x, 0.0)
    series = xs**7 * _polyval_even(_PIEZO_FLOAT, xs * xs)
    out = np.where(small, series, piezo_bracket_direct(np.where(small, 1.0, x)))
    return out[()] if out.ndim == 0 else out


def piezo_bracket_ratio(x):
    """``f(x) / x^5``, finite at x = 0 (where it vanishes like x^2/6)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValidationError("x must be >= 0", field="x")
    small = x < PIEZO_BRACKET_SWITCH
    xs = np.where(small, x, 0.0)
    series = xs * xs * _polyval_even(_PIEZO_FLOAT, xs * xs)
    xd = np.where(small, 1.0, x)
    out = np.where(small, series, piezo_bracket_direct(xd) / xd**5)
    return out[()] if out.ndim == 0 else out
