"""scikit-learn style front end: cycle times in, per-gate errors out."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .gates import error_not, error_phase
from .rates import b2, gamma, splitting_from_cycle_time
from .sweep import config_from_pairs
from .units import Channel

_PHYSICAL = ("xi_eV", "s_mps", "rho_gcc", "e14_cpm2", "kappa", "a_nm", "L_nm", "shape")


class GateErrorEstimator(TransformerMixin, BaseEstimator):
    """Map cycle times [s] to phonon-induced gate errors for one coupling channel.

    Parameters
    ----------
    preset : str or None, default="si-dots"
        Starting material/geometry (``gaas-dots``, ``si-dots``, ``si-donors``).
    channel : str or None, default=None
        Coupling channel; defaults to the first channel of the preset.
    xi_eV, s_mps, rho_gcc, e14_cpm2, kappa, a_nm, L_nm, shape : optional
        Overrides in the units of the config file format.
    regime_threshold : float, default=0.1

    Attributes
    ----------
    material_, geometry_, channel_ : resolved physical inputs
    b2_ : float
        Dephasing exponent (independent of cycle time).
    n_features_in_ : int
        Always 1: the single input column is the cycle time.

    Examples
    --------
    >>> est = GateErrorEstimator(preset="si-donors").fit()
    >>> est.predict([[1e-10]])  # doctest: +SKIP
    """

    def __init__(self, preset="si-dots", channel=None, xi_eV=None, s_mps=None, rho_gcc=None,
                 e14_cpm2=None, kappa=None, a_nm=None, L_nm=None, shape=None,
                 regime_threshold=0.1):
        self.preset = preset
        self.channel = channel
        self.xi_eV = xi_eV
        self.s_mps = s_mps
        self.rho_gcc = rho_gcc
        self.e14_cpm2 = e14_cpm2
        self.kappa = kappa
        self.a_nm = a_nm
        self.L_nm = L_nm
        self.shape = shape
        self.regime_threshold = regime_threshold

    def fit(self, X=None, y=None):
        """Resolve the physical inputs. ``X`` and ``y`` are accepted and ignored."""
        pairs = {"regime_threshold": str(self.regime_threshold)}
        if self.preset is not None:
            pairs["preset"] = self.preset
        for key in _PHYSICAL:
            value = getattr(self, key)
            if value is not None:
                pairs[key] = str(value)
        if self.channel is not None:
            pairs["channels"] = Channel.parse(self.channel).value
        config = config_from_pairs(pairs)
        self.material_ = config.material
        self.geometry_ = config.geometry
        self.channel_ = config.channels[0]
        self.b2_ = b2(self.channel_, self.material_, self.geometry_)
        self.n_features_in_ = 1
        return self

    def _cycle_times(self, X):
        X = check_array(X, ensure_2d=False, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[1] != 1:
            raise ValueError(f"expected a single column of cycle times, got {X.shape[1]}")
        if np.any(X <= 0):
            raise ValueError("cycle times must be > 0")
        return X[:, 0]

    def transform(self, X):
        """Columns ``gamma, b2, d_a, d_p, d`` for each cycle time in ``X``."""
        check_is_fitted(self, "b2_")
        dts = self._cycle_times(X)
        d_p = error_phase(self.b2_)
        out = np.empty((dts.size, 5))
        for i, dt in enumerate(dts):
            g = gamma(self.channel_, self.material_, self.geometry_,
                      splitting_from_cycle_time(dt))
            d_a = error_not(g, dt)
            out[i] = (g, self.b2_, d_a, d_p, max(d_a, d_p))
        return out

    def predict(self, X):
        """Per-gate error ``max(D_A, D_P)``."""
        return self.transform(X)[:, 4]

    def get_feature_names_out(self, input_features=None):
        return np.array(["gamma_hz", "b2", "d_a", "d_p", "d"], dtype=object)
