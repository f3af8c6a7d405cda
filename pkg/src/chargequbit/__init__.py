"""Phonon-induced decoherence and gate errors of double-dot charge qubits."""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    BasisError,
    ChannelError,
    ChargeQubitError,
    ConfigError,
    NonConvergenceError,
    ValidationError,
)
from .gates import (  # noqa: E402
    DensityMatrix2,
    ErrorReport,
    deviation,
    error_max,
    error_not,
    error_phase,
    error_report,
    evolve_not,
    evolve_phase,
    ideal_evolution,
    operator_norm,
    sup_deviation_oracle,
)
from .quadrature import (  # noqa: E402
    QuadratureSettings,
    b2_time_dependent_oracle,
    gamma_golden_rule_oracle,
    integrate_adaptive,
)
from .rates import GateKind, GateSpec, b2, gamma, gamma_asymptotic, regime_check  # noqa: E402
from .special import exp_integral_e1  # noqa: E402
from .units import Channel, Material, QubitGeometry, Shape, preset  # noqa: E402

__all__ = [
    "BasisError", "ChannelError", "ChargeQubitError", "ConfigError", "NonConvergenceError",
    "ValidationError",
    "DensityMatrix2", "ErrorReport", "deviation", "error_max", "error_not", "error_phase",
    "error_report", "evolve_not", "evolve_phase", "ideal_evolution", "operator_norm",
    "sup_deviation_oracle",
    "QuadratureSettings", "b2_time_dependent_oracle", "gamma_golden_rule_oracle",
    "integrate_adaptive",
    "GateKind", "GateSpec", "b2", "gamma", "gamma_asymptotic", "regime_check",
    "exp_integral_e1",
    "Channel", "Material", "QubitGeometry", "Shape", "preset",
]
