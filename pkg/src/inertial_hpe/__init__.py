"""Inertial hybrid proximal-extragradient methods for monotone inclusions.

Find ``x`` with ``0 in T(x)`` for a maximally monotone ``T`` using a
driver that accepts any certificate oracle, with built-in oracles for the
inertial proximal point, forward-backward and forward-backward-forward
methods.
"""

from .exceptions import (
    ConfigurationError,
    HPEError,
    InfeasibleParametersError,
    NonFiniteIterateError,
    StepViolationError,
    UnsupportedOperatorError,
    UsageError,
)
from .hpe import HPEConfig, Initialization, SolveResult, TraceRecord, Variant, run, validate_config
from .operators import Certificate, Provenance
from .problems import ProblemInstance, gen_composite, gen_quadratic, gen_saddle
from .solver import solve

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "ConfigurationError",
    "HPEConfig",
    "HPEError",
    "InfeasibleParametersError",
    "Initialization",
    "NonFiniteIterateError",
    "ProblemInstance",
    "Provenance",
    "SolveResult",
    "StepViolationError",
    "TraceRecord",
    "UnsupportedOperatorError",
    "UsageError",
    "Variant",
    "gen_composite",
    "gen_quadratic",
    "gen_saddle",
    "run",
    "solve",
    "validate_config",
]
