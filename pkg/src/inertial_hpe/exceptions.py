"""Exception hierarchy shared across the package."""


class HPEError(Exception):
    """Base class for all errors raised by :mod:`inertial_hpe`."""


class UsageError(HPEError, ValueError):
    """An operation was called with arguments outside its contract."""


class UnsupportedOperatorError(HPEError):
    """The requested operation is not available for this operator kind."""


class ConfigurationError(HPEError, ValueError):
    """Algorithm parameters violate a step-size or feasibility bound."""


class InfeasibleParametersError(ConfigurationError):
    """No admissible parameter choice exists for the requested setting."""


class StepViolationError(HPEError):
    """An oracle returned a certificate failing the relative-error test."""

    def __init__(self, k, slack, rhs):
        self.k = k
        self.slack = slack
        self.rhs = rhs
        super().__init__(
            f"relative-error inequality violated at k={k}: "
            f"slack={slack:.6e} (rhs={rhs:.6e})"
        )


class NonFiniteIterateError(HPEError):
    """An iterate contained NaN or Inf."""

    def __init__(self, k):
        self.k = k
        super().__init__(f"non-finite iterate at k={k}")
