"""Exception hierarchy shared by the analytic library, the simulator and the CLI."""


class SgMimoError(Exception):
    """Base class for every error raised by the cellular package."""


class InvalidParameterError(SgMimoError, ValueError):
    """A numeric argument lies outside the domain of the function."""


class InvariantViolationError(SgMimoError, ValueError):
    """A MIMO scheme or model object breaks one of its structural invariants."""


class UnsupportedKernelError(SgMimoError):
    """jet_lift was asked for a kernel with no registered derivative recurrence."""


class NonFiniteIntegrandError(SgMimoError, ArithmeticError):
    """The integrand returned inf/nan inside the integration domain."""


class ConfigurationTooLargeError(SgMimoError):
    """Exhaustive joint-ML detection would enumerate too many hypotheses."""


class UnrealizableSchemeError(SgMimoError):
    """(m_o, m_i) cannot be produced by the requested scheme."""


class InfeasibleDesignError(SgMimoError):
    """No diversity order within the search bound meets the constraint."""


class ConfigError(SgMimoError):
    """Scenario file could not be parsed or failed validation."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
