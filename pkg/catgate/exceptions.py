"""Error hierarchy shared by every catgate module.

Configuration problems and numerical failures are kept apart so the CLI can
report them with distinct exit codes.
"""

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class CatGateError(Exception):
    """Base class for all catgate errors."""

    exit_code: int = EXIT_UNEXPECTED


class ConfigError(CatGateError, ValueError):
    """Invalid parameters, unknown names or unreadable input files."""

    exit_code = EXIT_CONFIG


class NumericalError(CatGateError, ArithmeticError):
    """A computation produced an unusable result."""

    exit_code = EXIT_NUMERICAL


class TruncationError(NumericalError):
    """The Fock cutoff is too small for the requested state."""


class PhysicalityError(NumericalError):
    """A density operator violates Hermiticity, trace or positivity."""


class ZeroNormError(NumericalError):
    """A superposition or operator image has vanishing norm."""


class AnnihilatedInputError(NumericalError):
    """Photon subtraction annihilated the input (zero heralding weight)."""


class ConvergenceError(NumericalError):
    """An optimizer or iterative reconstruction did not converge."""


class FlatObjectiveError(NumericalError):
    """The objective does not discriminate between parameter values."""


class StageError(CatGateError):
    """A pipeline stage failed; wraps the original error."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", EXIT_UNEXPECTED)
        super().__init__(f"stage '{stage}' failed: {cause}")
