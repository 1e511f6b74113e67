"""Exception hierarchy. Each error carries the CLI exit code it maps to."""


class RankCorrError(Exception):
    exit_code = 1


class InputParseError(RankCorrError, ValueError):
    exit_code = 2


class LengthMismatch(RankCorrError, ValueError):
    exit_code = 2


class TiesPresent(RankCorrError, ValueError):
    """Raised when tied values are found and the tie policy is ``"reject"``."""

    exit_code = 3


class DegenerateSample(RankCorrError, ValueError):
    exit_code = 3


class ParameterOutOfRange(RankCorrError, ValueError):
    exit_code = 4


class MismatchedConfig(RankCorrError, ValueError):
    exit_code = 4


class NonFiniteIntegrand(RankCorrError, FloatingPointError):
    exit_code = 5


class QuadratureNotConverged(RankCorrError, ArithmeticError):
    exit_code = 5
