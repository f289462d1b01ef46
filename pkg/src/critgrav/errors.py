"""Exception hierarchy shared by the library and the CLI.

Each class carries the exit code the CLI uses when it escapes a subcommand.
"""


class CritGravError(Exception):
    exit_code = 1


class ConfigError(CritGravError, ValueError):
    exit_code = 2


class SolverError(CritGravError, ArithmeticError):
    exit_code = 3


class NoRealRoot(SolverError):
    pass


class NonConvergence(SolverError):
    pass


class InvalidRoot(SolverError):
    pass


class MissingPriors(CritGravError):
    exit_code = 4


class InversionError(CritGravError, ArithmeticError):
    exit_code = 5


class BracketInvalid(InversionError):
    pass


class PhysicsViolation(CritGravError, ValueError):
    """A formula was asked to work outside the regime it is valid in."""

    exit_code = 6


class UnstableWorkingPoint(PhysicsViolation):
    pass


class GridExceedsCritical(PhysicsViolation):
    pass


class AssumptionViolation(PhysicsViolation):
    pass


class RegimeViolation(PhysicsViolation):
    pass


class QuadratureNonConvergence(CritGravError, ArithmeticError):
    exit_code = 7


class OutOfRange(CritGravError, ValueError):
    exit_code = 8
