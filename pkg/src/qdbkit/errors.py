"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line interface:
2 for invalid input or a failed validation, 3 for an exceeded resource cap
and 4 for a numerical routine that did not converge.
"""

from __future__ import annotations


class QdbError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(QdbError, ValueError):
    """Input or intermediate object failed a structural check."""

    exit_code = 2


class NotHermitian(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class NotFaithful(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotUnital(ValidationError):
    pass


class NotPovm(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class NotAdmissible(ValidationError):
    pass


class NotIrreducible(ValidationError):
    pass


class QDBFailed(ValidationError):
    pass


class SingularCase(ValidationError):
    pass


class BadParameters(ValidationError):
    pass


class UnknownPreset(ValidationError):
    pass


class BadBase(BadParameters):
    """A base POVM is not informationally complete."""


class ThetaNotInvolution(ValidationError):
    pass


class ThetaNotPiInvariant(ValidationError):
    pass


class ResourceCapError(QdbError):
    """A requested computation exceeds a configured size cap."""

    exit_code = 3


class WordCapExceeded(ResourceCapError):
    pass


class ConvergenceError(QdbError, ArithmeticError):
    """An iterative numerical routine failed to converge."""

    exit_code = 4


class NoConvergence(ConvergenceError):
    pass


class PeripheralStructureViolation(ConvergenceError):
    pass


class PhaseExtractionFailed(ConvergenceError):
    pass


class IsometryResidualTooLarge(ConvergenceError):
    """A reversal isometry could not be fitted; usually an upstream convention error."""
