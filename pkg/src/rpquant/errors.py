"""Exception hierarchy.

Everything raised on bad data derives from :class:`RpquantError`; the CLI maps
those to exit code 2.
"""


class RpquantError(Exception):
    """Base class for data and validation errors."""


class EmptySet(RpquantError):
    pass


class InvalidParam(RpquantError, ValueError):
    pass


class DimensionMismatch(RpquantError, ValueError):
    pass


class NotAPartition(RpquantError):
    pass


class ZeroVector(RpquantError):
    pass


class NonOrthonormalBasis(RpquantError):
    pass


class NotPSD(RpquantError):
    pass


class NotApplicable(RpquantError):
    pass


class DegenerateCell(RpquantError):
    """No split is possible (all points coincide, or every rule leaves a side empty)."""


class SchemaMismatch(RpquantError):
    pass


class CorruptInput(RpquantError):
    pass


class TooLarge(RpquantError):
    pass


class ParseError(RpquantError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(RpquantError):
    """Formula violates a structural requirement.

    ``kind`` is one of ``DuplicateVariableInClause``, ``WrongClauseSize``,
    ``RareVariable`` or ``VariableOutOfRange``.
    """

    def __init__(self, kind, message, clause=None, variable=None):
        self.kind = kind
        self.clause = clause
        self.variable = variable
        super().__init__(f"{kind}: {message}")


class StructureError(RpquantError):
    pass


class RestrictionViolated(RpquantError):
    pass


class IncompleteAssignment(RpquantError):
    pass


class NotNaeSatisfying(RpquantError):
    pass


class EmptyCluster(RpquantError):
    pass


class NotSymmetric(RpquantError):
    pass


class NonzeroDiagonal(RpquantError):
    pass


class NotEmbeddable(RpquantError):
    pass


class StageError(RpquantError):
    """Wraps an error raised inside one stage of a multi-stage pipeline."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
