"""Exception hierarchy shared across the package."""


class SecurePairError(Exception):
    """Base class for all library errors."""


class FieldTooSmallError(SecurePairError):
    """The chosen prime field cannot support the requested construction."""


class SingularMatrixError(SecurePairError):
    """A matrix expected to be invertible (or a system expected to be
    uniquely solvable) is not."""


class ConstructionError(SecurePairError):
    """Randomized code construction failed after the retry budget."""


class RepairError(SecurePairError):
    """Repair could not produce a valid system."""


class InfeasiblePatternError(SecurePairError):
    """The erasure pattern admits no feasible repair."""


class SearchSpaceError(SecurePairError):
    """A brute-force enumeration guard was exceeded."""


class BoundOverflowError(SecurePairError):
    """A field-size bound exceeded the configured integer limit."""

    def __init__(self, message, bound):
        super().__init__(message)
        self.bound = bound


class SearchExhaustedError(SecurePairError):
    """Randomized search (e.g. for a precoder) used up its retry budget."""


class SchemaError(SecurePairError):
    """A JSON artifact does not match its expected schema."""
