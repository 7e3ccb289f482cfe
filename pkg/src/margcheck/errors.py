"""Exception types shared across the package."""


class MargcheckError(Exception):
    """Base class for all package-specific errors."""


class InputError(MargcheckError):
    """Malformed or out-of-contract input (bad table, bad matrix, bad subset)."""


class ResourceError(MargcheckError):
    """Problem size exceeds a configured cap."""


class NumericError(MargcheckError):
    """A numerical routine failed to reach its required accuracy."""


class EquimarginalityError(InputError):
    """Stored marginals disagree on a shared sub-marginal.

    ``witness`` is a tuple ``(subset_a, subset_b, common, restriction, value_a,
    value_b)`` identifying one disagreeing entry.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class IncompatibleFamilyError(MargcheckError):
    """An operation that needs a compatible family was given an incompatible one.

    ``witness`` is the violation witness of the failed necessary condition.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
