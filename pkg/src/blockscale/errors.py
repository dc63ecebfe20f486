"""Exception types shared across the package."""


class BlockscaleError(Exception):
    """Base class for all package errors."""


class StateValidationError(BlockscaleError):
    """A matrix failed a density-matrix invariant (trace, Hermiticity, PSD)."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class OutOfDomainError(StateValidationError):
    """Requested (c1, c2) lies outside the admissible positivity domain."""


class CapacityError(BlockscaleError):
    """Chain too long for the exact-diagonalization backend; use the
    free-fermion backend instead."""


class UnknownFamilyError(BlockscaleError):
    """(case, n_sites) combination not present in the embedded data table."""


class UnsupportedCaseError(BlockscaleError):
    """Operation only defined for a subset of the cases (e.g. Case I
    closed-form analytics)."""
