"""Exception hierarchy shared by all citsolve modules."""


class CitsolveError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(CitsolveError):
    """A caller violated an operation's contract (bad scope, mixed universes, ...)."""


class ParseError(UsageError):
    """Syntax error in a program file; carries line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class InconsistentPairError(UsageError):
    """An operator that requires a non-empty interval got lower > upper."""


class InvalidPartitionError(UsageError):
    """A user-supplied partition or tree failed validation."""


class ResourceCutoffError(CitsolveError):
    """An exhaustive search would exceed its configured cutoff."""


class NonMonotoneOperatorError(CitsolveError):
    """Fixpoint iteration did not converge within the bound implied by
    monotonicity; the operator handed in was not monotone."""


class PivotMismatchError(CitsolveError):
    """Leaf results disagreed on shared pivot atoms during recombination.

    This indicates a broken independence certificate and is an internal
    error, not a user mistake."""
