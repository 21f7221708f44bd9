"""Exception types shared across the toolkit, mapped to CLI exit codes."""


class UrllcMcError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ParseError(UrllcMcError):
    """Malformed configuration document (bad syntax, wrong top-level shape)."""

    exit_code = 2


class ValidationError(UrllcMcError):
    """Well-formed input that violates a field constraint."""

    exit_code = 3


class SolverError(UrllcMcError):
    """Root solve failed: target not bracketed, non-monotone forward map,
    or no convergence within the iteration budget."""

    exit_code = 4


class DomainError(UrllcMcError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 5
