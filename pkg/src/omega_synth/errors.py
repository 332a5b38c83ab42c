#!/usr/bin/env python3
"""
Exception hierarchy for omega_synth.
"""


class OmegaSynthError(Exception):
    """Base exception for all omega_synth errors."""
    pass


class ParseError(OmegaSynthError):
    """
    Exception for malformed HOA, AIGER or PGSolver input.

    The position (1-based line and column) is kept on the exception and
    prefixed to the message when known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" if column is None else f"line {line}, column {column}"
            message = f"{where}: {message}"
        super().__init__(message)


class UnsupportedAcceptanceError(ParseError):
    """Exception for acceptance conditions other than parity, Buchi and co-Buchi."""
    pass


class NondeterminismError(OmegaSynthError):
    """Exception for automata with overlapping guards out of one state."""
    pass


class CapacityError(OmegaSynthError):
    """Exception for instances exceeding an explicit-enumeration cap."""
    pass


class SpecificationError(OmegaSynthError):
    """Exception for semantically invalid specifications or controllers."""
    pass


class CompositionError(SpecificationError):
    """Exception for controllers that cannot be composed with their specification."""
    pass


class UnrealizableError(OmegaSynthError):
    """Raised when a controller is requested for an unrealizable instance."""
    pass


class StrategyError(OmegaSynthError):
    """Exception for strategies that are undefined on a reachable vertex."""
    pass


class SolverError(OmegaSynthError):
    """Exception for internal inconsistencies detected by a solver self-check."""
    pass


class VerificationError(OmegaSynthError):
    """Exception for counterexamples that fail to replay."""
    pass
