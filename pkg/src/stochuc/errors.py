"""Exception types shared across the package."""


class StochucError(Exception):
    """Base class for all library errors."""


class DomainError(StochucError):
    """An argument is outside the mathematical domain of an operation."""


class InfeasibleState(StochucError):
    """A generator state admits no feasible action under its spec."""


class InvalidAction(StochucError):
    """An action violates the commitment or production constraints."""


class SizeCapExceeded(StochucError):
    """An exact enumeration would exceed its configured size cap."""


class CapacityShortfall(StochucError):
    """Total generation capacity cannot cover the peak demand."""


class InfeasibleStage(StochucError):
    """No commitment pattern can meet the current demand in a stage problem."""


class InfeasibleDemand(StochucError):
    """No grid action combination meets some reachable demand value."""


class NumericalFailure(StochucError):
    """The LP solver could not produce a feasibility certificate."""


class ParseError(StochucError):
    """A model or solution file is malformed (carries a line number)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
