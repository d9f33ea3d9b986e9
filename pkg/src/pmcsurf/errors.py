"""Exception hierarchy.

``DomainError`` marks inputs outside an operation's admissible set (CLI exit
code 1); ``NumericalFailure`` marks a well-posed request the numerics could
not complete (exit code 2).
"""


class PMCError(Exception):
    """Base class for all library errors."""


class DomainError(PMCError, ValueError):
    """Input outside the admissible set of an operation."""


class NumericalFailure(PMCError, RuntimeError):
    """Iteration, integration or quadrature failed to converge."""


class DegenerateGraphError(DomainError):
    """The normal graph stops being an immersion (area factor not positive)."""


class SolvabilityError(DomainError):
    """Right-hand side has a component along the kernel of the Jacobi operator."""

    def __init__(self, message, components=None):
        super().__init__(message)
        self.components = dict(components or {})


class ObstructionError(DomainError):
    """Nondegenerate solve refused at a degenerate half-length."""

    def __init__(self, message, obstruction=None):
        super().__init__(message)
        self.obstruction = obstruction


class FieldError(DomainError):
    """Bad curvature-field expression or violated field hypothesis."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position
