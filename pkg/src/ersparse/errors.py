"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Model description is malformed (asymmetric matrix, bad probability, ...)."""


class CapacityError(ValueError):
    """Requested object exceeds a configured size limit."""


class DomainError(ValueError):
    """Argument lies outside the domain of a mathematical function."""


class NoSolutionError(DomainError):
    """A defining equation has no admissible root."""

    def __init__(self, message, boundary_value=None):
        super().__init__(message)
        self.boundary_value = boundary_value
