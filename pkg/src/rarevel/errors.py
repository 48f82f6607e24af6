"""Exception hierarchy shared by the grid generator, equilibrium and solver."""


class RarevelError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(RarevelError, ValueError):
    """Shapes, lengths or topology of the inputs are inconsistent."""


class DomainError(RarevelError, ValueError):
    """A physical state lies outside the domain of the operation."""


class ValidationError(DomainError):
    """Input data violates an invariant (negative density, temperature, ...)."""


class ParseError(RarevelError, ValueError):
    """Malformed text input; ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class RefinementOverflowError(RarevelError):
    """AMR refinement exceeded the configured depth cap."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class GridInadequacyError(RarevelError):
    """The velocity grid cannot represent the requested state or flux."""


class NonConvergenceError(RarevelError):
    """An iterative method stopped before reaching its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class LinearSolverError(RarevelError):
    """A tridiagonal pivot vanished during a line sweep."""


class DivergenceError(RarevelError):
    """NaN or Inf appeared in the solution."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration
