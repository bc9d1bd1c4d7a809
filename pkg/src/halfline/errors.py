"""Exception hierarchy.

Every error raised by the library derives from :class:`HalflineError`.  The
two intermediate classes decide the CLI exit code: ``ValidationError`` maps to
exit 2 (bad or inadmissible input), ``SolverError`` to exit 3.
"""


class HalflineError(Exception):
    """Base class for all library errors."""


class ValidationError(HalflineError):
    """Input data violates a precondition or an admissibility class."""


class SolverError(HalflineError):
    """A numerical procedure failed on otherwise well-formed input."""


class DomainRangeError(ValidationError, ValueError):
    """Argument lies outside the sampled domain."""


class ResolutionError(ValidationError):
    """Grid too coarse for the requested oscillatory integral or phase unwrap."""


class DomainError(ValidationError, ValueError):
    """Argument outside the mathematical domain (e.g. growing exponential)."""


class ClassViolationError(ValidationError):
    """Potential or F-function fails a membership/decay test."""


class InconsistentDataError(ValidationError):
    """Scattering data contradict each other (e.g. non-positive norming constant)."""


class DivergenceError(SolverError):
    """Fixed-point iteration did not converge within the iteration budget."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NearZeroJostError(SolverError):
    """Jost function (numerically) vanishes at a real k != 0."""


class DegenerateZeroError(SolverError):
    """Zero of f(i kappa) with vanishing derivative."""


class SynthesisError(SolverError):
    """F-function synthesis produced a significant imaginary part."""


class FitError(SolverError):
    """Exponential-sum fit could not reach the residual threshold."""


class SingularityError(SolverError):
    """Discretized integral operator is singular to working precision."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ThresholdNotFoundError(SolverError):
    """No grid point satisfies the contraction condition."""


class ContractionViolationError(SolverError):
    """Fixed-point update norms grew on consecutive iterations."""


class IterationCapError(SolverError):
    """Iteration safeguard reached before convergence."""
