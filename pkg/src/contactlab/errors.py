"""Exception taxonomy.

Two top-level families map onto the CLI exit codes: configuration /
validation problems (exit 2) and mathematics-driven failures such as
non-convergence or focusing collapse (exit 3).
"""


class ContactLabError(Exception):
    """Base class for all package errors."""


class ValidationError(ContactLabError):
    """Invalid input: bad grid parameters, malformed config, unknown keys."""


class GridError(ValidationError):
    """Grid construction or compatibility failure."""


class ResolutionError(ValidationError):
    """A scaled potential support is not resolved by the grid."""


class FormatError(ValidationError):
    """Binary or structured file does not match the declared format."""


class NumericalError(ContactLabError):
    """A well-posed computation failed for numerical/mathematical reasons."""


class NonConvergenceError(NumericalError):
    """Iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, message, achieved_residuals=None):
        super().__init__(message)
        self.achieved_residuals = achieved_residuals


class CollapseError(NumericalError):
    """Focusing collapse detected (unbounded energy drop with shrinking width)."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class BracketError(NumericalError):
    """Root bracket invalid: no sign change, or more than one root inside."""


class InvertibilityError(NumericalError):
    """Operator norm condition violated (e.g. ||Q(z)|| >= 1)."""

    def __init__(self, message, norm=None):
        super().__init__(message)
        self.norm = norm
