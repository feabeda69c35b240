"""PRCM exception types."""


class PRCMException(Exception):
    """Base exception for all PRCM errors."""
    pass


class InvalidCellError(PRCMException, ValueError):
    """Cell, box or lattice text is malformed."""
    pass


class InvalidDimensionError(PRCMException, ValueError):
    """Requested cell dimension is outside the ambient range."""
    pass


class InvalidModulusError(PRCMException, ValueError):
    """Coefficient modulus q must be a positive integer."""
    pass


class InvalidContextError(PRCMException, ValueError):
    """The (d, i, q, p, box, boundary) combination is not admissible."""
    pass


class InvalidComplexError(PRCMException, ValueError):
    """A chain or complex is missing faces or is otherwise inconsistent."""
    pass


class NotACycleError(InvalidComplexError):
    """Chain has a nonzero boundary."""
    pass


class EnumerationLimitError(PRCMException):
    """Exact enumeration refused: too many plaquettes (or states)."""

    def __init__(self, count: int, cap: int, what: str = "plaquettes"):
        self.count = count
        self.cap = cap
        super().__init__(f"Context has {count} {what}, above the enumeration cap of {cap}")


class EmptySolutionSetError(PRCMException):
    """The linear system has no solution modulo q."""
    pass


class StabilizationError(PRCMException):
    """Truncated boundary condition did not stabilize below the radius cap."""
    pass


class VerificationError(PRCMException):
    """An exact identity failed; carries the report with its witness."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"{report.check} failed: witness={report.witness}")


class ConfigError(PRCMException):
    """Experiment configuration is invalid or unreadable."""
    pass
