"""Exceptions and warnings raised across the package."""


class NtosError(Exception):
    """Base class for all ntoslab errors."""


class InvalidParamsError(NtosError, ValueError):
    pass


class InvalidSizeError(NtosError, ValueError):
    pass


class BoundaryDegenerateError(NtosError, ValueError):
    """Parameters sit exactly on a topological boundary where a sign is undefined."""


class GapClosedError(NtosError, ValueError):
    """The Bloch determinant vanishes on the sampled contour."""


class SingularExpansionError(NtosError, ValueError):
    """Small-E expansion is singular (t1^2 - t2^2 - gamma^2 == 0)."""


class PoleError(NtosError, ZeroDivisionError):
    pass


class DegenerateBetaError(NtosError, ValueError):
    pass


class SolverFailureError(NtosError, RuntimeError):
    pass


class NoRootError(NtosError, RuntimeError):
    """No sign change found inside the search bracket."""


class FormulaDomainError(NtosError, ValueError):
    """A closed-form prediction is undefined for these parameters."""


class InsufficientDataError(NtosError, ValueError):
    pass


class PreconditionError(NtosError, ValueError):
    pass


class DomainWarning(UserWarning):
    """Parameters outside the |t1| > |gamma| domain where g is real."""


class DegenerateBetaWarning(UserWarning):
    pass


class IllConditionedWarning(UserWarning):
    pass
