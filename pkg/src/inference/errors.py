"""Exception hierarchy shared by every numerical component."""

from __future__ import annotations

from collections.abc import Sequence


class NumericalError(Exception):
    """Base exception for numerical failures (CLI exit code 2)."""


class EvaluationError(NumericalError):
    """A log-likelihood evaluation produced a non-finite value."""

    def __init__(self, point: Sequence[float], value: float | None = None) -> None:
        self.point = tuple(float(x) for x in point)
        self.value = value
        super().__init__(f"Non-finite log-likelihood {value!r} at theta={self.point}")


class InconsistentMaximizersError(NumericalError):
    """The full-model maximum lies below the restricted maximum."""

    def __init__(self, value: float) -> None:
        self.value = value
        super().__init__(f"LR statistic {value:.3e} is negative beyond tolerance; full maximum below restricted")


class SingularInformationError(NumericalError):
    """Observed information is not positive definite where it must be."""


class SingularVariabilityError(NumericalError):
    """Score variability matrix H of the sandwich cannot be inverted."""


class IntervalError(NumericalError):
    """Likelihood-ratio interval bracketing failed."""


class DegeneratePosteriorError(NumericalError):
    """Grid posterior has no positive mass."""


class GridMismatchError(NumericalError):
    """Two posterior grids were compared on different grids."""


class DomainError(NumericalError):
    """Parameter outside the domain where a formula is valid."""

    def __init__(self, message: str, value: float | None = None) -> None:
        self.value = value
        super().__init__(message)


class SizeCapError(NumericalError):
    """Problem size exceeds a configured cap."""

    def __init__(self, what: str, size: int, cap: int) -> None:
        self.what = what
        self.size = size
        self.cap = cap
        super().__init__(f"{what} size {size} exceeds cap {cap}")
