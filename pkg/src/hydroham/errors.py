"""Exception types shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(WorkbenchError):
    """Malformed expression text.

    Carries the 0-based character position of the offending token.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvalDomainError(WorkbenchError):
    """Evaluation left the domain of an expression (log of a non-positive
    value, division by zero, a negative base under a fractional power, ...).

    ``subtree`` is the textual form of the node that failed, ``point`` the
    coordinates at which it failed.
    """

    def __init__(self, reason: str, subtree: str, point=None):
        msg = f"{reason} in {subtree!r}"
        if point is not None:
            msg += f" at {tuple(point)}"
        super().__init__(msg)
        self.reason = reason
        self.subtree = subtree
        self.point = None if point is None else tuple(point)


class HostileDomainError(WorkbenchError):
    """Resampling budget exhausted: domain too hostile."""


class DegenerateMetricError(WorkbenchError):
    """Metric failed the nondegeneracy floor at a point."""

    def __init__(self, det: float, point):
        super().__init__(
            f"degenerate metric: scaled |det| = {abs(det):.3e} at {tuple(point)}"
        )
        self.det = det
        self.point = tuple(point)


class ConstraintViolation(WorkbenchError):
    """A preset parameter block violates one of its defining equations."""


class NonConservedCurrentError(WorkbenchError):
    """A current handed to a reciprocal transformation is not conserved."""


class VanishingDenominatorError(WorkbenchError):
    """The denominator field of a reciprocal transformation vanishes on the
    sampling box."""
