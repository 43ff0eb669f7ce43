"""Exception types shared across the package."""


class CasimirError(Exception):
    """Base class for all package errors."""


class InvalidArgument(CasimirError, ValueError):
    pass


class SingularStructureMatrix(CasimirError):
    """The Wei-Norman coupling matrix is (numerically) singular."""

    def __init__(self, t, alpha, condition):
        self.t = t
        self.alpha = alpha
        self.condition = condition
        super().__init__(
            f"structure matrix ill-conditioned at t={t:.6g} (cond ~ {condition:.3g})"
        )


class IntegrationFailure(CasimirError):
    """Adaptive integration could not continue; carries the last accepted state."""

    def __init__(self, message, t_last, alpha_last):
        self.t_last = t_last
        self.alpha_last = alpha_last
        super().__init__(f"{message} (last good t={t_last:.6g})")


class ConsistencyError(CasimirError):
    """A quantity that must be real/non-negative came out otherwise."""


class OracleDivergence(CasimirError):
    """The Fock-space reference propagation lost norm beyond its budget."""
