"""Exception types shared across the package.

Everything here derives from ValueError so callers who do not care about
the fine-grained type can catch one thing.  The CLI maps DomainError (and
subclasses) to exit code 1 with a machine-readable JSON payload.
"""


class DomainError(ValueError):
    """A well-formed request that cannot be satisfied (bad data, limits)."""

    kind = "domain-error"

    def payload(self) -> dict:
        return {"error": self.kind, "detail": str(self)}


class TooLargeError(DomainError):
    """Input exceeds a documented exact-computation size bound."""

    kind = "too-large"


class BudgetError(DomainError):
    """Enumeration or search budget exceeded."""

    kind = "budget-exceeded"


class MarginalError(DomainError):
    """A probability vector is not a probability vector."""

    kind = "bad-marginal"


class ParameterError(DomainError):
    """Parameter outside its documented domain."""

    kind = "bad-parameter"


class GluingError(DomainError):
    """A proposed cross matrix violates a gluing (triangle) inequality."""

    kind = "bad-gluing"

    def __init__(self, message: str, indices: tuple = (), excess: float = 0.0):
        super().__init__(message)
        self.indices = tuple(indices)
        self.excess = float(excess)

    def payload(self) -> dict:
        return {
            "error": self.kind,
            "detail": str(self),
            "indices": list(self.indices),
            "excess": self.excess,
        }
