"""Exceptions and warning categories raised across the toolkit."""


class DomainError(ValueError):
    """A parameter lies outside the domain an operation is defined on."""


class SingularityError(DomainError):
    """An analytic derivative was requested where it does not exist."""


class InfeasibleError(RuntimeError):
    """No operating point satisfies the queue or QoS constraints."""


class ConvergenceError(RuntimeError):
    """An iterative method ran out of iterations before meeting its tolerance."""


class ConvergenceWarning(UserWarning):
    """A numerical routine returned a result it could not certify."""


class SlackConstraintWarning(UserWarning):
    """A constraint is slack and the optimal multiplier was clamped."""
