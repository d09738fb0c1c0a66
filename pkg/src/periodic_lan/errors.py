"""Exception types raised across the package."""


class InvalidParameter(ValueError):
    """A parameter is out of range or has the wrong dimension."""


class InvalidModel(ValueError):
    """A diffusion model violates a structural hypothesis (e.g. sigma not bounded away from zero)."""


class ResourceLimit(RuntimeError):
    """The requested simulation exceeds the step budget."""


class NeedsPathEstimate(ValueError):
    """A nu-functional has no closed form for this volatility; supply a path."""


class S7Violation(ValueError):
    """The derivative of the Fisher matrix is numerically singular."""


class SingularNormalEquations(ValueError):
    """The profile normal equations G(T) theta = v(T) are ill-conditioned."""


class BoundaryMaximum(ValueError):
    """The profiled likelihood peaks on the boundary of the period bracket."""
