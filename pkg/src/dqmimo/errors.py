"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class DegenerateChannel(ValueError):
    pass


class DomainError(ValueError):
    """Argument lies outside the range where an expansion is valid."""


class ResourceLimit(RuntimeError):
    pass


class ConstructionFailure(RuntimeError):
    pass


class InfeasibleTarget(ValueError):
    """Requested output is not in the image of the channel."""


class InfeasibleBudget(ValueError):
    pass
