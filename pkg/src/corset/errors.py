"""Exception hierarchy shared by all modules.

Exit-code mapping used by the CLI: SpecError/DomainError -> 2,
ResourceBudgetError -> 3, InsufficientRadiusError/InsufficientDepthError -> 4,
InvariantViolationError -> 5.
"""


class CorsetError(Exception):
    pass


class SpecError(CorsetError):
    """Malformed input: group/subgroup spec, word string, parameter validation."""


class DomainError(CorsetError):
    """Structurally invalid argument: non-metric base, disconnected graph, empty set."""


class RepresentationError(SpecError):
    """An element is not a valid normal form for its group."""


class ResourceBudgetError(CorsetError):
    """A build or enumeration exceeded its configured budget."""

    def __init__(self, message, budget=None):
        super().__init__(message)
        self.budget = budget


class InsufficientRadiusError(CorsetError):
    """A query cannot be certified inside the enumerated ball."""


class InsufficientDepthError(CorsetError):
    """A horoball/cusped query needs more depth than was built."""


class InvariantViolationError(CorsetError):
    """An internal invariant failed (e.g. a point deep in two distinct cosets).

    Carries the offending instance for diagnostics.
    """

    def __init__(self, message, instance=None):
        super().__init__(message)
        self.instance = instance
