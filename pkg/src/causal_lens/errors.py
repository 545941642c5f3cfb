"""Exception types shared by all modules."""


class SpecError(ValueError):
    """An input violates an operation's declared preconditions.

    Raised for structural mistakes the caller can fix: unknown or duplicated
    wire names, mismatched systems in a composition, invalid subsets,
    overlapping gate placements, malformed channel data.
    """


class BudgetError(RuntimeError):
    """A requested computation exceeds the configured enumeration or size cap."""


class ConsistencyError(RuntimeError):
    """An internal invariant failed; indicates a bug, never a usage error."""
