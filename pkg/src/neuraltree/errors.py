"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-domain input."""


class CapacityError(RuntimeError):
    """An oracle-scale size guard was exceeded."""


class DecompositionError(ValueError):
    """A tree decomposition is inconsistent with the graph it claims to decompose."""
