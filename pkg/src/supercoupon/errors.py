"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad arguments: parameters out of range, malformed subsets, bad rules."""


class CapacityError(RuntimeError):
    """A computation would exceed one of the documented size limits."""


class NoValidMoveError(ValidationError):
    """The random-walk step has no coupon outside the current draw (r == n)."""


class SafetyValveError(RuntimeError):
    """A simulation ran past its round cap without meeting the stop rule."""
