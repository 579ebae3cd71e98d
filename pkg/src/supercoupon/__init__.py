"""Simulation and exact-verification toolkit for the super-coupon collector.

A super-coupon is an ``s``-subset of ``n`` coupons.  Each round draws an
``r``-subset (independently, or by a one-swap random walk) and collects every
``s``-subset inside it.
"""

from .errors import CapacityError, NoValidMoveError, SafetyValveError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "NoValidMoveError",
    "SafetyValveError",
    "ValidationError",
]
