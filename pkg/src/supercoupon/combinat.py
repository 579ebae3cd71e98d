"""Exact combinatorial primitives over the coupon universe ``{0, ..., n-1}``.

Subsets are plain sorted tuples of ints.  Super-coupons are indexed by their
colexicographic rank (the combinatorial number system)::

    rank({c_0 < c_1 < ... < c_{s-1}}) = sum_i C(c_i, i + 1)

which maps the ``s``-subsets of ``{0, ..., n-1}`` densely onto
``[0, C(n, s))`` for every ``n``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import CapacityError, ValidationError

CouponSet = tuple[int, ...]

#: Binomials are held to an unsigned 128-bit range; larger values raise.
BINOMIAL_LIMIT = 2**128 - 1

#: Largest ``C(r, s)`` for which the per-round s-subset index table is built.
MAX_SUBSETS_PER_ROUND = 10**7


def binomial(n: int, k: int) -> int:
    """Exact ``C(n, k)``, zero when ``k > n``.

    Raises ``OverflowError`` rather than returning a value that does not fit
    in 128 unsigned bits.
    """
    if n < 0 or k < 0:
        raise ValidationError(f"binomial needs nonnegative arguments, got ({n}, {k})")
    if k > n:
        return 0
    value = math.comb(n, k)
    if value > BINOMIAL_LIMIT:
        raise OverflowError(f"C({n}, {k}) exceeds the 128-bit binomial range")
    return value


def check_subset(subset: Iterable[int], n: int, size: int | None = None) -> CouponSet:
    """Return ``subset`` as a sorted tuple after validating it against ``n``."""
    elems = tuple(int(c) for c in subset)
    if size is not None and len(elems) != size:
        raise ValidationError(f"expected a {size}-subset, got {len(elems)} elements")
    if any(b <= a for a, b in zip(elems, elems[1:])):
        ordered = tuple(sorted(elems))
        if len(set(ordered)) != len(ordered):
            raise ValidationError(f"duplicate coupons in {elems}")
        elems = ordered
    if elems and (elems[0] < 0 or elems[-1] >= n):
        raise ValidationError(f"coupons of {elems} must lie in [0, {n})")
    return elems


def rank_colex(subset: Sequence[int], n: int | None = None) -> int:
    """Colexicographic rank of ``subset``.

    ``n`` is only used for validation; the rank itself does not depend on it.
    """
    if n is None:
        n = (max(subset) + 1) if len(subset) else 0
    elems = check_subset(subset, n)
    return sum(math.comb(c, i + 1) for i, c in enumerate(elems))


def unrank_colex(rank: int, s: int, n: int) -> CouponSet:
    """The ``s``-subset of ``{0, ..., n-1}`` with colex rank ``rank``."""
    if s < 0 or s > n:
        raise ValidationError(f"need 0 <= s <= n, got s={s}, n={n}")
    total = math.comb(n, s)
    if not 0 <= rank < total:
        raise ValidationError(f"rank {rank} outside [0, {total})")
    out = [0] * s
    hi = n
    for k in range(s, 0, -1):
        # largest c < hi with C(c, k) <= rank
        lo = k - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if math.comb(mid, k) <= rank:
                lo = mid
            else:
                hi = mid
        out[k - 1] = lo
        rank -= math.comb(lo, k)
        hi = lo
    return tuple(out)


def s_subsets_of(h: Sequence[int], s: int) -> list[CouponSet]:
    """All ``s``-subsets of ``h`` (sorted tuples, no repeats)."""
    elems = tuple(sorted(h))
    if len(set(elems)) != len(elems):
        raise ValidationError(f"duplicate coupons in {tuple(h)}")
    if s < 0 or s > len(elems):
        raise ValidationError(f"cannot take {s}-subsets of a {len(elems)}-set")
    return list(combinations(elems, s))


@lru_cache(maxsize=64)
def subset_index_table(r: int, s: int) -> np.ndarray:
    """``C(r, s) x s`` array of position tuples, each row increasing."""
    count = math.comb(r, s)
    if count > MAX_SUBSETS_PER_ROUND:
        raise CapacityError(
            f"C({r}, {s}) = {count} s-subsets per round exceeds {MAX_SUBSETS_PER_ROUND}")
    table = np.array(list(combinations(range(r), s)), dtype=np.int64).reshape(count, s)
    table.flags.writeable = False
    return table


@lru_cache(maxsize=64)
def binomial_table(n: int, s: int) -> np.ndarray:
    """``table[c, j] = C(c, j)`` for ``c < n``, ``j <= s``, as int64."""
    if math.comb(n, s) >= 2**63:
        raise CapacityError(f"C({n}, {s}) does not fit a 64-bit rank")
    table = np.zeros((max(n, 1), s + 1), dtype=np.int64)
    for c in range(n):
        for j in range(min(c, s) + 1):
            table[c, j] = math.comb(c, j)
    table.flags.writeable = False
    return table


def as_generator(rng) -> np.random.Generator:
    """Accept a ``Generator``, an int seed, or ``None``."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_r_subset(n: int, r: int, rng) -> CouponSet:
    """Uniform ``r``-subset of ``{0, ..., n-1}`` via Floyd's algorithm."""
    if not 1 <= r <= n:
        raise ValidationError(f"need 1 <= r <= n, got r={r}, n={n}")
    out = np.empty(r, dtype=np.int64)
    _kernels.floyd_sample(as_generator(rng), n, r, out, np.zeros(n, dtype=np.bool_))
    return tuple(int(c) for c in out)
