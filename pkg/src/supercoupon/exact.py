"""Exact reference values at toy sizes.

* Expected collection time under i.i.d. draws, by inclusion-exclusion over
  families of super-coupons.
* Hitting times of the one-swap walk on the Johnson graph ``J(n, r)``, which
  depend only on the intersection size of start and target.
* Matthews-style cover-time bounds and an exact cover-time computation for
  very small graphs.

All exact results are :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.special import digamma

from .combinat import check_subset, rank_colex
from .errors import CapacityError, ValidationError

#: Largest ``C(n, r)`` enumerated by the inclusion-exclusion oracle.
MAX_DRAWS = 10**6
#: Largest number of super-coupons for the ``2**m`` family sum.
MAX_FAMILY_SUPER_COUPONS = 22
#: Largest Johnson graph handled by the exact cover-time dynamic program.
MAX_COVER_VERTICES = 12


def _check_draws(n: int, r: int) -> int:
    if not 1 <= r <= n:
        raise ValidationError(f"need 1 <= r <= n, got r={r}, n={n}")
    draws = math.comb(n, r)
    if draws > MAX_DRAWS:
        raise CapacityError(
            f"C({n}, {r}) = {draws} draws exceeds the enumeration limit {MAX_DRAWS}")
    return draws


def exact_miss_prob(n: int, r: int, family: Iterable[Sequence[int]]) -> Fraction:
    """Probability that one uniform ``r``-draw contains no member of ``family``."""
    draws = _check_draws(n, r)
    sets = [frozenset(check_subset(f, n)) for f in family]
    if not sets:
        raise ValidationError("family must be nonempty")
    avoiding = sum(
        1 for h in combinations(range(n), r)
        if not any(f.issubset(h) for f in sets))
    return Fraction(avoiding, draws)


def _draw_masks(n: int, r: int, s: int) -> np.ndarray:
    """For each ``r``-draw, the bitmask (over colex ranks) of super-coupons inside it."""
    masks = np.zeros(math.comb(n, r), dtype=np.int64)
    for i, h in enumerate(combinations(range(n), r)):
        bits = 0
        for sub in combinations(h, s):
            bits |= 1 << rank_colex(sub)
        masks[i] = bits
    return masks


def exact_expected_T(n: int, r: int, s: int, rule=None) -> Fraction:
    """Exact ``E T`` for collecting all ``C(n, s)`` super-coupons with i.i.d. draws.

    ``E T = sum_{k>=0} P(N_k > 0)``, and inclusion-exclusion over nonempty
    families ``J`` gives ``sum_J (-1)^(|J|+1) / (1 - q_J)`` where ``q_J`` is the
    one-round probability of missing all of ``J``.

    The miss counts for all ``2**m`` families come from one subset-sum (zeta)
    transform over the draw masks, and the alternating sum is grouped by miss
    count so the final reduction is over at most ``C(n, r)`` exact terms.
    """
    if rule is not None and getattr(rule, "alpha", None) is not None:
        raise ValidationError("the exact oracle supports only the collect-all rule")
    if not 1 <= s <= r <= n:
        raise ValidationError(f"need 1 <= s <= r <= n, got n={n}, r={r}, s={s}")
    m = math.comb(n, s)
    if m > MAX_FAMILY_SUPER_COUPONS:
        raise CapacityError(
            f"C({n}, {s}) = {m} super-coupons exceeds the inclusion-exclusion limit "
            f"{MAX_FAMILY_SUPER_COUPONS}")
    draws = _check_draws(n, r)

    # exact[M] = number of draws whose mask is exactly M, then subset sums:
    # below[C] = number of draws whose mask lies inside C.
    below = np.bincount(_draw_masks(n, r, s), minlength=1 << m).astype(np.int64)
    for bit in range(m):
        view = below.reshape(-1, 2, 1 << bit)
        view[:, 1, :] += view[:, 0, :]

    full = (1 << m) - 1
    families = np.arange(1, 1 << m, dtype=np.int64)
    missed = below[full ^ families]  # draws avoiding every member of J
    odd = (np.bitwise_count(families.astype(np.uint64)) & 1).astype(bool)
    signed = np.bincount(missed[odd], minlength=draws + 1).astype(object)
    signed -= np.bincount(missed[~odd], minlength=draws + 1).astype(object)

    total = Fraction(0)
    for avoid, weight in enumerate(signed):
        if weight:
            if avoid == draws:
                raise AssertionError("a nonempty family can always be hit")
            total += Fraction(int(weight) * draws, draws - avoid)
    return total


# -- Johnson graph ------------------------------------------------------------

@dataclass(frozen=True)
class HittingProfile:
    """``h[k]``: expected steps from a vertex to a target sharing ``k`` coupons.

    Entries for ``k < max(0, 2r - n)`` are ``None``: two ``r``-subsets of an
    ``n``-set always share at least that many coupons.
    """

    n: int
    r: int
    h: tuple

    @property
    def min_overlap(self) -> int:
        return max(0, 2 * self.r - self.n)


def _check_walk(n: int, r: int) -> None:
    if not 1 <= r < n:
        raise ValidationError(f"the Johnson-graph walk needs 1 <= r < n, got r={r}, n={n}")


def transition_counts(n: int, r: int, k: int) -> tuple[int, int, int]:
    """Neighbours of ``u`` whose overlap with the target moves to ``k-1``,
    ``k+1``, or stays at ``k``, when ``u`` currently shares ``k`` coupons."""
    down = k * (n - 2 * r + k)
    up = (r - k) ** 2
    return down, up, r * (n - r) - down - up


def solve_tridiagonal_exact(lower, diag, upper, rhs) -> list[Fraction]:
    """Thomas algorithm in exact arithmetic.

    ``lower[i]`` multiplies ``x[i-1]`` in row ``i`` (``lower[0]`` ignored);
    ``upper[i]`` multiplies ``x[i+1]`` (last entry ignored).
    """
    size = len(diag)
    c = [Fraction(0)] * size
    d = [Fraction(0)] * size
    for i in range(size):
        a = Fraction(lower[i]) if i else Fraction(0)
        pivot = Fraction(diag[i]) - (a * c[i - 1] if i else 0)
        if pivot == 0:
            raise ZeroDivisionError(f"zero pivot in row {i}")
        c[i] = Fraction(upper[i]) / pivot if i < size - 1 else Fraction(0)
        d[i] = (Fraction(rhs[i]) - (a * d[i - 1] if i else 0)) / pivot
    x = [Fraction(0)] * size
    for i in range(size - 1, -1, -1):
        x[i] = d[i] - (c[i] * x[i + 1] if i < size - 1 else 0)
    return x


def hitting_profile(n: int, r: int) -> HittingProfile:
    """Exact hitting times by overlap, from the first-step equations.

    Multiplying the first-step equation at overlap ``k`` by the degree
    ``D = r(n-r)`` gives::

        (down_k + up_k) h_k - down_k h_{k-1} - up_k h_{k+1} = D,   h_r = 0.
    """
    _check_walk(n, r)
    degree = r * (n - r)
    k0 = max(0, 2 * r - n)
    ks = range(k0, r)
    lower, diag, upper, rhs = [], [], [], []
    for k in ks:
        down, up, _ = transition_counts(n, r, k)
        lower.append(-down)
        diag.append(down + up)
        upper.append(-up)
        rhs.append(degree)
    solved = solve_tridiagonal_exact(lower, diag, upper, rhs)
    h = [None] * k0 + solved + [Fraction(0)]
    return HittingProfile(n, r, tuple(h))


def hitting_residuals(profile: HittingProfile) -> list[Fraction]:
    """``h_k - (1 + sum over neighbours of h / D)`` for each attainable ``k < r``."""
    n, r, h = profile.n, profile.r, profile.h
    degree = r * (n - r)
    out = []
    for k in range(profile.min_overlap, r):
        down, up, same = transition_counts(n, r, k)
        prev = h[k - 1] if down else 0
        rhs = 1 + Fraction(down * prev + up * h[k + 1] + same * h[k], degree)
        out.append(h[k] - rhs)
    return out


def x_profile(n: int, r: int) -> tuple:
    """Successive differences ``x_k = h_k - h_{k-1}`` for ``k = 1..r``.

    Entry ``k - 1`` holds ``x_k``; ``None`` where ``h_{k-1}`` is unattainable.
    """
    h = hitting_profile(n, r).h
    return tuple(
        None if h[k - 1] is None else h[k] - h[k - 1]
        for k in range(1, r + 1))


def x_profile_recursive(n: int, r: int) -> tuple:
    """The same differences from the forward recursion::

        x_{k+1} = [1 + (nk - r^2)/(r-k)^2] x_k - r(n-r)/(r-k)^2

    started at the smallest attainable overlap, where the down-term vanishes.
    """
    _check_walk(n, r)
    k0 = max(0, 2 * r - n)
    degree = r * (n - r)
    x = [None] * r
    current = Fraction(-degree, (r - k0) ** 2)
    x[k0] = current  # x_{k0+1}
    for k in range(k0 + 1, r):
        current = (1 + Fraction(n * k - r * r, (r - k) ** 2)) * current \
            - Fraction(degree, (r - k) ** 2)
        x[k] = current
    return tuple(x)


def harmonic(count: int) -> float:
    """``1 + 1/2 + ... + 1/count``."""
    if count <= 10**6:
        return math.fsum(1.0 / i for i in range(1, count + 1))
    return float(digamma(count + 1) + np.euler_gamma)


@dataclass(frozen=True)
class CoverBounds:
    lower: float
    upper: float
    harmonic: float


def matthews_bounds(n: int, r: int) -> CoverBounds:
    """Harmonic-number sandwich ``H_|V| min h <= t_cov <= H_|V| max h`` over
    distinct vertex pairs."""
    _check_walk(n, r)
    profile = hitting_profile(n, r)
    values = [v for v in profile.h[:r] if v is not None]
    hv = harmonic(math.comb(n, r))
    return CoverBounds(lower=hv * float(min(values)), upper=hv * float(max(values)),
                       harmonic=hv)


def johnson_neighbours(n: int, r: int) -> tuple[list[tuple[int, ...]], list[list[int]]]:
    """Vertices of ``J(n, r)`` in colex order and their adjacency lists."""
    _check_walk(n, r)
    vertices = sorted(combinations(range(n), r), key=rank_colex)
    index = {v: i for i, v in enumerate(vertices)}
    adjacency = []
    for v in vertices:
        outside = [c for c in range(n) if c not in v]
        nbrs = []
        for drop in v:
            rest = [c for c in v if c != drop]
            for add in outside:
                nbrs.append(index[tuple(sorted(rest + [add]))])
        adjacency.append(nbrs)
    return vertices, adjacency


def _solve_dense_exact(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    size = len(rhs)
    a = [row[:] + [b] for row, b in zip(matrix, rhs)]
    for col in range(size):
        pivot = next(i for i in range(col, size) if a[i][col] != 0)
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for i in range(size):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [vi - f * vc for vi, vc in zip(a[i], a[col])]
    return [a[i][size] for i in range(size)]


def exact_cover_time(n: int, r: int) -> Fraction:
    """Exact expected cover time of ``J(n, r)`` from a uniform start.

    Dynamic program over (current vertex, visited set).  With the visited set
    ``S`` fixed, moves inside ``S`` keep ``S``, so each ``S`` costs one linear
    solve over its own vertices; moves outside lead to larger sets.
    """
    _check_walk(n, r)
    size = math.comb(n, r)
    if size > MAX_COVER_VERTICES:
        raise CapacityError(
            f"J({n}, {r}) has {size} vertices; the exact cover-time limit is "
            f"{MAX_COVER_VERTICES}")
    _, adjacency = johnson_neighbours(n, r)
    degree = r * (n - r)
    full = (1 << size) - 1
    memo: dict[int, dict[int, Fraction]] = {}

    def solve(visited: int) -> dict[int, Fraction]:
        if visited in memo:
            return memo[visited]
        members = [v for v in range(size) if visited >> v & 1]
        if visited == full:
            memo[visited] = {v: Fraction(0) for v in members}
            return memo[visited]
        pos = {v: i for i, v in enumerate(members)}
        matrix = [[Fraction(0)] * len(members) for _ in members]
        rhs = [Fraction(1)] * len(members)
        for v in members:
            row = pos[v]
            matrix[row][row] += 1
            for w in adjacency[v]:
                if visited >> w & 1:
                    matrix[row][pos[w]] -= Fraction(1, degree)
                else:
                    rhs[row] += Fraction(1, degree) * solve(visited | 1 << w)[w]
        memo[visited] = dict(zip(members, _solve_dense_exact(matrix, rhs)))
        return memo[visited]

    return sum((solve(1 << v)[v] for v in range(size)), Fraction(0)) / size


def exact_T_rw_rs(n: int, r: int) -> Fraction:
    """``E T_RW`` with ``s = r``: one plus the cover time from a uniform start."""
    return 1 + exact_cover_time(n, r)
