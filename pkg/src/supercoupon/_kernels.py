"""Compiled inner loops for the two sampling dynamics.

Every random draw goes through :func:`randbelow`, so a trajectory depends only
on the generator state and the sequence of calls made here.  The Python-level
helpers in :mod:`supercoupon.combinat` and :mod:`supercoupon.process` call the
same functions, which keeps single-step APIs and whole-run kernels on one
stream layout.

Stream layout per round: the first round (and every i.i.d. round) consumes
``r`` draws for Floyd's algorithm with bounds ``n-r+1, ..., n``; a walk round
consumes two draws, the removed position (bound ``r``) and then the rank of
the added coupon within the complement (bound ``n-r``).
"""

import numpy as np
from numba import njit

_TWO53 = 9007199254740992.0
_TWO53_INT = 9007199254740992


@njit(nogil=True, cache=True)
def randbelow(rng, k):
    # Generator.random() is (next64 >> 11) * 2**-53, so x carries 53 exact
    # uniform bits; rejecting the top partial block makes x % k exactly uniform.
    limit = _TWO53_INT - (_TWO53_INT % k)
    while True:
        x = np.int64(rng.random() * _TWO53)
        if x < limit:
            return x % k


@njit(nogil=True, cache=True)
def insertion_sort(a):
    # draws are short; ndarray.sort() costs several times more here
    for i in range(1, a.shape[0]):
        v = a[i]
        j = i - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v


@njit(nogil=True, cache=True)
def floyd_sample(rng, n, r, out, seen):
    filled = 0
    for j in range(n - r, n):
        t = randbelow(rng, j + 1)
        if seen[t]:
            t = j
        seen[t] = True
        out[filled] = t
        filled += 1
    for i in range(r):
        seen[out[i]] = False
    insertion_sort(out)


@njit(nogil=True, cache=True)
def rw_move(rng, h, n, r):
    """Swap one uniform member of sorted ``h`` for one uniform outsider.

    Returns the added coupon; ``h`` stays sorted.
    """
    u = randbelow(rng, r)
    c = randbelow(rng, n - r)
    # c-th smallest coupon not in h
    for i in range(r):
        if h[i] <= c:
            c += 1
        else:
            break
    for i in range(u, r - 1):
        h[i] = h[i + 1]
    i = r - 1
    while i > 0 and h[i - 1] > c:
        h[i] = h[i - 1]
        i -= 1
    h[i] = c
    return c


@njit(nogil=True, cache=True)
def mark(h, binom, sub_idx, words):
    gain = 0
    for row in range(sub_idx.shape[0]):
        rank = 0
        for i in range(sub_idx.shape[1]):
            rank += binom[h[sub_idx[row, i]], i + 1]
        w = rank >> 6
        bit = np.uint64(1) << np.uint64(rank & 63)
        if (words[w] & bit) == 0:
            words[w] |= bit
            gain += 1
    return gain


@njit(nogil=True, cache=True)
def simulate(rng, rw, n, r, m, binom, sub_idx, words, target, max_rounds,
             checkpoints, out_left):
    """Run rounds until ``count >= target`` or ``max_rounds`` is reached.

    ``checkpoints`` is a sorted array of round indices; ``out_left`` receives
    the number of uncollected super-coupons after each of them.  Returns
    ``(rounds, count)``.
    """
    h = np.empty(r, np.int64)
    seen = np.zeros(n, np.bool_)
    count = 0
    ptr = 0
    nck = checkpoints.shape[0]
    while ptr < nck and checkpoints[ptr] == 0:
        out_left[ptr] = m
        ptr += 1
    if count >= target:
        return 0, count
    t = 0
    while t < max_rounds:
        t += 1
        if t == 1 or not rw:
            floyd_sample(rng, n, r, h, seen)
        else:
            rw_move(rng, h, n, r)
        count += mark(h, binom, sub_idx, words)
        while ptr < nck and checkpoints[ptr] == t:
            out_left[ptr] = m - count
            ptr += 1
        if count >= target:
            break
    # callers only stop early at full coverage, after which nothing changes
    while ptr < nck:
        out_left[ptr] = m - count
        ptr += 1
    return t, count


@njit(nogil=True, cache=True)
def draw_path(rng, rw, n, r, out):
    """Record the draws of ``out.shape[0]`` rounds without marking anything."""
    h = np.empty(r, np.int64)
    seen = np.zeros(n, np.bool_)
    for t in range(out.shape[0]):
        if t == 0 or not rw:
            floyd_sample(rng, n, r, h, seen)
        else:
            rw_move(rng, h, n, r)
        out[t, :] = h
