"""The two sampling dynamics and their stopping times.

Rounds are counted from 1: the first draw is round 1.  Under ``IID`` every
round draws a fresh uniform ``r``-subset.  Under ``RW`` the first draw is
uniform and each later draw swaps one uniform member of the previous draw for
one uniform coupon outside it.

Reproducibility: replication ``i`` under master seed ``S`` uses
``numpy.random.SeedSequence(S, spawn_key=(i,))`` feeding a PCG64 generator.
Replications are independent of how they are scheduled, so serial and
threaded runs agree bit for bit.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels
from .analytic import check_alpha, predicted_T, predicted_T_rw
from .combinat import (
    CouponSet,
    as_generator,
    binomial,
    binomial_table,
    check_subset,
    subset_index_table,
)
from .errors import CapacityError, NoValidMoveError, SafetyValveError, ValidationError

#: Largest number of super-coupons a dense coverage bit-vector may hold.
MAX_SUPER_COUPONS = 2**32

#: Runs abort after this many multiples of the first-order prediction.
SAFETY_FACTOR = 1000

MAX_SEED = 2**64 - 1


class Model(str, enum.Enum):
    IID = "iid"
    RW = "rw"


@dataclass(frozen=True)
class ModelParams:
    n: int
    r: int
    s: int

    def __post_init__(self):
        for name in ("n", "r", "s"):
            if not isinstance(getattr(self, name), (int, np.integer)):
                raise ValidationError(f"{name} must be an integer")
        if not 1 <= self.s <= self.r <= self.n:
            raise ValidationError(
                f"need 1 <= s <= r <= n, got n={self.n}, r={self.r}, s={self.s}")
        if binomial(self.n, self.s) >= 2**63:
            raise ValidationError(f"C({self.n}, {self.s}) does not fit a 64-bit rank")

    @cached_property
    def m(self) -> int:
        """Number of super-coupons, ``C(n, s)``."""
        return binomial(self.n, self.s)

    @cached_property
    def per_round(self) -> int:
        """Super-coupons inside one draw, ``C(r, s)``."""
        return binomial(self.r, self.s)


@dataclass(frozen=True)
class StopRule:
    """Stop when everything is collected (``alpha is None``) or once at least
    ``ceil((1 - alpha) m)`` super-coupons are held."""

    alpha: float | None = None

    def __post_init__(self):
        if self.alpha is not None:
            check_alpha(self.alpha)

    @classmethod
    def all(cls) -> "StopRule":
        return cls()

    @classmethod
    def fraction(cls, alpha: float) -> "StopRule":
        return cls(alpha)

    @property
    def kind(self) -> str:
        return "all" if self.alpha is None else "fraction"

    def target(self, m: int) -> int:
        if self.alpha is None:
            return m
        # the decimal the caller wrote, so 0.1 means exactly 1/10
        keep = 1 - Fraction(repr(float(self.alpha)))
        return math.ceil(keep * m)


@dataclass(frozen=True)
class SeedRecord:
    master: int
    replication: int


@dataclass(frozen=True)
class RunResult:
    rounds: int
    rule: StopRule
    model: Model
    seed: SeedRecord | None = None


class CollectionState:
    """Dense bit-vector over super-coupon ranks plus a running count."""

    def __init__(self, params: ModelParams):
        if params.m > MAX_SUPER_COUPONS:
            raise CapacityError(
                f"C({params.n}, {params.s}) = {params.m} super-coupons exceeds "
                f"the bit-vector limit {MAX_SUPER_COUPONS}")
        self.params = params
        self.words = np.zeros((params.m + 63) // 64, dtype=np.uint64)
        self.count = 0

    @property
    def uncollected(self) -> int:
        return self.params.m - self.count

    def is_collected(self, rank: int) -> bool:
        return bool((int(self.words[rank >> 6]) >> (rank & 63)) & 1)

    def popcount(self) -> int:
        return int(sum(int(w).bit_count() for w in self.words))

    def mark(self, h: Sequence[int]) -> int:
        p = self.params
        elems = check_subset(h, p.n, p.r)
        gain = _kernels.mark(np.asarray(elems, dtype=np.int64), binomial_table(p.n, p.s),
                             subset_index_table(p.r, p.s), self.words)
        self.count += gain
        return int(gain)


def mark_round(state: CollectionState, h: Sequence[int]) -> int:
    """Collect every super-coupon inside ``h``; return how many were new."""
    return state.mark(h)


def rw_step(h: Sequence[int], n: int, rng) -> CouponSet:
    """One move of the walk: drop a uniform member, add a uniform outsider."""
    elems = check_subset(h, n)
    r = len(elems)
    if r == 0:
        raise ValidationError("the walk needs a nonempty draw")
    if r >= n:
        raise NoValidMoveError(f"no coupon lies outside a draw of all {n} coupons")
    arr = np.asarray(elems, dtype=np.int64)
    _kernels.rw_move(as_generator(rng), arr, n, r)
    return tuple(int(c) for c in arr)


def _check_model(params: ModelParams, model: Model | str) -> Model:
    model = Model(model)
    if model is Model.RW and params.r >= params.n:
        raise NoValidMoveError(
            f"the walk needs r < n, got r={params.r}, n={params.n}")
    return model


def round_cap(params: ModelParams, model: Model) -> int:
    if model is Model.RW:
        scale = predicted_T_rw(params.n, params.r, params.s).value
    else:
        scale = predicted_T(params.n, params.r, params.s).value
    return math.ceil(SAFETY_FACTOR * max(scale, 1.0))


def _engine(params: ModelParams):
    if params.m > MAX_SUPER_COUPONS:
        raise CapacityError(
            f"C({params.n}, {params.s}) = {params.m} super-coupons exceeds "
            f"the bit-vector limit {MAX_SUPER_COUPONS}")
    return binomial_table(params.n, params.s), subset_index_table(params.r, params.s)


_NO_CHECKPOINTS = np.zeros(0, dtype=np.int64)


class _Job:
    """Per-configuration constants shared by every replication."""

    def __init__(self, params: ModelParams, rule: StopRule, model: Model):
        self.params = params
        self.rule = rule
        self.model = model
        self.binom, self.sub_idx = _engine(params)
        self.target = rule.target(params.m)
        self.cap = round_cap(params, model)
        self.words_len = (params.m + 63) // 64

    def run(self, gen: np.random.Generator) -> int:
        p = self.params
        words = np.zeros(self.words_len, dtype=np.uint64)
        rounds, count = _kernels.simulate(
            gen, self.model is Model.RW, p.n, p.r, p.m, self.binom, self.sub_idx, words,
            self.target, self.cap, _NO_CHECKPOINTS, _NO_CHECKPOINTS)
        if count < self.target:
            raise SafetyValveError(
                f"{self.model.value} run with n={p.n}, r={p.r}, s={p.s} did not meet "
                f"the {self.rule.kind} rule within {self.cap} rounds")
        return int(rounds)


def run(params: ModelParams, rule: StopRule, model: Model | str, rng,
        seed: SeedRecord | None = None) -> RunResult:
    model = _check_model(params, model)
    rounds = _Job(params, rule, model).run(as_generator(rng))
    return RunResult(rounds, rule, model, seed)


def run_iid(params: ModelParams, rule: StopRule, rng, seed: SeedRecord | None = None) -> RunResult:
    """First round at which the i.i.d. dynamics meets ``rule``."""
    return run(params, rule, Model.IID, rng, seed)


def run_rw(params: ModelParams, rule: StopRule, rng, seed: SeedRecord | None = None) -> RunResult:
    """First round at which the one-swap walk meets ``rule``; needs ``r < n``."""
    return run(params, rule, Model.RW, rng, seed)


def _uncollected_path(params, ks: np.ndarray, model: Model, gen, tables=None) -> np.ndarray:
    binom, sub_idx = tables if tables is not None else _engine(params)
    words = np.zeros((params.m + 63) // 64, dtype=np.uint64)
    out = np.empty(ks.shape[0], dtype=np.int64)
    horizon = int(ks[-1]) if ks.shape[0] else 0
    _kernels.simulate(gen, model is Model.RW, params.n, params.r, params.m, binom,
                      sub_idx, words, params.m, horizon, ks, out)
    return out


def _checkpoints(ks) -> np.ndarray:
    arr = np.asarray(ks, dtype=np.int64).reshape(-1)
    if arr.size and (arr[0] < 0 or np.any(np.diff(arr) < 0)):
        raise ValidationError("round checkpoints must be nonnegative and nondecreasing")
    return arr


def sample_N_path(params: ModelParams, ks: Sequence[int], model: Model | str, rng) -> np.ndarray:
    """Uncollected counts after each of the (sorted) round counts ``ks`` along
    one trajectory.  Entry ``j`` equals ``sample_N_k(params, ks[j], ...)`` with
    a generator in the same state."""
    model = _check_model(params, model)
    return _uncollected_path(params, _checkpoints(ks), model, as_generator(rng))


def sample_N_k(params: ModelParams, k: int, model: Model | str, rng) -> int:
    """Number of super-coupons still missing after exactly ``k`` rounds."""
    if k < 0:
        raise ValidationError(f"k must be nonnegative, got {k}")
    return int(sample_N_path(params, [k], model, rng)[0])


def trajectory(params: ModelParams, model: Model | str, rounds: int, rng) -> list[CouponSet]:
    """The draws of the first ``rounds`` rounds, on the same stream as :func:`run`."""
    model = _check_model(params, model)
    out = np.empty((rounds, params.r), dtype=np.int64)
    _kernels.draw_path(as_generator(rng), model is Model.RW, params.n, params.r, out)
    return [tuple(int(c) for c in row) for row in out]


# -- replication harness ------------------------------------------------------

def check_seed(seed: int) -> int:
    if not 0 <= int(seed) <= MAX_SEED:
        raise ValidationError(f"master seed must lie in [0, 2**64), got {seed}")
    return int(seed)


def replication_rng(master: int, index: int) -> np.random.Generator:
    """Generator for replication ``index`` under ``master``."""
    seq = np.random.SeedSequence(check_seed(master), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(seq))


def default_threads() -> int:
    """``SUPERCOUPON_THREADS`` if set, else 1."""
    env = os.environ.get("SUPERCOUPON_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValidationError(f"SUPERCOUPON_THREADS must be an integer, got {env!r}")
        if value >= 1:
            return value
    return 1


def _parallel_fill(reps: int, threads: int | None, fill) -> None:
    """Call ``fill(lo, hi)`` over a deterministic partition of ``range(reps)``."""
    threads = default_threads() if threads is None else threads
    if threads < 1:
        raise ValidationError(f"thread count must be >= 1, got {threads}")
    if threads == 1 or reps < 2:
        fill(0, reps)
        return
    chunk = max(1, -(-reps // (threads * 4)))
    bounds = [(lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for fut in [pool.submit(fill, lo, hi) for lo, hi in bounds]:
            fut.result()


def replicate(params: ModelParams, rule: StopRule, model: Model | str, reps: int,
              seed: int, threads: int | None = None) -> np.ndarray:
    """Stopping times of ``reps`` independent replications, in index order."""
    model = _check_model(params, model)
    if reps < 1:
        raise ValidationError(f"reps must be >= 1, got {reps}")
    seed = check_seed(seed)
    job = _Job(params, rule, model)
    out = np.empty(reps, dtype=np.int64)

    def fill(lo, hi):
        for i in range(lo, hi):
            out[i] = job.run(replication_rng(seed, i))

    _parallel_fill(reps, threads, fill)
    return out


def replicate_results(params: ModelParams, rule: StopRule, model: Model | str, reps: int,
                      seed: int, threads: int | None = None) -> list[RunResult]:
    rounds = replicate(params, rule, model, reps, seed, threads)
    model = Model(model)
    return [RunResult(int(t), rule, model, SeedRecord(seed, i)) for i, t in enumerate(rounds)]


def replicate_uncollected(params: ModelParams, ks: Sequence[int], model: Model | str,
                          reps: int, seed: int, threads: int | None = None) -> np.ndarray:
    """``reps x len(ks)`` array of uncollected counts, one trajectory per row."""
    model = _check_model(params, model)
    if reps < 1:
        raise ValidationError(f"reps must be >= 1, got {reps}")
    seed = check_seed(seed)
    ks = _checkpoints(ks)
    tables = _engine(params)
    out = np.empty((reps, ks.shape[0]), dtype=np.int64)

    def fill(lo, hi):
        for i in range(lo, hi):
            out[i] = _uncollected_path(params, ks, model, replication_rng(seed, i), tables)

    _parallel_fill(reps, threads, fill)
    return out
