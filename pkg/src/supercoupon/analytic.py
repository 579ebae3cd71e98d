"""Closed-form quantities: one-round probabilities, moments of the uncollected
count, first-order stopping-time predictions, and the Gumbel law.

All logarithms are natural.  Predictions drop the ``(1 + o(1))`` factor, so
compare them with simulations through ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .combinat import BINOMIAL_LIMIT
from .errors import ValidationError

FIRST_ORDER_NOTE = "asymptotic, first-order"


def check_params(n: int, r: int, s: int) -> None:
    if not (isinstance(n, (int, np.integer)) and isinstance(r, (int, np.integer))
            and isinstance(s, (int, np.integer))):
        raise ValidationError(f"n, r, s must be integers, got {n!r}, {r!r}, {s!r}")
    if not 1 <= s <= r <= n:
        raise ValidationError(f"need 1 <= s <= r <= n, got n={n}, r={r}, s={s}")


def check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must lie strictly inside (0, 1), got {alpha}")


def log_binomial(n: int, k: int) -> float:
    """``log C(n, k)``: exact-integer path when it fits, log-gamma otherwise."""
    if k < 0 or k > n:
        return -math.inf
    value = math.comb(n, k) if min(k, n - k) < 64 or n < 2000 else None
    if value is not None and value <= BINOMIAL_LIMIT:
        return math.log(value)
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def log_binomial_lgamma(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def theta(n: int, r: int, s: int, exact: bool = False):
    """Probability that one round collects a fixed super-coupon.

    ``C(n-s, r-s) / C(n, r)``; with ``exact=True`` a :class:`Fraction`.
    """
    check_params(n, r, s)
    if exact:
        return Fraction(math.comb(n - s, r - s), math.comb(n, r))
    return math.exp(log_binomial(n - s, r - s) - log_binomial(n, r))


def psi(n: int, r: int, s: int) -> float:
    """``r**r * n**-(s+2) / max(r - 2s, 0)!``, the pair-probability proxy.

    Asymptotically it dominates the probability of collecting two distinct
    super-coupons in one round; at small ``n`` it need not.
    """
    check_params(n, r, s)
    return math.exp(r * math.log(r) - (s + 2) * math.log(n)
                    - math.lgamma(max(r - 2 * s, 0) + 1))


def pair_collect_prob(n: int, r: int, s: int, overlap: int, exact: bool = False):
    """Probability that one round collects two given super-coupons sharing
    ``overlap`` coupons: both lie in the draw iff their union does."""
    check_params(n, r, s)
    if not 0 <= overlap <= s - 1:
        raise ValidationError(
            f"two distinct {s}-subsets share between 0 and {s - 1} coupons, got {overlap}")
    union = 2 * s - overlap
    if union > r:
        return Fraction(0) if exact else 0.0
    if exact:
        return Fraction(math.comb(n - union, r - union), math.comb(n, r))
    return math.exp(log_binomial(n - union, r - union) - log_binomial(n, r))


def expected_Nk(n: int, r: int, s: int, k: int) -> float:
    """``E N_k = C(n, s) (1 - theta)^k``; exact for every ``k >= 0``."""
    check_params(n, r, s)
    if k < 0:
        raise ValidationError(f"k must be nonnegative, got {k}")
    th = theta(n, r, s)
    log_m = log_binomial(n, s)
    if k == 0:
        return math.exp(log_m)
    if th >= 1.0:
        return 0.0
    return math.exp(log_m + k * math.log1p(-th))


@dataclass(frozen=True)
class MomentBounds:
    lower: float
    upper: float
    degenerate: bool = False  # a negative base (1 - d*theta ...) was clipped to 0


def moment_bounds(n: int, r: int, s: int, k: int, d: int) -> MomentBounds:
    """Sandwich on ``E N_k^d`` for ``d >= 2``::

        d! C(m,d) (1 - d th)^k  <=  E N_k^d
                                <=  d! C(m,d) (1 - d th + C(d,2) psi)^k + d^2 m^(d-1) (1 - th)^k

    Stated for ``k >= 1``; ``k = 0`` is accepted as a sanity extension.
    """
    check_params(n, r, s)
    if d < 2:
        raise ValidationError(f"moment order d must be >= 2, got {d}")
    if k < 0:
        raise ValidationError(f"k must be nonnegative, got {k}")
    m = math.comb(n, s)
    th = theta(n, r, s)
    if m < d:
        return MomentBounds(0.0, d * d * float(m) ** (d - 1) * (1.0 - th) ** k)
    log_ff = math.lgamma(m + 1) - math.lgamma(m - d + 1)  # log d! C(m, d)

    def main_term(base: float) -> float:
        if k == 0:
            return math.exp(log_ff)
        if base <= 0.0:
            return 0.0
        return math.exp(log_ff + k * math.log(base))

    lo_base = 1.0 - d * th
    hi_base = lo_base + math.comb(d, 2) * psi(n, r, s)
    tail = d * d * math.exp((d - 1) * math.log(m)) * (1.0 - th) ** k
    return MomentBounds(
        lower=main_term(lo_base),
        upper=main_term(hi_base) + tail,
        degenerate=k > 0 and (lo_base < 0.0 or hi_base < 0.0),
    )


def second_moment(n: int, r: int, s: int, k: int) -> float:
    """Exact ``E N_k^2`` by summing over ordered pairs grouped by overlap."""
    check_params(n, r, s)
    m = math.comb(n, s)
    th = theta(n, r, s, exact=True)
    total = Fraction(m) * (1 - th) ** k
    for overlap in range(s):
        pairs = m * math.comb(s, overlap) * math.comb(n - s, s - overlap)
        if pairs == 0:
            continue
        both = pair_collect_prob(n, r, s, overlap, exact=True)
        total += pairs * (1 - 2 * th + both) ** k
    return float(total)


@dataclass(frozen=True)
class Prediction:
    value: float
    kind: str  # "T", "T_alpha" or "T_rw"
    n: int
    r: int
    s: int
    alpha: float | None = None
    conjecture: bool = False
    note: str = FIRST_ORDER_NOTE


def _collect_scale(n: int, r: int, s: int) -> tuple[float, float]:
    """``(log m, m / C(r, s))``."""
    log_m = log_binomial(n, s)
    return log_m, math.exp(log_m - log_binomial(r, s))


def predicted_T(n: int, r: int, s: int) -> Prediction:
    """``C(n,s) log C(n,s) / C(r,s)`` rounds to collect everything.

    Zero in the degenerate single-super-coupon case ``s == n``.
    """
    check_params(n, r, s)
    log_m, scale = _collect_scale(n, r, s)
    return Prediction(scale * log_m, "T", n, r, s)


def predicted_T_alpha(n: int, r: int, s: int, alpha: float) -> Prediction:
    check_params(n, r, s)
    check_alpha(alpha)
    _, scale = _collect_scale(n, r, s)
    return Prediction(scale * math.log(1.0 / alpha), "T_alpha", n, r, s, alpha=alpha)


def predicted_T_rw(n: int, r: int, s: int) -> Prediction:
    """Conjectured ``(r/s) C(n,s) log C(n,s) / C(r,s)`` for the one-swap walk."""
    check_params(n, r, s)
    if r >= n:
        raise ValidationError(f"the walk needs r < n, got r={r}, n={n}")
    log_m, scale = _collect_scale(n, r, s)
    return Prediction(r / s * scale * log_m, "T_rw", n, r, s, conjecture=True)


def fig_scale_T(n: int, r: int, s: int) -> float:
    """``n^s log n / ((s-1)! C(r,s))``, the large-``n`` form of :func:`predicted_T`."""
    check_params(n, r, s)
    return n**s * math.log(n) / (math.factorial(s - 1) * math.comb(r, s))


def fig_scale_T_alpha(n: int, r: int, s: int, alpha: float) -> float:
    """``n^s log(1/alpha) / (s! C(r,s))``."""
    check_params(n, r, s)
    check_alpha(alpha)
    return n**s * math.log(1.0 / alpha) / (math.factorial(s) * math.comb(r, s))


def fig_scale_T_rw(n: int, r: int) -> float:
    """``n^2 log n / (r - 1)``, the pair-collecting (s = 2) walk scale."""
    if r < 2:
        raise ValidationError(f"the walk scale needs r >= 2, got r={r}")
    return n * n * math.log(n) / (r - 1)


def normalize_T(t, n: int, r: int, s: int):
    """Center by ``m log m / C(r,s)`` and scale by ``m / C(r,s)``."""
    check_params(n, r, s)
    log_m, scale = _collect_scale(n, r, s)
    t = np.asarray(t, dtype=float) if not np.isscalar(t) else float(t)
    return (t - scale * log_m) / scale


def gumbel_cdf(x):
    return np.exp(-np.exp(-np.asarray(x, dtype=float)))


def gumbel_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-x - np.exp(-x))


def gumbel_ppf(p):
    return -np.log(-np.log(np.asarray(p, dtype=float)))


EULER_GAMMA = 0.5772156649015329
