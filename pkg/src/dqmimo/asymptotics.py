"""Counting-based rate formulas: binary entropy, log-binomial expansions,
asymptotic capacity bounds and exact high-SNR rate caps.

All logarithms are base 2, so rates come out in bits.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DomainError, InvalidArgument

EXACT_LIMIT = 4096
REMAINDER_NOTE = "o(1/ell) remainder dropped"


def binary_entropy(lam):
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise InvalidArgument(f"binary entropy needs 0 <= lambda <= 1, got {lam}")
    if lam in (0.0, 1.0):
        return 0.0
    return -lam * math.log2(lam) - (1.0 - lam) * math.log2(1.0 - lam)


def log2_int(n):
    """log2 of a positive Python int of any size."""
    if n <= 0:
        raise InvalidArgument("log2 of a nonpositive integer")
    shift = max(n.bit_length() - 64, 0)
    return math.log2(n >> shift) + shift


def _log2_binom_lgamma(n, k):
    return float((gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)) / math.log(2))


def log_binomial_exact(n, k, method="auto"):
    """log2 C(n, k); big-integer for ``n <= 1000`` unless ``method`` says otherwise."""
    if not 0 <= k <= n:
        raise InvalidArgument(f"need 0 <= k <= n, got n={n}, k={k}")
    if method == "auto":
        method = "int" if n <= 1000 else "lgamma"
    if method == "int":
        return log2_int(math.comb(n, k))
    if method == "lgamma":
        return _log2_binom_lgamma(n, k)
    raise InvalidArgument(f"unknown method {method!r}")


def expansion_window(n):
    """Open interval of lambda where the single-binomial expansion is stated."""
    lo = 0.5 * (1.0 - math.sqrt(1.0 - 1.0 / (3.0 * n)))
    hi = 0.5 * (1.0 + math.sqrt(1.0 - 4.0 / (12.0 * n + 1.0)))
    return lo, hi


def log_binomial_expansion(n, lam):
    """Second-order expansion of log2 C(n, lam n); the O(1/n) term is dropped."""
    lo, hi = expansion_window(n)
    if not lo < lam < hi:
        raise DomainError(f"lambda={lam} outside the admissible window ({lo:.6g}, {hi:.6g}) for n={n}")
    return (n * binary_entropy(lam) - 0.5 * math.log2(n)
            - 0.5 * math.log2(2.0 * math.pi * lam * (1.0 - lam)))


def log_binomial_sum_exact(n, lam):
    """log2 of sum_{i <= floor(lam n)} C(n, i), by exact integer summation."""
    k = math.floor(lam * n)
    total, c = 0, 1
    for i in range(k + 1):
        total += c
        c = c * (n - i) // (i + 1)
    return log2_int(total)


def log_binomial_sum_expansion(n, lam):
    """Expansion of log2 sum_{i <= lam n} C(n, i) for lam < 1/2; o(1) term dropped."""
    if not 0.0 < lam < 0.5:
        raise DomainError(f"sum expansion needs 0 < lambda < 1/2, got {lam}")
    return (n * binary_entropy(lam) - 0.5 * math.log2(n)
            - 0.5 * math.log2(2.0 * math.pi * lam * (1.0 - 2.0 * lam) ** 2 / (1.0 - lam)))


def log2_binom_partial_sum(n, k):
    """log2 sum_{i=0}^{k} C(n, i) and whether it was computed exactly.

    Exact integers up to ``n = EXACT_LIMIT``; above that a log-gamma
    log-sum-exp, which is flagged by returning ``exact=False``.
    """
    k = min(k, n)
    if k < 0:
        raise InvalidArgument("empty binomial sum")
    if n <= EXACT_LIMIT:
        total, c = 0, 1
        for i in range(k + 1):
            total += c
            c = c * (n - i) // (i + 1)
        return log2_int(total), True
    i = np.arange(k + 1)
    terms = gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
    return float(logsumexp(terms) / math.log(2)), False


def high_snr_rate(n_q, rank, ell, zero_threshold=False):
    """Exact per-use rate cap ``(1/ell) log2 |cells|`` and an exactness flag."""
    if min(n_q, rank, ell) < 1:
        raise InvalidArgument("n_q, rank and ell must be at least 1")
    if zero_threshold:
        v, exact = log2_binom_partial_sum(ell * n_q - 1, ell * rank - 1)
        v += 1.0
    else:
        v, exact = log2_binom_partial_sum(ell * n_q, ell * rank)
    return v / ell, exact


def high_snr_rate_exact(n_q, rank, ell, zero_threshold=False):
    return high_snr_rate(n_q, rank, ell, zero_threshold)[0]


@dataclass(frozen=True)
class RateBounds:
    lower: float
    upper: float
    alpha: float
    beta: float
    ell: float
    n_q: int
    rank: int
    n_r: int
    remainder: str = REMAINDER_NOTE


def _bound(n_q, frac, ell):
    v = n_q * binary_entropy(frac)
    if math.isinf(ell):
        return v
    v -= math.log2(ell) / (2.0 * ell)
    if frac != 0.5:
        v -= math.log2(2.0 * math.pi * n_q * frac * (1.0 - 2.0 * frac) ** 2 / (1.0 - frac)) / (2.0 * ell)
    return v


def theorem1_bounds(n_q, rank, n_r, ell):
    """High-SNR capacity bounds for blocklength ``ell`` (``math.inf`` gives the limit).

    Lower bound uses ``alpha = min(rank/n_q, 1/2)``, upper bound
    ``beta = min(n_r/n_q, 1/2)``.
    """
    if n_q < 1 or ell < 1 or not 1 <= rank <= n_r:
        raise InvalidArgument(f"need n_q >= 1, ell >= 1, 1 <= rank <= n_r; got {n_q}, {ell}, {rank}, {n_r}")
    alpha = min(rank / n_q, 0.5)
    beta = min(n_r / n_q, 0.5)
    return RateBounds(_bound(n_q, alpha, ell), _bound(n_q, beta, ell), alpha, beta,
                      ell, n_q, rank, n_r)


def fig4_rate(n_q, rank):
    """Infinite-delay high-SNR rate ``n_q h_b(min(rank/n_q, 1/2))``."""
    return n_q * binary_entropy(min(rank / n_q, 0.5))


def fig4_curves(n_r=10, n_t_list=(2, 4, 6, 8), n_q_values=range(1, 41)):
    """Rows ``(n_q, n_t, rank, rate)`` for full-rank channels, plus the
    ``R = n_q`` reference as ``n_t = None``."""
    rows = []
    for n_t in n_t_list:
        rank = min(n_t, n_r)
        rows += [(n_q, n_t, rank, fig4_rate(n_q, rank)) for n_q in n_q_values]
    rows += [(n_q, None, None, float(n_q)) for n_q in n_q_values]
    return rows
