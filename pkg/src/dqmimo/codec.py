"""Finite-alphabet coding over the cells of a block arrangement.

Each nonempty cell gets a representative output point. The transmitter sends
the least-norm input that produces it, and the receiver observes which cell
the noisy output lands in. Capacity of that finite channel, with or without
an average cost constraint, comes from Blahut-Arimoto.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.special import ndtr

from .arrangement import _unit_rows, enumerate_regions, sign_vector, vertex_radius
from .errors import ConstructionFailure, InfeasibleBudget, InfeasibleTarget, InvalidArgument

BA_TOL = 1e-9
BA_MAX_ITER = 10_000


def min_norm_input(ch, ell, y_hat, rtol=1e-6):
    """Least-norm ``x`` with ``(I_ell kron h) x = y_hat`` for a time-major block.

    The block channel is block diagonal, so each of the ``ell`` slices is an
    independent pseudo-inverse solve with ``h``.
    """
    y = np.asarray(y_hat, dtype=float)
    if y.shape != (ell * ch.n_r,):
        raise InvalidArgument(f"expected a block of length {ell * ch.n_r}, got {y.shape}")
    pinv = np.linalg.pinv(ch.h, rcond=1e-9)
    ys = y.reshape(ell, ch.n_r)
    xs = ys @ pinv.T
    resid = np.linalg.norm(xs @ ch.h.T - ys)
    if resid > rtol * max(np.linalg.norm(y), 1e-300):
        raise InfeasibleTarget(
            f"target is not in the channel image (residual {resid:.3g}, norm {np.linalg.norm(y):.3g})"
        )
    return xs.reshape(-1)


def chebyshev_center(a, b, sigma, radius, max_rounds=200, rtol=1e-4):
    """Centre and radius of the largest ball inside a cell intersected with
    the origin-centred ball of ``radius``.

    Rows of ``a`` are unit normals. The ball constraint ``|c| + r <= radius``
    is handled by cutting planes over an initial box relaxation.
    """
    k, d = a.shape
    cols = d + 1
    obj = np.zeros(cols)
    obj[-1] = -1.0
    rows = [np.hstack([-sigma[:, None] * a, np.ones((k, 1))])] if k else []
    rhs = [sigma * b] if k else []
    box = np.hstack([np.vstack([np.eye(d), -np.eye(d)]), np.ones((2 * d, 1))])
    rows.append(box)
    rhs.append(np.full(2 * d, radius))
    for _ in range(max_rounds):
        res = linprog(obj, A_ub=np.vstack(rows), b_ub=np.concatenate(rhs),
                      bounds=[(None, None)] * d + [(0, None)], method="highs")
        if res.status != 0:
            return None, -np.inf
        c, r = res.x[:d], res.x[d]
        nc = np.linalg.norm(c)
        # the LP radius is an upper bound; shrinking it to fit the ball is feasible
        feasible = min(r, radius - nc)
        if r - feasible <= rtol * radius or nc == 0.0:
            return c, feasible
        rows.append(np.append(c / nc, 1.0)[None, :])
        rhs.append(np.array([radius]))
    return c, feasible


def default_radius(arr, max_subsets=20_000):
    """Ball that reaches well into every cell: 1.5 x the farthest vertex, at least 1."""
    if arr.m_q >= arr.d and math.comb(arr.m_q, arr.d) <= max_subsets:
        return max(1.0, 1.5 * vertex_radius(arr))
    return max(1.0, 1.1 * math.sqrt(arr.d))


@dataclass
class Constellation:
    arr: object              # arrangement at operating scale
    signs: np.ndarray        # (K, m_q)
    reps: np.ndarray         # (K, d) image coordinates
    reps_ambient: np.ndarray # (K, ell * n_r)
    inputs: np.ndarray       # (K, ell * n_t)
    costs: np.ndarray        # (K,) input norms
    inradius: np.ndarray     # (K,) noise margin of each representative
    ell: int
    power: float | None
    radius: float
    scale: float = 1.0

    def __len__(self):
        return len(self.signs)

    @property
    def energies(self):
        return self.costs ** 2

    @property
    def power_budget(self):
        return None if self.power is None else self.ell * self.power

    def index(self):
        return {bytes(s): k for k, s in enumerate(self.signs)}


def build_constellation(ch, arr, ell=1, power=None, radius=None, regions=None):
    """Representatives, least-norm inputs and costs for every nonempty cell.

    Representatives are Chebyshev centres of each cell cut by a ball of
    ``radius`` in image coordinates. When ``power`` is given, geometry and
    thresholds are then scaled together so that the costliest input has norm
    ``sqrt(ell * power)``; sign patterns are unchanged by the common scaling.
    """
    if arr.basis is not None and arr.basis.shape[0] != ell * ch.n_r:
        raise InvalidArgument(
            f"arrangement acts on length {arr.basis.shape[0]} blocks, channel block has {ell * ch.n_r}"
        )
    if arr.basis is None and arr.d != ell * ch.n_r:
        raise InvalidArgument("arrangement without basis must live in the ambient block space")
    regions = enumerate_regions(arr) if regions is None else regions
    if len(regions) == 0:
        raise InvalidArgument("no regions to build a constellation from")
    radius = default_radius(arr) if radius is None else float(radius)
    a, b = _unit_rows(arr)
    reps, inr = [], []
    for s in regions.signs:
        c, r = chebyshev_center(a, b, 2.0 * s - 1.0, radius)
        if c is None or not r > 0:
            raise ConstructionFailure(f"no interior ball for region {''.join(map(str, s))}")
        reps.append(c)
        inr.append(r)
    reps = np.array(reps)
    inr = np.array(inr)
    amb = arr.to_ambient(reps)
    inputs = np.array([min_norm_input(ch, ell, y) for y in amb])
    costs = np.linalg.norm(inputs, axis=1)
    scale = 1.0
    if power is not None:
        if not power > 0:
            raise InvalidArgument("power must be positive")
        peak = costs.max()
        scale = math.sqrt(ell * power) / peak if peak > 0 else 1.0
        arr = type(arr)(arr.v, scale * arr.t, arr.basis)
    return Constellation(arr, regions.signs.copy(), scale * reps, scale * amb, scale * inputs,
                         scale * costs, scale * inr, ell, power, scale * radius, scale)


@dataclass
class InducedChannel:
    transition: np.ndarray
    costs: np.ndarray
    mc_samples: int
    seed: object = None
    out_of_codebook: float = 0.0
    ell: int = 1
    exact: bool = False

    def __post_init__(self):
        self.transition = np.asarray(self.transition, dtype=float)
        self.costs = np.asarray(self.costs, dtype=float)


def _interval_channel(cons):
    """Exact cell-transition probabilities on a line under unit Gaussian noise."""
    arr = cons.arr
    a = arr.normals[:, 0]
    cuts = np.unique(-arr.t / a)
    edges = np.concatenate([[-np.inf], cuts, [np.inf]])
    mids = np.empty(len(edges) - 1)
    mids[1:-1] = 0.5 * (edges[1:-2] + edges[2:-1])
    mids[0] = edges[1] - 1.0 if len(cuts) else 0.0
    mids[-1] = edges[-2] + 1.0 if len(cuts) else 0.0
    idx = cons.index()
    cols = [idx[bytes(s)] for s in sign_vector(arr, mids[:, None])]
    y = cons.reps[:, 0][:, None]
    mass = ndtr(edges[None, 1:] - y) - ndtr(edges[None, :-1] - y)
    p = np.zeros((len(cons), len(cons)))
    for j, k in enumerate(cols):
        p[:, k] += mass[:, j]
    return p


def induced_channel(cons, mc_samples=100_000, rng=None, exact_1d=True, chunk=250_000):
    """Transition matrix from sent representative to received cell.

    Rows are Monte Carlo estimates: ambient unit-variance noise is added to the
    representative, projected onto the image and classified. Each row uses its
    own child seed so rows are reproducible independently. Outputs whose sign
    pattern is not a known cell are folded into the nearest representative and
    their frequency is reported. For one-dimensional images the Gaussian CDF
    over threshold intervals gives the matrix exactly.
    """
    K = len(cons)
    costs = cons.costs
    if exact_1d and cons.arr.d == 1:
        p = _interval_channel(cons)
        p /= p.sum(axis=1, keepdims=True)
        return InducedChannel(p, costs, 0, None, 0.0, cons.ell, exact=True)
    if mc_samples < 1:
        raise InvalidArgument("mc_samples must be positive")
    ss = rng if isinstance(rng, np.random.SeedSequence) else np.random.SeedSequence(rng)
    children = ss.spawn(K)
    arr = cons.arr
    weights = np.left_shift(np.uint64(1), np.arange(arr.m_q, dtype=np.uint64))
    codes = cons.signs.astype(np.uint64) @ weights
    order = np.argsort(codes)
    sorted_codes = codes[order]
    amb_dim = cons.reps_ambient.shape[1]
    counts = np.zeros((K, K))
    stray = 0
    for j in range(K):
        g = np.random.default_rng(children[j])
        left = mc_samples
        while left:
            n = min(left, chunk)
            noise = g.standard_normal((n, amb_dim))
            z = cons.reps[j] + arr.to_image(noise)
            c = sign_vector(arr, z).astype(np.uint64) @ weights
            pos = np.clip(np.searchsorted(sorted_codes, c), 0, K - 1)
            hit = sorted_codes[pos] == c
            cols = order[pos]
            if not hit.all():
                miss = ~hit
                stray += int(miss.sum())
                d2 = ((z[miss, None, :] - cons.reps[None, :, :]) ** 2).sum(axis=2)
                cols[miss] = d2.argmin(axis=1)
            counts[j] += np.bincount(cols, minlength=K)
            left -= n
    p = counts / counts.sum(axis=1, keepdims=True)
    return InducedChannel(p, costs, mc_samples, ss.entropy, stray / (K * mc_samples), cons.ell)


@dataclass
class CapacityResult:
    rate: float                       # bits per block
    input_distribution: np.ndarray
    iterations: int
    converged: bool
    cost_used: float | None = None
    gap: float = 0.0
    ell: int = 1
    slope: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def rate_per_use(self):
        return self.rate / self.ell


def _check_stochastic(p):
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.size == 0:
        raise InvalidArgument("transition must be a nonempty matrix")
    if np.any(p < 0) or np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-9):
        raise InvalidArgument("transition matrix must be row stochastic")
    return p


def _divergences(p, r):
    """``D(p_j || q)`` in bits for every input row, with ``q = r p``."""
    # an output may become unreachable once weights underflow; keep the log finite
    q = np.maximum(r @ p, 1e-300)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(p > 0, p / q[None, :], 1.0)
        return np.where(p > 0, p * np.log2(ratio), 0.0).sum(axis=1)


def mutual_information(p, r):
    r = np.asarray(r, dtype=float)
    return float(r @ _divergences(np.asarray(p, dtype=float), r))


def _ba(p, costs, slope, tol, max_iter, r0=None):
    K = p.shape[0]
    r = np.full(K, 1.0 / K) if r0 is None else r0.copy()
    pen = np.zeros(K) if costs is None else slope * costs
    gap = np.inf
    for it in range(1, int(max_iter) + 1):
        dv = _divergences(p, r) - pen
        m = dv.max()
        w = r * np.exp2(dv - m)
        lower = m + math.log2(w.sum())
        gap = m - lower
        if gap < tol:
            return r, it, True, gap
        r = w / w.sum()
    return r, int(max_iter), False, gap


def blahut_arimoto(chan, tol=BA_TOL, max_iter=BA_MAX_ITER):
    """Capacity of a finite channel; stops when the upper/lower gap drops below ``tol`` bits."""
    p = chan.transition if isinstance(chan, InducedChannel) else chan
    p = _check_stochastic(p)
    ell = chan.ell if isinstance(chan, InducedChannel) else 1
    r, it, ok, gap = _ba(p, None, 0.0, tol, max_iter)
    costs = chan.costs if isinstance(chan, InducedChannel) else None
    used = None if costs is None else float(r @ costs)
    return CapacityResult(mutual_information(p, r), r, it, ok, used, gap, ell)


def blahut_arimoto_cost(chan, budget, costs=None, tol=BA_TOL, max_iter=BA_MAX_ITER):
    """Capacity under ``E[cost] <= budget``.

    For a slope ``s`` the inner iteration maximises ``I - s E[cost]``; the
    expected cost falls as ``s`` grows, and bisection on ``s`` finds the
    smallest slope whose distribution meets the budget.
    """
    p = chan.transition if isinstance(chan, InducedChannel) else chan
    p = _check_stochastic(p)
    costs = np.asarray(chan.costs if costs is None else costs, dtype=float)
    ell = chan.ell if isinstance(chan, InducedChannel) else 1
    cmin = costs.min()
    if budget < cmin - 1e-12:
        raise InfeasibleBudget(f"budget {budget} is below the cheapest input cost {cmin}")

    def result(r, it, ok, gap, s):
        return CapacityResult(mutual_information(p, r), r, it, ok, float(r @ costs), gap, ell, s)

    r, it, ok, gap = _ba(p, None, 0.0, tol, max_iter)
    if r @ costs <= budget:
        return result(r, it, ok, gap, 0.0)
    cheap = costs <= cmin + 1e-12 * max(1.0, abs(cmin))
    if budget <= cmin + 1e-12 * max(1.0, abs(cmin)):
        sub = p[cheap]
        r_sub, it, ok, gap = _ba(sub, None, 0.0, tol, max_iter)
        r = np.zeros(len(costs))
        r[cheap] = r_sub
        return result(r, it, ok, gap, math.inf)

    lo, hi = 0.0, 1.0
    while True:
        r_hi, it, ok, gap = _ba(p, costs, hi, tol, max_iter)
        if r_hi @ costs <= budget or hi > 1e12:
            break
        lo, hi = hi, 2.0 * hi
    best = (r_hi, it, ok, gap, hi)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        r_mid, it, ok, gap = _ba(p, costs, mid, tol, max_iter, best[0])
        if r_mid @ costs <= budget:
            hi = mid
            best = (r_mid, it, ok, gap, mid)
        else:
            lo = mid
        if hi - lo <= 1e-12 * max(1.0, hi) or budget - best[0] @ costs < tol:
            break
    return result(*best)


def capacity_at_power(ch, arr, ell, power, mc_samples=100_000, rng=None, tol=BA_TOL,
                      regions=None):
    """Build constellation, induced channel and capacity at one power.

    The average constraint is on block energy ``E|x|^2 <= ell * power``.
    """
    cons = build_constellation(ch, arr, ell, power, regions=regions)
    chan = induced_channel(cons, mc_samples, rng)
    res = blahut_arimoto_cost(chan, ell * power, costs=cons.energies, tol=tol)
    res.extras.update(num_regions=len(cons), out_of_codebook=chan.out_of_codebook,
                      exact_channel=chan.exact, power=power)
    return res, cons, chan


def high_snr_capacity_check(ch, arr, ell, power_sequence, mc_samples=100_000, rng=None,
                            tol=BA_TOL):
    """Per-use capacity of the induced channel along an increasing power sweep."""
    powers = list(power_sequence)
    if any(b <= a for a, b in zip(powers, powers[1:])):
        raise InvalidArgument("power sequence must be increasing")
    regions = enumerate_regions(arr)
    ss = np.random.SeedSequence(rng)
    out = []
    for p, child in zip(powers, ss.spawn(len(powers))):
        res, _, _ = capacity_at_power(ch, arr, ell, p, mc_samples, child, tol, regions)
        out.append(res)
    return out
