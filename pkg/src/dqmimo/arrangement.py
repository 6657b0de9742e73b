"""Sign-vector partitions cut out of the channel image by one-bit threshold ADCs.

An :class:`Arrangement` holds a combiner ``v`` acting on ambient receive
vectors, thresholds ``t`` and an orthonormal ``basis`` of the channel image.
Composed with the basis, each combiner row is a hyperplane normal in the
``d``-dimensional image coordinates; the ADC outputs ``1{v y + t >= 0}`` label
the cells of the resulting hyperplane arrangement.
"""

import json
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .errors import ConstructionFailure, InvalidArgument, ResourceLimit

MAX_HYPERPLANES = 24
MAX_DIM = 12
BOX = 1e6
MARGIN = 1e-7


@dataclass(frozen=True)
class Arrangement:
    v: np.ndarray
    t: np.ndarray
    basis: np.ndarray | None = None
    normals: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.v, dtype=float)).copy()
        t = np.asarray(self.t, dtype=float).reshape(-1).copy()
        if t.shape[0] != v.shape[0]:
            raise InvalidArgument(f"{v.shape[0]} combiner rows but {t.shape[0]} thresholds")
        if self.basis is None:
            normals = v.copy()
            basis = None
        else:
            basis = np.atleast_2d(np.asarray(self.basis, dtype=float)).copy()
            if basis.shape[0] != v.shape[1]:
                raise InvalidArgument("basis rows must match combiner columns")
            normals = v @ basis
            basis.setflags(write=False)
        scale = np.abs(normals).max(initial=0.0)
        if np.any(np.linalg.norm(normals, axis=1) <= 1e-12 * max(scale, 1.0)):
            raise InvalidArgument("combiner row vanishes on the channel image")
        for a in (v, t, normals):
            a.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "normals", normals)

    @property
    def m_q(self):
        return self.v.shape[0]

    @property
    def d(self):
        return self.normals.shape[1]

    @property
    def zero_threshold(self):
        return bool(np.all(self.t == 0.0))

    def to_ambient(self, y):
        """Map image coordinates to the ambient receive space."""
        y = np.asarray(y, dtype=float)
        return y if self.basis is None else y @ self.basis.T

    def to_image(self, y):
        y = np.asarray(y, dtype=float)
        return y if self.basis is None else y @ self.basis

    def scaled(self, c):
        return Arrangement(c * self.v, c * self.t, self.basis)

    def to_json(self):
        doc = {
            "v": self.v.tolist(),
            "t": self.t.tolist(),
            "d": self.d,
            "zero_threshold": self.zero_threshold,
        }
        if self.basis is not None:
            doc["basis"] = self.basis.tolist()
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text) if isinstance(text, str) else dict(text)
        arr = cls(doc["v"], doc["t"], doc.get("basis"))
        if "d" in doc and int(doc["d"]) != arr.d:
            raise InvalidArgument(f"declared d={doc['d']} but combiner gives d={arr.d}")
        if doc.get("zero_threshold") and not arr.zero_threshold:
            raise InvalidArgument("zero_threshold flag set but thresholds are nonzero")
        return arr


def sign_vector(arr, y):
    """ADC output bits ``1{normals . y + t >= 0}`` for image-coordinate point(s) ``y``."""
    y = np.asarray(y, dtype=float)
    w = y @ arr.normals.T + arr.t
    return (w >= 0).astype(np.uint8)


def sign_vector_ambient(arr, y):
    """Same as :func:`sign_vector` but ``y`` lives in the ambient receive space."""
    y = np.asarray(y, dtype=float)
    w = y @ arr.v.T + arr.t
    return (w >= 0).astype(np.uint8)


@dataclass
class RegionSet:
    """Nonempty cells of an arrangement, sorted lexicographically by sign vector."""

    signs: np.ndarray        # (K, m_q) uint8
    points: np.ndarray       # (K, d) strictly interior certificates
    margins: np.ndarray      # (K,) distance of each certificate to its walls
    degenerate: bool = False
    lp_calls: int = 0

    def __len__(self):
        return len(self.signs)

    def index(self):
        return {bytes(s): k for k, s in enumerate(self.signs)}

    def as_set(self):
        return {tuple(int(b) for b in s) for s in self.signs}


def _unit_rows(arr):
    norms = np.linalg.norm(arr.normals, axis=1)
    return arr.normals / norms[:, None], arr.t / norms


def strict_interior(a, b, sigma, box=BOX):
    """Deepest point of ``{y : sigma_i (a_i y + b_i) >= s}`` inside a box.

    Rows of ``a`` must be unit length. Returns ``(s, y)`` with ``s`` capped at 1;
    the cell has nonempty interior iff ``s`` is positive.
    """
    k, d = a.shape
    c = np.zeros(d + 1)
    c[-1] = -1.0
    if k:
        a_ub = np.hstack([-sigma[:, None] * a, np.ones((k, 1))])
        b_ub = sigma * b
    else:
        a_ub, b_ub = None, None
    bounds = [(-box, box)] * d + [(None, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        return -np.inf, None
    return -res.fun, res.x[:d]


def _has_coincident(a, b, tol=1e-9):
    rows = np.hstack([a, b[:, None]])
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            if min(np.abs(rows[i] - rows[j]).max(), np.abs(rows[i] + rows[j]).max()) < tol:
                return True
    return False


def enumerate_regions(arr, max_hyperplanes=MAX_HYPERPLANES, max_dim=MAX_DIM,
                      box=BOX, margin=MARGIN):
    """All sign vectors whose cell has nonempty interior.

    Hyperplanes are inserted one at a time. A cell of the first ``k``
    hyperplanes survives on the side of hyperplane ``k+1`` that contains its
    certificate point, and an LP decides whether the other side is also
    strictly feasible.
    """
    if arr.m_q > max_hyperplanes or arr.d > max_dim:
        raise ResourceLimit(
            f"arrangement with {arr.m_q} hyperplanes in dimension {arr.d} exceeds the "
            f"enumeration budget ({max_hyperplanes} hyperplanes, dimension {max_dim})"
        )
    a, b = _unit_rows(arr)
    d = arr.d
    frontier = [((), np.zeros(d), np.inf)]
    lp_calls = 0
    for k in range(arr.m_q):
        nxt = []
        for prefix, y, m in frontier:
            w = a[k] @ y + b[k]
            here = 1 if w >= 0 else 0
            for bit in (here, 1 - here):
                bits = prefix + (bit,)
                if bit == here and abs(w) >= margin:
                    nxt.append((bits, y, min(m, abs(w))))
                    continue
                sigma = 2.0 * np.array(bits) - 1.0
                lp_calls += 1
                s, z = strict_interior(a[: k + 1], b[: k + 1], sigma, box)
                if s >= margin:
                    nxt.append((bits, z, s))
        frontier = nxt
    frontier.sort(key=lambda r: r[0])
    signs = np.array([r[0] for r in frontier], dtype=np.uint8).reshape(len(frontier), arr.m_q)
    points = np.array([r[1] for r in frontier]).reshape(len(frontier), d)
    # recompute margins on the final cell so they certify every wall
    if arr.m_q:
        sig = 2.0 * signs - 1.0
        margins = (sig * (points @ a.T + b)).min(axis=1)
    else:
        margins = np.full(len(frontier), np.inf)
    return RegionSet(signs, points, margins, _has_coincident(a, b), lp_calls)


def max_regions(n_q, d):
    """Largest number of cells ``n_q`` affine hyperplanes cut in ``d``-space."""
    if n_q < 0 or d < 0:
        raise InvalidArgument("n_q and d must be nonnegative")
    return sum(comb(n_q, i) for i in range(d + 1))


def max_regions_zero_threshold(n_q, d):
    """Largest number of cells ``n_q`` hyperplanes through the origin cut in ``d``-space."""
    if n_q < 1 or d < 1:
        raise InvalidArgument("n_q and d must be at least 1")
    return 2 * sum(comb(n_q - 1, i) for i in range(d))


def _min_abs_det(u, subsets):
    return np.abs(np.linalg.det(u[subsets])).min()


def spread_normals(n_q, d, rng, pool=30, steps=300, max_subsets=5000):
    """Unit normals pushed apart so no ``d`` of them are close to dependent.

    Best of ``pool`` Gaussian draws by smallest ``|det|`` over ``d``-subsets,
    then refined by random local moves. Large configurations skip refinement.
    """
    u = rng.standard_normal((n_q, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    if d == 1:
        return u * rng.uniform(0.5, 1.5, (n_q, 1))
    if n_q < d or comb(n_q, d) > max_subsets:
        return u
    subsets = np.array(list(combinations(range(n_q), d)))
    best, score = u, _min_abs_det(u, subsets)
    for _ in range(pool - 1):
        cand = rng.standard_normal((n_q, d))
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        sc = _min_abs_det(cand, subsets)
        if sc > score:
            best, score = cand, sc
    step = 0.2
    for _ in range(steps):
        cand = best + step * rng.standard_normal(best.shape)
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        sc = _min_abs_det(cand, subsets)
        if sc > score:
            best, score = cand, sc
        else:
            step = max(0.99 * step, 0.005)
    return best


def fatten_thresholds(normals, t0, max_cells=4000):
    """Thresholds that keep every cell of ``(normals, t0)`` but make the
    thinnest one as fat as possible.

    With normals fixed, the condition that cell ``k`` contains the ball of
    radius ``r`` around ``c_k`` is linear in ``(t, c_k, r)``, so one LP
    maximises the smallest inradius with all centres in ``[-1, 1]^d``.
    Returns ``(t, r)``; ``t0`` is returned unchanged when the LP is too large.
    """
    arr = Arrangement(normals, t0)
    a, b = _unit_rows(arr)
    norms = np.linalg.norm(normals, axis=1)
    regions = enumerate_regions(arr)
    n_q, d = a.shape
    K = len(regions)
    if K * n_q > max_cells * 24:
        return np.asarray(t0, dtype=float), float(regions.margins.min())
    sig = 2.0 * regions.signs - 1.0
    nv = n_q + K * d + 1
    kk, ii = np.meshgrid(np.arange(K), np.arange(n_q), indexing="ij")
    kk, ii = kk.ravel(), ii.ravel()
    row = kk * n_q + ii
    s = sig.ravel()
    # -sig (a_i . c_k + b_i) + r <= 0
    rows = [row, np.repeat(row, d), row]
    cols = [ii, (n_q + kk * d)[:, None].repeat(d, 1).ravel() + np.tile(np.arange(d), K * n_q),
            np.full(row.size, nv - 1)]
    vals = [-s, (-s[:, None] * a[ii]).ravel(), np.ones(row.size)]
    A = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                   shape=(K * n_q, nv)).tocsr()
    c = np.zeros(nv)
    c[-1] = -1.0
    bounds = [(None, None)] * n_q + [(-1.0, 1.0)] * (K * d) + [(0.0, 1.0)]
    res = linprog(c, A_ub=A, b_ub=np.zeros(K * n_q), bounds=bounds, method="highs")
    if res.status != 0 or -res.fun < MARGIN:
        return np.asarray(t0, dtype=float), float(regions.margins.min())
    return res.x[:n_q] * norms, float(-res.fun)


def general_position_arrangement(n_q, d, zero_threshold=False, rng=None, max_retries=16,
                                 basis=None, method="spread"):
    """Random arrangement verified to reach the maximal cell count.

    ``method="iid"`` draws normals and thresholds i.i.d. standard normal.
    ``method="spread"`` (default) spreads the normals apart and fattens the
    thresholds with :func:`fatten_thresholds`; every cell then contains a ball
    centred in ``[-1, 1]^d``, which keeps cells large enough to be found by
    sampling and to carry noise margin. Zero thresholds skip the fattening.

    With ``basis`` (an orthonormal ``m_r x d`` frame) the combiner is lifted
    to the ambient space so that its rows lie in the image.
    """
    if method not in ("spread", "iid"):
        raise InvalidArgument(f"unknown method {method!r}")
    if n_q < 1 or d < 1:
        raise InvalidArgument(f"need n_q >= 1 and d >= 1, got n_q={n_q}, d={d}")
    rng = np.random.default_rng(rng)
    target = max_regions_zero_threshold(n_q, d) if zero_threshold else max_regions(n_q, d)
    for _ in range(max_retries):
        if method == "iid":
            normals = rng.standard_normal((n_q, d))
            t = np.zeros(n_q) if zero_threshold else rng.standard_normal(n_q)
        else:
            normals = spread_normals(n_q, d, rng)
            t = np.zeros(n_q)
            if not zero_threshold:
                t0 = rng.standard_normal(n_q)
                if len(enumerate_regions(Arrangement(normals, t0))) != target:
                    continue
                t, _ = fatten_thresholds(normals, t0)
        if basis is None:
            arr = Arrangement(normals, t)
        else:
            arr = Arrangement(normals @ np.asarray(basis).T, t, basis)
        if len(enumerate_regions(arr)) == target:
            return arr
    raise ConstructionFailure(
        f"no arrangement of {n_q} hyperplanes in dimension {d} reached {target} cells "
        f"after {max_retries} draws"
    )


def channel_arrangement(ch, n_q, ell=1, zero_threshold=False, rng=None, max_retries=16,
                        method="spread"):
    """Block arrangement over ``ell`` channel uses: ``ell * n_q`` ADC comparisons
    on the ``ell * rank``-dimensional image of the block channel."""
    basis = ch.block_image(ell)
    return general_position_arrangement(ell * n_q, basis.shape[1], zero_threshold, rng,
                                         max_retries, basis=basis, method=method)


def uniform_ball(n, d, radius, rng):
    rng = np.random.default_rng(rng)
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / d)
    return g * r[:, None]


def sample_region_count(arr, n_samples, radius, rng=None, chunk=200_000):
    """Number of distinct sign vectors hit by uniform samples from a ball.

    A brute-force lower bound on the cell count of ``arr``.
    """
    if n_samples < 1:
        raise InvalidArgument("n_samples must be at least 1")
    rng = np.random.default_rng(rng)
    seen = set()
    left = n_samples
    while left:
        n = min(left, chunk)
        bits = sign_vector(arr, uniform_ball(n, arr.d, radius, rng))
        seen.update(map(bytes, np.unique(bits, axis=0)))
        left -= n
    return len(seen)


def vertex_radius(arr):
    """Norm of the farthest point where ``min(m_q, d)`` hyperplanes meet.

    Enumerates subsets directly, so it serves as an oracle-side way to pick a
    sampling radius that reaches every cell.
    """
    k = min(arr.m_q, arr.d)
    best = 0.0
    for idx in combinations(range(arr.m_q), k):
        a = arr.normals[list(idx)]
        y, *_ = np.linalg.lstsq(a, -arr.t[list(idx)], rcond=None)
        best = max(best, float(np.linalg.norm(y)))
    return best
