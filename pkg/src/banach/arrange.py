"""Sparsity structure of coefficient vectors and subspace experiments.

The combinatorial side: nonzero count, cyclic support length, and a
run-length complexity proxy for the support indicator, combined into the
distortion budget D(a).  The geometric side: how close a gauge restricted
to a subspace is to a multiple of the Euclidean norm, measured for
coordinate subspaces, Haar subspaces, halves of a random basis (Kashin
splits), block decompositions, and the sup-norm refuter that exhibits a
2-sparse witness against near-Euclidean behavior.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._rng import chunk_generator, root_seed, sphere_chunks
from .bodies import Body, HullBody, PNormBody
from .errors import DomainError
from .john import john_transform
from .sphere import _subseed, sample_grassmann, sample_orthogonal

__all__ = [
    "SparsityProfile",
    "SubspaceBasis",
    "DistortionRange",
    "RandomBasisRow",
    "KashinRow",
    "BlockRow",
    "BlockReport",
    "LocHilbertReport",
    "sparsity",
    "cyclic_length",
    "kol_proxy",
    "distortion_budget",
    "coordinate_subspace",
    "haar_subspace",
    "basis_columns_subspace",
    "subspace_distortion",
    "random_basis_experiment",
    "kashin_experiment",
    "block_decomposition",
    "loc_hilbert_check",
    "linfty_refute",
]


# ---------------------------------------------------------------------------
# combinatorial support measures


def _as_vector(a) -> np.ndarray:
    v = np.asarray(a, dtype=float)
    if v.ndim != 1:
        raise DomainError(f"expected a 1-d coefficient vector, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise DomainError("coefficient vector contains non-finite entries")
    return v


def sparsity(a) -> int:
    """Number of exactly nonzero entries (no epsilon thresholding)."""
    return int(np.count_nonzero(_as_vector(a)))


def cyclic_length(a) -> int:
    """Smallest cyclic window length that contains the support.

    Equivalently n minus the largest cyclic run of zeros, found in one
    pass over the sorted support.  Indices are 0-based; the empty
    support has length 0.
    """
    v = _as_vector(a)
    n = v.size
    idx = np.flatnonzero(v)
    if idx.size == 0:
        return 0
    if idx.size == n:
        return n
    gaps = np.diff(idx) - 1
    wrap = idx[0] + n - idx[-1] - 1
    return int(n - max(int(gaps.max(initial=0)), int(wrap)))


def _gamma_bits(k: int) -> int:
    # Elias gamma code length: 2 floor(log2 k) + 1
    return 2 * (int(k).bit_length() - 1) + 1


def kol_proxy(a) -> int:
    """Bit length of the canonical run-length code of the support indicator.

    One leading bit records the first symbol; each maximal run is then
    written as an Elias-gamma code of its length.  This fixed encoder
    stands in for incomputable description length: contiguous supports
    cost O(log n) bits no matter their size.
    """
    v = _as_vector(a)
    if v.size == 0:
        return 0
    flat = (v != 0).astype(np.int8)
    bits = 1
    run = 1
    for i in range(1, flat.size):
        if flat[i] == flat[i - 1]:
            run += 1
        else:
            bits += _gamma_bits(run)
            run = 1
    bits += _gamma_bits(run)
    return bits


@dataclass(frozen=True)
class SparsityProfile:
    """The three sparsity measures of a vector and its distortion budget."""

    n: int
    nnz: int
    cyc: int
    kol_bits: int
    d_terms: tuple
    d_raw: float
    c_prime: float
    D: float


def distortion_budget(a, c_prime: float = 1.0) -> SparsityProfile:
    """Budget D(a) = c' min(sqrt(nnz), window term, complexity term).

    All logs are natural.  The window term uses the cyclic length and
    degenerates to sqrt(log n / log(1+n)) on the empty support; the
    complexity term charges nnz + kol_bits.  Every term depends only on
    the support, so the budget is invariant under nonzero rescaling of
    the entries.
    """
    v = _as_vector(a)
    n = v.size
    if n < 2:
        raise DomainError(f"the budget needs n >= 2, got n={n}")
    if not c_prime > 0:
        raise DomainError(f"c_prime must be positive, got {c_prime}")
    nnz = sparsity(v)
    cyc = cyclic_length(v)
    kol = kol_proxy(v)
    ln = math.log(n)
    t1 = math.sqrt(nnz)
    if cyc == 0:
        t2 = math.sqrt(ln / math.log(1.0 + n))
    else:
        t2 = math.sqrt((cyc + ln) / math.log(1.0 + n / cyc))
    s = nnz + kol
    t3 = math.sqrt((s + ln) / math.log(1.0 + n / s))
    d_raw = min(t1, t2, t3)
    return SparsityProfile(n, nnz, cyc, kol, (t1, t2, t3), d_raw,
                           float(c_prime), float(c_prime) * d_raw)


# ---------------------------------------------------------------------------
# subspace bases


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis of a subspace with a record of where it came from.

    origin is one of "coordinate" (span of coordinate vectors, support
    recorded), "haar" (uniform random subspace, seed recorded), or
    "basis-columns" (columns of a supplied orthogonal matrix, support
    recorded).
    """

    Q: np.ndarray
    origin: str
    support: tuple = None
    seed: int = None

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] < Q.shape[1] or Q.shape[1] < 1:
            raise DomainError(f"Q must be n x k with 1 <= k <= n, got {Q.shape}")
        G = Q.T @ Q
        if float(np.max(np.abs(G - np.eye(Q.shape[1])))) > 1e-12:
            raise DomainError("columns are not orthonormal to 1e-12")
        if self.origin not in ("coordinate", "haar", "basis-columns"):
            raise DomainError(f"unknown origin {self.origin!r}")
        object.__setattr__(self, "Q", Q)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    @property
    def k(self) -> int:
        return self.Q.shape[1]


def _check_support(n: int, support) -> tuple:
    idx = tuple(int(i) for i in support)
    if len(idx) == 0:
        raise DomainError("support must be non-empty")
    if len(set(idx)) != len(idx):
        raise DomainError("support indices must be distinct")
    if min(idx) < 0 or max(idx) >= n:
        raise DomainError(f"support indices must lie in [0, {n})")
    return tuple(sorted(idx))


def coordinate_subspace(n: int, support) -> SubspaceBasis:
    """Span of the coordinate vectors indexed by `support`."""
    idx = _check_support(n, support)
    Q = np.zeros((n, len(idx)))
    Q[list(idx), range(len(idx))] = 1.0
    return SubspaceBasis(Q, "coordinate", support=idx)


def haar_subspace(n: int, k: int, rng) -> SubspaceBasis:
    """Uniformly random k-dimensional subspace with its seed recorded."""
    seed = root_seed(rng)
    return SubspaceBasis(sample_grassmann(n, k, seed), "haar", seed=seed)


def basis_columns_subspace(U, support) -> SubspaceBasis:
    """Span of the selected columns of an orthogonal matrix."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DomainError(f"U must be a square matrix, got {U.shape}")
    idx = _check_support(U.shape[0], support)
    return SubspaceBasis(U[:, list(idx)], "basis-columns", support=idx)


# ---------------------------------------------------------------------------
# range of a gauge over a subspace


@dataclass(frozen=True)
class DistortionRange:
    """Extremes of gauge(Q a)/|a|; each side labeled exact or estimated."""

    lo: float
    hi: float
    lo_exact: bool
    hi_exact: bool

    @property
    def ratio(self) -> float:
        return self.hi / self.lo


def _subgrad_pullback(body: Body, Cols: np.ndarray, A: np.ndarray):
    X = A @ Cols.T
    vals = body.gauge_many(X)
    G = np.empty_like(A)
    for i, row in enumerate(X):
        G[i] = Cols.T @ body.subgradient(row)
    return vals, G


def _range_search(body: Body, Cols: np.ndarray, n_samples: int, restarts: int,
                  seed: int, descent_steps: int = 80):
    """(lo, hi, median) of gauge(Cols a)/|a| by sampling plus local search."""
    k = Cols.shape[1]
    vals_all = np.empty(int(n_samples))
    lo_starts = None
    hi_starts = None
    pos = 0
    for block in sphere_chunks(k, int(n_samples), seed):
        v = body.gauge_many(block @ Cols.T)
        vals_all[pos:pos + len(block)] = v
        take = min(restarts, len(block))
        order = np.argsort(v)
        lo_c, hi_c = block[order[:take]], block[order[-take:]]
        lo_starts = lo_c if lo_starts is None else np.vstack([lo_starts, lo_c])
        hi_starts = hi_c if hi_starts is None else np.vstack([hi_starts, hi_c])
        pos += len(block)
    med = float(np.median(vals_all))
    lo = float(np.min(vals_all))
    hi = float(np.max(vals_all))

    def best_rows(S, low):
        v = body.gauge_many(S @ Cols.T)
        order = np.argsort(v)
        pick = order[:restarts] if low else order[-restarts:]
        return S[pick]

    # ascent: replacing a by the normalized pullback subgradient never
    # decreases the gauge of the image
    A = best_rows(hi_starts, low=False)
    vals, G = _subgrad_pullback(body, Cols, A)
    hi = max(hi, float(np.max(vals)))
    for _ in range(descent_steps):
        ng = np.linalg.norm(G, axis=1)
        live = ng > 0
        if not np.any(live):
            break
        A[live] = G[live] / ng[live, None]
        new_vals, G = _subgrad_pullback(body, Cols, A)
        gain = float(np.max(new_vals - vals))
        vals = new_vals
        hi = max(hi, float(np.max(vals)))
        if gain <= 1e-12 * max(1.0, hi):
            break

    # descent: projected subgradient steps with per-row backtracking
    A = best_rows(lo_starts, low=True)
    vals = body.gauge_many(A @ Cols.T)
    lo = min(lo, float(np.min(vals)))
    for _ in range(descent_steps):
        _, G = _subgrad_pullback(body, Cols, A)
        tang = G - np.sum(G * A, axis=1)[:, None] * A
        nt = np.linalg.norm(tang, axis=1)
        if float(np.max(nt)) <= 1e-12:
            break
        step = np.full(len(A), 0.5)
        improved = False
        for _ in range(12):
            cand = A - (step / np.maximum(nt, 1e-300))[:, None] * tang
            cand /= np.linalg.norm(cand, axis=1)[:, None]
            cv = body.gauge_many(cand @ Cols.T)
            better = cv < vals - 1e-15
            if np.any(better):
                A[better] = cand[better]
                vals[better] = cv[better]
                improved = True
            step[~better] *= 0.5
        lo = min(lo, float(np.min(vals)))
        if not improved:
            break
    return lo, hi, med


def subspace_distortion(body: Body, Q, n_samples: int = 4096, restarts: int = 4,
                        rng=0) -> DistortionRange:
    """Extremes of gauge(Q a) over unit coefficient vectors a.

    Both sides come from sampling plus subgradient search and are lower
    respectively upper biased toward the truth; closed forms replace the
    search where available (both sides for p = 2, the maximum for
    p = inf via the largest weighted row norm of Q).
    """
    Cols = Q.Q if isinstance(Q, SubspaceBasis) else np.asarray(Q, dtype=float)
    if Cols.ndim != 2 or Cols.shape[0] < Cols.shape[1]:
        raise DomainError(f"Q must be n x k with k <= n, got {Cols.shape}")
    if restarts < 1:
        raise DomainError(f"restarts must be at least 1, got {restarts}")
    seed = root_seed(rng)
    if isinstance(body, PNormBody) and body.p == 2.0:
        G = Cols.T @ Cols
        if body.weights is None and \
                float(np.max(np.abs(G - np.eye(Cols.shape[1])))) <= 1e-12:
            return DistortionRange(1.0, 1.0, True, True)
        W = Cols if body.weights is None else body.weights[:, None] * Cols
        sv = np.linalg.svd(W, compute_uv=False)
        return DistortionRange(float(sv[-1]), float(sv[0]), True, True)
    if isinstance(body, PNormBody) and math.isinf(body.p):
        W = Cols if body.weights is None else body.weights[:, None] * Cols
        hi = float(np.max(np.linalg.norm(W, axis=1)))
        lo, _, _ = _range_search(body, Cols, n_samples, restarts, seed)
        return DistortionRange(lo, hi, False, True)
    lo, hi, _ = _range_search(body, Cols, n_samples, restarts, seed)
    return DistortionRange(lo, hi, False, False)


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class RandomBasisRow:
    support: tuple
    lo: float
    hi: float
    ratio: float
    d_raw: float
    t: float
    m_t: float


def random_basis_experiment(body: Body, supports, n_samples: int = 4096,
                            rng=0, restarts: int = 4):
    """Distortion of one random basis restricted to each support.

    Draws a single Haar orthogonal matrix, spans the columns named by
    each support, and reports the gauge extremes next to the support's
    distortion budget and the hull statistic M_t at t = budget.  Rows
    are data; nothing is asserted.
    """
    seed = root_seed(rng)
    n = body.dim
    U = sample_orthogonal(n, _subseed(seed, 0)).matrix
    rows = []
    for i, sup in enumerate(supports):
        sb = basis_columns_subspace(U, sup)
        lo, hi, _ = _range_search(body, sb.Q, n_samples, restarts,
                                  _subseed(seed, 1 + 2 * i))
        ind = np.zeros(n)
        ind[list(sb.support)] = 1.0
        prof = distortion_budget(ind)
        t = prof.d_raw
        if t >= 1.0:
            m_vals = []
            hull = HullBody(body, min(t, math.sqrt(n)))
            for block in sphere_chunks(n, int(n_samples), _subseed(seed, 2 + 2 * i)):
                m_vals.append(hull.gauge_many(block))
            m_t = float(np.median(np.concatenate(m_vals)))
        else:
            m_t = math.nan
        rows.append(RandomBasisRow(sb.support, lo, hi, hi / lo, prof.d_raw,
                                   float(t), m_t))
    return rows


@dataclass(frozen=True)
class KashinRow:
    trial: int
    seed: int
    ratio_first: float
    ratio_second: float

    @property
    def worst(self) -> float:
        return max(self.ratio_first, self.ratio_second)


def kashin_experiment(n: int, trials: int, rng=0, n_samples: int = 4096,
                      restarts: int = 4):
    """Distortion of the scaled ell_1 norm on the two halves of a random basis.

    Each trial draws a Haar orthogonal matrix, splits its columns into
    two n/2-dimensional subspaces, and measures the gauge extremes of
    the John-positioned ell_1 ball on both halves.
    """
    if not isinstance(n, (int, np.integer)) or n < 2 or n % 2:
        raise DomainError(f"n must be a positive even integer, got {n!r}")
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials!r}")
    seed = root_seed(rng)
    body, _ = john_transform(PNormBody(1, int(n)))
    h = n // 2
    rows = []
    for trial in range(int(trials)):
        tseed = _subseed(seed, trial)
        U = sample_orthogonal(int(n), tseed).matrix
        ratios = []
        for half in range(2):
            Cols = U[:, half * h:(half + 1) * h]
            lo, hi, _ = _range_search(body, Cols, n_samples, restarts,
                                      _subseed(tseed, half + 1))
            ratios.append(hi / lo)
        rows.append(KashinRow(trial, tseed, ratios[0], ratios[1]))
    return rows


@dataclass(frozen=True)
class BlockRow:
    index: int
    coords: tuple
    m_sharp: float
    deviation: float
    b: float
    b_scaled: float


@dataclass(frozen=True)
class BlockReport:
    """Restricted medians and Lipschitz bounds across one block split."""

    rows: tuple
    m_sharp: float
    k: int
    n_blocks: int
    eps: float
    seed: int

    @property
    def max_deviation(self) -> float:
        return max(r.deviation for r in self.rows)

    @property
    def max_b_scaled(self) -> float:
        return max(r.b_scaled for r in self.rows)


def paper_block_count(n: int, eps: float) -> int:
    """Block-count schedule floor(n^(1 - eps^2 (log 1/eps)^-2))."""
    if not 0.0 < eps < 0.5:
        raise DomainError(f"eps must lie in (0, 1/2), got {eps}")
    expo = 1.0 - eps * eps / math.log(1.0 / eps) ** 2
    return max(1, int(math.floor(n ** expo)))


def block_decomposition(body: Body, eps: float, rng=0, k: int = None,
                        n_samples: int = 4096, restarts: int = 4,
                        schedule: str = "fixed") -> BlockReport:
    """Split coordinates into blocks, rotate once, and compare restrictions.

    Each block E_i is the span of k consecutive columns of one Haar
    matrix.  The report carries the restricted median deviation
    |M#(E_i) - M#|/M# and the scaled Lipschitz bound b(E_i) sqrt(n/k)
    per block.  schedule="paper" derives the block count from eps
    instead of using the fixed default k = ceil(sqrt(n)).
    """
    if not 0.0 < eps < 0.5:
        raise DomainError(f"eps must lie in (0, 1/2), got {eps}")
    n = body.dim
    if k is None:
        if schedule == "paper":
            k = max(1, n // paper_block_count(n, eps))
        elif schedule == "fixed":
            k = int(math.ceil(math.sqrt(n)))
        else:
            raise DomainError(f"unknown schedule {schedule!r}")
    if not 1 <= k <= n:
        raise DomainError(f"block size must satisfy 1 <= k <= {n}, got {k}")
    seed = root_seed(rng)
    U = sample_orthogonal(n, _subseed(seed, 0)).matrix

    vals = []
    for block in sphere_chunks(n, int(n_samples), _subseed(seed, 1)):
        vals.append(body.gauge_many(block))
    m_sharp = float(np.median(np.concatenate(vals)))

    rows = []
    n_blocks = (n + k - 1) // k
    scale = math.sqrt(n / k)
    for i in range(n_blocks):
        coords = tuple(range(i * k, min((i + 1) * k, n)))
        Cols = U[:, list(coords)]
        lo, hi, med = _range_search(body, Cols, n_samples, restarts,
                                    _subseed(seed, 2 + i))
        rows.append(BlockRow(i, coords, med, abs(med - m_sharp) / m_sharp,
                             hi, hi * scale))
    return BlockReport(tuple(rows), m_sharp, int(k), n_blocks, float(eps), seed)


@dataclass(frozen=True)
class LocHilbertReport:
    """Worst multiplicative violation of [1-eps, 1+eps] over k-supports."""

    violation: float
    witness_support: tuple
    lo: float
    hi: float
    checked: int
    partial: bool
    eps: float
    k: int


def loc_hilbert_check(body: Body, basis, k: int, eps: float,
                      n_samples: int = 512, rng=0, restarts: int = 2,
                      support_cap: int = 100000) -> LocHilbertReport:
    """Near-Euclidean test of a basis on every support of size k.

    For each support S the columns basis[:, S] span a candidate slice;
    the gauge extremes over unit coefficient vectors are compared with
    the band [1-eps, 1+eps].  When C(n,k) exceeds the cap the supports
    are subsampled and the report is flagged partial.
    """
    Bm = np.asarray(basis, dtype=float)
    if Bm.ndim != 2 or Bm.shape[0] != Bm.shape[1]:
        raise DomainError(f"basis must be a square matrix, got {Bm.shape}")
    n = Bm.shape[0]
    if np.linalg.matrix_rank(Bm) < n:
        raise DomainError("basis matrix is singular")
    if not 1 <= k <= n:
        raise DomainError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    seed = root_seed(rng)
    total = math.comb(n, k)
    if total <= support_cap:
        supports = list(itertools.combinations(range(n), k))
        partial = False
    else:
        gen = chunk_generator(seed, 0)
        seen = set()
        while len(seen) < support_cap:
            seen.add(tuple(sorted(gen.choice(n, size=k, replace=False).tolist())))
        supports = sorted(seen)
        partial = True

    worst = -1.0
    best_row = None
    for i, sup in enumerate(supports):
        Cols = Bm[:, list(sup)]
        if k == 1:
            g = body.gauge(Cols[:, 0])
            lo = hi = g
        else:
            lo, hi, _ = _range_search(body, Cols, n_samples, restarts,
                                      _subseed(seed, 1 + i))
        v = max((1.0 - eps) / lo - 1.0 if lo > 0 else math.inf,
                hi / (1.0 + eps) - 1.0, 0.0)
        if v > worst:
            worst = v
            best_row = (tuple(sup), lo, hi)
    return LocHilbertReport(worst, best_row[0], best_row[1], best_row[2],
                            len(supports), partial, float(eps), int(k))


# ---------------------------------------------------------------------------
# sup-norm refuter


_REFUTE_EPS_MAX = (math.sqrt(2.0) - 1.0) ** 4


def _pair_circle_min(tj: np.ndarray, tl: np.ndarray):
    """Exact minimum over the circle of max_i |cos(th) tj_i + sin(th) tl_i|.

    The maximum of finitely many sinusoid magnitudes attains its minimum
    at a crossing of two of them (or at a single curve's trough); all
    candidate angles are enumerated in closed form.
    """
    cand = [0.0, 0.5 * math.pi]
    nfun = tj.size
    for i in range(nfun):
        # trough of curve i
        cand.append(math.atan2(-tj[i], tl[i]))
        for r in range(i + 1, nfun):
            # |A cos + B sin| = |C cos + D sin| at tan(2 th) roots
            for sgn in (1.0, -1.0):
                a = tj[i] - sgn * tj[r]
                b = tl[i] - sgn * tl[r]
                cand.append(math.atan2(-a, b))
    best_v, best_th = math.inf, 0.0
    for th in cand:
        v = float(np.max(np.abs(math.cos(th) * tj + math.sin(th) * tl)))
        if v < best_v:
            best_v, best_th = v, th
    return best_v, best_th


def linfty_refute(T, eps: float) -> np.ndarray:
    """Witness that T is not an eps-isometry into the sup norm.

    Scans the coordinate vectors and the normalized two-coordinate
    combinations; below the threshold (sqrt(2)-1)^4 on eps one of them
    must leave the band [(1-eps)|x|, (1+eps)|x|].  The discrete scan is
    followed, if ever needed, by the exact minimization over each
    two-coordinate circle.  The returned vector is re-verified before
    being handed back.
    """
    Tm = np.asarray(T, dtype=float)
    if Tm.ndim != 2 or Tm.shape[0] != Tm.shape[1]:
        raise DomainError(f"T must be a square matrix, got {Tm.shape}")
    n = Tm.shape[0]
    if n < 2:
        raise DomainError("the refuter needs dimension at least 2")
    eps = float(eps)
    if not 0.0 < eps < _REFUTE_EPS_MAX:
        raise DomainError(
            f"eps must lie in (0, {_REFUTE_EPS_MAX:.6g}); beyond it the witness is not guaranteed")

    def violates(x) -> bool:
        r = float(np.max(np.abs(Tm @ x))) / float(np.linalg.norm(x))
        return r > 1.0 + eps + 1e-15 or r < 1.0 - eps - 1e-15

    for j in range(n):
        x = np.zeros(n)
        x[j] = 1.0
        if violates(x):
            return x
    s = 1.0 / math.sqrt(2.0)
    for j in range(n):
        for l in range(j + 1, n):
            for sgn in (1.0, -1.0):
                x = np.zeros(n)
                x[j] = s
                x[l] = sgn * s
                if violates(x):
                    return x
    # exact per-pair circle minimum as a fallback for borderline inputs
    for j in range(n):
        for l in range(j + 1, n):
            v, th = _pair_circle_min(Tm[:, j], Tm[:, l])
            if v < 1.0 - eps - 1e-15:
                x = np.zeros(n)
                x[j] = math.cos(th)
                x[l] = math.sin(th)
                if violates(x):
                    return x
    raise DomainError("no violating vector found; the matrix defeats the guarantee assumptions")
