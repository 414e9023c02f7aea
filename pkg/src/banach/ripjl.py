"""Gaussian sketches: restricted isometries and sparse JL embeddings.

A single Gaussian matrix scaled by 1/sqrt(m) acts as an approximate
isometry on all k-sparse vectors at once.  The classical check works in
Euclidean coordinates with exact singular values per support; the
generalized check replaces both sides by arbitrary gauges with supplied
bases; the JL map embeds a finite set of sparse vectors with the norm
of the ambient space in the denominator.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._rng import chunk_generator, root_seed, sphere_chunks
from .bodies import Body, PNormBody
from .errors import DegenerateInputError, DomainError
from .sphere import _subseed, sample_orthogonal

__all__ = [
    "SketchOperator",
    "RipReport",
    "JlReport",
    "HilbertianBasis",
    "CotypeGapReport",
    "gaussian_sketch",
    "gaussian_rip",
    "general_rip",
    "hilbertian_basis",
    "jl_sparse",
    "cotype_gap_check",
]


@dataclass(frozen=True)
class SketchOperator:
    """m x n matrix with i.i.d. standard normal entries, applied as G/sqrt(m)."""

    G: np.ndarray
    seed: int

    @property
    def m(self) -> int:
        return self.G.shape[0]

    @property
    def n(self) -> int:
        return self.G.shape[1]

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(self.m)

    def apply(self, x) -> np.ndarray:
        return self.scale * (self.G @ np.asarray(x, dtype=float))


def gaussian_sketch(n: int, m: int, rng=0) -> SketchOperator:
    """Draw the m x n sketch; entries are reproducible from the seed."""
    if n < 1 or m < 1:
        raise DomainError(f"sketch needs m, n >= 1, got m={m} n={n}")
    seed = root_seed(rng)
    G = chunk_generator(seed, 0).standard_normal((int(m), int(n)))
    return SketchOperator(G, seed)


@dataclass(frozen=True)
class RipReport:
    """Extreme sketch-to-input norm ratios over supports of size k."""

    k: int
    eps: float
    tested_supports: int
    worst_lo: float
    worst_hi: float
    partial: bool
    reason: str = ""

    @property
    def passed(self) -> bool:
        # band inclusion by construction: [worst_lo, worst_hi] inside [1-eps, 1+eps]
        return self.worst_lo >= 1.0 - self.eps and self.worst_hi <= 1.0 + self.eps


def _support_list(n: int, k: int, cap: int, seed: int):
    total = math.comb(n, k)
    if total <= cap:
        return list(itertools.combinations(range(n), k)), False
    gen = chunk_generator(seed, 0)
    seen = set()
    while len(seen) < cap:
        seen.add(tuple(sorted(gen.choice(n, size=k, replace=False).tolist())))
    return sorted(seen), True


def _exact_rip(op: SketchOperator, k: int, eps: float, support_cap: int):
    supports, partial = _support_list(op.n, k, support_cap, _subseed(op.seed, 1))
    lo, hi = math.inf, 0.0
    for sup in supports:
        sv = np.linalg.svd(op.scale * op.G[:, list(sup)], compute_uv=False)
        lo = min(lo, float(sv[-1]))
        hi = max(hi, float(sv[0]))
    reason = ""
    if k > op.m:
        lo = 0.0
        reason = "rank deficient"
    return RipReport(int(k), float(eps), len(supports), lo, hi, partial, reason)


def gaussian_rip(n: int, m: int, k: int, eps: float, rng=0,
                 support_cap: int = 2000) -> RipReport:
    """Euclidean restricted isometry of G/sqrt(m) via exact singular values.

    Every coordinate support of size k is tested (or a deterministic
    sample of support_cap of them, flagged partial); the extreme
    singular values of the scaled m x k submatrices are the worst
    ratios.  k > m can never pass: the submatrices are rank deficient.
    """
    if not 1 <= k <= n:
        raise DomainError(f"k must satisfy 1 <= k <= n, got k={k} n={n}")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    return _exact_rip(gaussian_sketch(n, m, rng), k, eps, support_cap)


def _is_euclidean(body: Body) -> bool:
    return isinstance(body, PNormBody) and body.p == 2.0 and body.weights is None


def _orthonormal(B: np.ndarray) -> bool:
    if B.shape[0] != B.shape[1]:
        return False
    return float(np.max(np.abs(B.T @ B - np.eye(B.shape[1])))) <= 1e-12


def _ratio_extremes(body_num: Body, W: np.ndarray, body_den: Body, V: np.ndarray,
                    n_samples: int, restarts: int, seed: int, steps: int = 60):
    """Extremes of gauge_num(W a)/gauge_den(V a) over the coefficient sphere."""
    k = W.shape[1]
    lo, hi = math.inf, 0.0
    lo_starts = hi_starts = None
    for block in sphere_chunks(k, int(n_samples), seed):
        r = body_num.gauge_many(block @ W.T) / body_den.gauge_many(block @ V.T)
        order = np.argsort(r)
        lo = min(lo, float(r[order[0]]))
        hi = max(hi, float(r[order[-1]]))
        take = min(restarts, len(block))
        lo_c, hi_c = block[order[:take]], block[order[-take:]]
        lo_starts = lo_c if lo_starts is None else np.vstack([lo_starts, lo_c])
        hi_starts = hi_c if hi_starts is None else np.vstack([hi_starts, hi_c])

    def ratio_rows(A):
        return body_num.gauge_many(A @ W.T) / body_den.gauge_many(A @ V.T)

    def grad_log(a):
        num = body_num.gauge(W @ a)
        den = body_den.gauge(V @ a)
        gn = W.T @ body_num.subgradient(W @ a)
        gd = V.T @ body_den.subgradient(V @ a)
        return gn / num - gd / den

    for sign, starts in ((1.0, hi_starts), (-1.0, lo_starts)):
        vals = ratio_rows(starts)
        pick = np.argsort(sign * vals)[-restarts:]
        A = starts[pick]
        vals = ratio_rows(A)
        for _ in range(steps):
            moved = False
            for i in range(len(A)):
                g = sign * grad_log(A[i])
                t = g - float(g @ A[i]) * A[i]
                nt = float(np.linalg.norm(t))
                if nt <= 1e-13:
                    continue
                step = 0.5
                for _ in range(12):
                    cand = A[i] + (step / nt) * t
                    cand /= np.linalg.norm(cand)
                    cv = float(ratio_rows(cand[None, :])[0])
                    if sign * cv > sign * vals[i] + 1e-15:
                        A[i], vals[i] = cand, cv
                        moved = True
                        break
                    step *= 0.5
            hi = max(hi, float(np.max(vals)))
            lo = min(lo, float(np.min(vals)))
            if not moved:
                break
    return lo, hi


def general_rip(body_x: Body, basis_x, body_y: Body, basis_y, k: int,
                eps: float, rng=0, n_samples: int = 1000, restarts: int = 20,
                support_cap: int = 2000) -> RipReport:
    """Restricted isometry between two gauges through supplied bases.

    For coefficient vectors a supported on k coordinates the ratio
    gauge_Y((1/sqrt(m)) F G a) / gauge_X(E a) is sampled over each
    support's unit sphere and refined by local search; extremes over
    supports make the report.  When both gauges are Euclidean and both
    bases orthonormal the ratios are singular values and the result
    matches the coordinate check bit for bit on a shared seed.
    """
    E = np.asarray(basis_x, dtype=float)
    F = np.asarray(basis_y, dtype=float)
    if E.ndim != 2 or E.shape[0] != body_x.dim:
        raise DomainError(
            f"X basis must have {body_x.dim} rows, got {E.shape}")
    if F.ndim != 2 or F.shape[0] != body_y.dim:
        raise DomainError(
            f"Y basis must have {body_y.dim} rows, got {F.shape}")
    n, m = E.shape[1], F.shape[1]
    if not 1 <= k <= min(m, n):
        raise DomainError(f"k must satisfy 1 <= k <= min(m, n)={min(m, n)}, got {k}")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    op = gaussian_sketch(n, m, rng)
    if _is_euclidean(body_x) and _is_euclidean(body_y) \
            and _orthonormal(E) and _orthonormal(F):
        return _exact_rip(op, k, eps, support_cap)
    supports, partial = _support_list(n, k, support_cap, _subseed(op.seed, 1))
    S = op.scale * (F @ op.G)
    lo, hi = math.inf, 0.0
    for i, sup in enumerate(supports):
        cols = list(sup)
        slo, shi = _ratio_extremes(body_y, S[:, cols], body_x, E[:, cols],
                                   n_samples, restarts, _subseed(op.seed, 2 + i))
        lo = min(lo, slo)
        hi = max(hi, shi)
    return RipReport(int(k), float(eps), len(supports), lo, hi, partial)


@dataclass(frozen=True)
class HilbertianBasis:
    """Rescaled random orthogonal basis with its sparse-isometry quality.

    The matrix is U/scale with scale the median gauge over sampled
    k-sparse slices, so that gauge(matrix @ a) is near |a| for k-sparse
    coefficients; lo/hi record the observed extremes of that ratio.
    """

    matrix: np.ndarray
    scale: float
    lo: float
    hi: float
    k: int
    seed: int


def hilbertian_basis(body: Body, k: int, rng=0, n_samples: int = 2048,
                     support_cap: int = 64, restarts: int = 4) -> HilbertianBasis:
    """Near-isometric basis for k-sparse coefficients in the given gauge."""
    from .arrange import _range_search

    n = body.dim
    if not 1 <= k <= n:
        raise DomainError(f"k must satisfy 1 <= k <= {n}, got {k}")
    seed = root_seed(rng)
    U = sample_orthogonal(n, _subseed(seed, 0)).matrix
    supports, _ = _support_list(n, k, support_cap, _subseed(seed, 1))
    meds, los, his = [], [], []
    for i, sup in enumerate(supports):
        lo, hi, med = _range_search(body, U[:, list(sup)], n_samples, restarts,
                                    _subseed(seed, 2 + i))
        meds.append(med)
        los.append(lo)
        his.append(hi)
    scale = float(np.median(meds))
    return HilbertianBasis(U / scale, scale, min(los) / scale, max(his) / scale,
                           int(k), seed)


@dataclass(frozen=True)
class JlReport:
    """Dimension and worst pairwise distance error of one JL draw."""

    m: int
    max_err: float
    pairs: int
    eps: float
    C: float
    seed: int


def jl_sparse(body: Body, basis, omega, eps: float, rng=0, C: float = 8.0,
              k: int = None) -> JlReport:
    """Embed a finite set of sparse vectors into m Euclidean dimensions.

    Members of omega are coefficient vectors in the given basis; the
    point set lives at x = basis @ a and distances are measured in the
    body's gauge.  The map sends x to (1/sqrt(m)) G a with
    m = ceil(C eps^-2 ln|omega|); the report carries the worst
    | |Tx - Ty| / gauge(x - y) - 1 | over distinct pairs.  Differences
    of k-sparse vectors are 2k-sparse, which is what the dimension
    bound trades on.
    """
    E = np.asarray(basis, dtype=float)
    if E.ndim != 2 or E.shape[0] != body.dim:
        raise DomainError(f"basis must have {body.dim} rows, got {E.shape}")
    n = E.shape[1]
    A = np.asarray(omega, dtype=float)
    if A.ndim != 2 or A.shape[1] != n:
        raise DomainError(
            f"omega must be a list of length-{n} coefficient vectors, got {A.shape}")
    if len(A) < 2:
        raise DomainError(f"omega needs at least 2 members, got {len(A)}")
    if k is not None:
        nnz = np.count_nonzero(A, axis=1)
        if int(nnz.max()) > k:
            raise DomainError(
                f"omega member {int(np.argmax(nnz))} has {int(nnz.max())} nonzeros, not {k}-sparse")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if not C > 0:
        raise DomainError(f"C must be positive, got {C}")
    m = int(math.ceil(C * eps ** (-2) * math.log(len(A))))
    op = gaussian_sketch(n, m, rng)
    sketched = (op.scale * (op.G @ A.T)).T
    points = (E @ A.T).T
    max_err = -1.0
    pairs = 0
    for i in range(len(A)):
        d_coef = A[i] - A[i + 1:]
        live = np.any(d_coef != 0.0, axis=1)
        if not np.any(live):
            continue
        num = np.linalg.norm(sketched[i] - sketched[i + 1:][live], axis=1)
        den = body.gauge_many(points[i] - points[i + 1:][live])
        if float(np.min(den)) <= 0.0:
            raise DomainError("basis collapses a pair of distinct members")
        max_err = max(max_err, float(np.max(np.abs(num / den - 1.0))))
        pairs += int(np.count_nonzero(live))
    if pairs == 0:
        raise DegenerateInputError("all members of omega coincide; no distances to embed")
    return JlReport(m, max_err, pairs, float(eps), float(C), op.seed)


@dataclass(frozen=True)
class CotypeGapReport:
    """Spherical mean of a gauge against the cotype-q lower bound."""

    m_estimate: float
    bound: float
    fitted_c: float
    stderr: float
    q: float
    beta: float
    n_samples: int
    seed: int


def cotype_gap_check(body: Body, q: float, beta: float, n_samples: int = 10000,
                     rng=0) -> CotypeGapReport:
    """Ratio of the mean gauge on the sphere to beta n^(1/q - 1/2).

    The body is expected in John position.  Nothing is asserted beyond
    positivity; the fitted constant is the point of the report.
    """
    if not q >= 2:
        raise DomainError(f"q must be at least 2, got {q}")
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    if n_samples < 100:
        raise DomainError(f"n_samples must be at least 100, got {n_samples}")
    seed = root_seed(rng)
    n = body.dim
    total = 0.0
    total_sq = 0.0
    for block in sphere_chunks(n, int(n_samples), seed):
        v = body.gauge_many(block)
        total += float(np.sum(v))
        total_sq += float(np.sum(v * v))
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    stderr = math.sqrt(var / n_samples)
    bound = beta * n ** (1.0 / q - 0.5)
    return CotypeGapReport(mean, bound, mean / bound, stderr, float(q),
                           float(beta), int(n_samples), seed)
