"""John position: maximal inscribed ellipsoids and contact certificates.

Every symmetric convex body contains a unique ellipsoid of maximal
volume.  When that ellipsoid is the unit ball the body is said to be in
John position, and it is then sandwiched between B_2 and sqrt(n) B_2.
The touching directions carry nonnegative weights that decompose the
identity matrix; this module computes the positioning transform together
with that certificate.

Positioning is analytic for p-norm balls.  Facet-described polytopes go
through polarity: the maximal ellipsoid inside {x : |<a_j, x>| <= 1} is
the polar of the minimum-volume origin-centered ellipsoid enclosing the
normals a_j, which a Khachiyan-type multiplicative update with away
steps finds to certified optimality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bodies import Body, FacetPolytope, PNormBody, VertexPolytope
from .errors import DegenerateInputError, DomainError, UnsupportedOperationError

__all__ = [
    "Ellipsoid",
    "JohnCertificate",
    "SandwichReport",
    "mvee",
    "john_transform",
    "verify_sandwich",
    "analytic_john_radius",
    "john_scale",
    "sphere_gauge_extremes",
]


class Ellipsoid:
    """Origin-centered ellipsoid {x : x^T A x <= 1} with A symmetric positive definite."""

    def __init__(self, shape):
        A = np.asarray(shape, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DomainError(f"shape matrix must be square, got {A.shape}")
        if not np.all(np.isfinite(A)):
            raise DomainError("shape matrix contains non-finite entries")
        scale = max(1.0, float(np.max(np.abs(A))))
        if float(np.max(np.abs(A - A.T))) > 1e-12 * scale:
            raise DomainError("shape matrix is not symmetric")
        A = 0.5 * (A + A.T)
        try:
            L = np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            raise DomainError("shape matrix is not positive definite") from None
        self.shape = A
        self.dim = A.shape[0]
        self.logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
        self._chol = L

    def gauge(self, x) -> float:
        """sqrt(x^T A x), the Minkowski functional of the ellipsoid."""
        x = np.asarray(x, dtype=float)
        return float(np.sqrt(max(x @ self.shape @ x, 0.0)))

    def contains(self, points, tol: float = 1e-9) -> bool:
        P = np.atleast_2d(np.asarray(points, dtype=float))
        q = np.einsum("ij,jk,ik->i", P, self.shape, P)
        return bool(np.all(q <= 1.0 + tol))

    def __repr__(self):
        return f"<Ellipsoid dim={self.dim} logdet={self.logdet:.6g}>"


@dataclass(frozen=True)
class JohnCertificate:
    """Contact directions of the unit ball with a John-positioned body.

    contacts: (k, n) array of unit vectors lying on both boundaries.
    weights: (k,) nonnegative reals with sum(c_i v_i v_i^T) = identity.
    """

    contacts: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.contacts, dtype=float)
        c = np.asarray(self.weights, dtype=float)
        if V.ndim != 2 or c.ndim != 1 or V.shape[0] != c.shape[0]:
            raise DomainError("contacts must be (k, n) with k matching weights")
        if np.any(c < 0):
            raise DomainError("certificate weights must be nonnegative")
        norms = np.linalg.norm(V, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise DomainError("contact directions must be unit vectors")
        object.__setattr__(self, "contacts", V)
        object.__setattr__(self, "weights", c)

    @property
    def dim(self) -> int:
        return self.contacts.shape[1]

    def identity_matrix_gap(self) -> np.ndarray:
        S = (self.contacts * self.weights[:, None]).T @ self.contacts
        return S - np.eye(self.dim)

    def identity_residual(self) -> float:
        """Frobenius distance of sum(c_i v_i v_i^T) from the identity."""
        return float(np.linalg.norm(self.identity_matrix_gap()))

    def gauge_errors(self, body: Body) -> tuple[float, float]:
        """(max |gauge(v_i) - 1|, max |dual_gauge(v_i) - 1|) over contacts."""
        ge = max(abs(body.gauge(v) - 1.0) for v in self.contacts)
        de = max(abs(body.dual_gauge(v) - 1.0) for v in self.contacts)
        return ge, de


def _leverages(P: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # M = sum u_j p_j p_j^T; returns (Minv, g) with g_j = p_j^T Minv p_j
    M = P.T @ (P * u[:, None])
    Minv = np.linalg.inv(M)
    Minv = 0.5 * (Minv + Minv.T)
    g = np.einsum("ij,jk,ik->i", P, Minv, P)
    return Minv, g


def mvee(points, tol: float = 1e-7):
    """Minimum-volume origin-centered ellipsoid enclosing the given points.

    Works on the symmetrized set {+-p_j}, so listing both signs is
    redundant but harmless.  Returns (Ellipsoid, weights) where weights
    is the optimal design over the input rows; rows with weight above
    tol are the contact candidates.  The multiplicative update takes
    away steps, so convergence is two-sided: no point sticks out past
    (1 + tol) and every supported point reaches the boundary shell.
    """
    P = np.ascontiguousarray(points, dtype=float)
    if P.ndim != 2:
        raise DomainError(f"points must form a 2-d array, got ndim={P.ndim}")
    if not np.all(np.isfinite(P)):
        raise DomainError("points contain non-finite entries")
    m, n = P.shape
    eps = float(tol)
    if not (eps > 0.0):
        raise DomainError(f"tol must be positive, got {tol}")
    if m < n or np.linalg.matrix_rank(P) < n:
        raise DegenerateInputError("point set does not span the space")

    # support shell tolerance; 10x the inflation tolerance keeps contact
    # gauges within 1e-6 at the default setting
    eps2 = 10.0 * eps
    floor = 1e-10
    u = np.full(m, 1.0 / m)
    Minv, g = _leverages(P, u)
    stale = 0
    budget = 1000 * m + 100000
    for _ in range(budget):
        jmax = int(np.argmax(g))
        gmax = float(g[jmax])
        gsup = np.where(u > floor, g, np.inf)
        jmin = int(np.argmin(gsup))
        gmin = float(gsup[jmin])
        if gmax <= n * (1.0 + eps) and gmin >= n * (1.0 - eps2):
            if stale == 0:
                break
            Minv, g = _leverages(P, u)
            stale = 0
            continue
        if gmax - n >= n - gmin:
            j, gj = jmax, gmax
        else:
            j, gj = jmin, gmin
        lam = (gj - n) / (n * (gj - 1.0)) if gj > 1.0 + 1e-12 else -1.0
        if j == jmin:
            # away step, capped at removing the point from the support
            lam = max(lam, -u[j] / (1.0 - u[j]))
        v = Minv @ P[j]
        c = lam / (1.0 - lam)
        denom = 1.0 + c * gj
        w = P @ v
        Minv = (Minv - (c / denom) * np.outer(v, v)) / (1.0 - lam)
        g = (g - (c / denom) * w * w) / (1.0 - lam)
        u *= 1.0 - lam
        u[j] = max(u[j] + lam, 0.0)
        stale += 1
        if stale >= 4096:
            Minv, g = _leverages(P, u)
            stale = 0
    else:
        raise DomainError("enclosing-ellipsoid iteration did not converge")

    u[u <= floor] = 0.0
    u /= np.sum(u)
    M = P.T @ (P * u[:, None])
    A = np.linalg.inv(M) / n
    return Ellipsoid(0.5 * (A + A.T)), u


def analytic_john_radius(p, n: int) -> float:
    """Closed-form inner radius reported for the ell_p families.

    Piecewise by family: 1 for p = inf, n^(1/p - 1/2) for finite p >= 2
    (the gauge at the main diagonal), and n^(1/2 - 1/p) for p <= 2 (the
    inscribed-ball radius).  The two regimes agree at p = 2.
    """
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise DomainError(f"p must satisfy p >= 1, got {p}")
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    if math.isinf(p):
        return 1.0
    if p >= 2.0:
        return float(n) ** (1.0 / p - 0.5)
    return float(n) ** (0.5 - 1.0 / p)


def john_scale(p, n: int) -> float:
    """Gauge weight w such that {x : w * ||x||_p <= 1} is in John position.

    Equals min(1, n^(1/2 - 1/p)): the ball shrinks for p < 2 and is
    already positioned for p >= 2.
    """
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise DomainError(f"p must satisfy p >= 1, got {p}")
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    invp = 0.0 if math.isinf(p) else 1.0 / p
    return min(1.0, float(n) ** (0.5 - invp))


def sphere_gauge_extremes(p, n: int) -> tuple[float, float]:
    """Range of the John-positioned ell_p gauge over the unit sphere.

    The maximum is 1 (attained at contacts); the minimum sits at the
    coordinate axes for p <= 2 and at the main diagonal for p >= 2.
    """
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise DomainError(f"p must satisfy p >= 1, got {p}")
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    invp = 0.0 if math.isinf(p) else 1.0 / p
    if p <= 2.0:
        lo = float(n) ** (0.5 - invp)
    else:
        lo = float(n) ** (invp - 0.5)
    return lo, 1.0


def _sign_contact_family(n: int) -> np.ndarray:
    # orthogonal rows of +-1 entries, Sylvester doubling
    if n < 1 or n & (n - 1):
        raise UnsupportedOperationError(
            "sign-vector contact family needs the dimension to be a power of two"
        )
    from scipy.linalg import hadamard

    return hadamard(n).astype(float)


def _pnorm_certificate(p: float, n: int) -> JohnCertificate:
    if p >= 2.0 or math.isinf(p):
        V = np.vstack([np.eye(n), -np.eye(n)])
    else:
        H = _sign_contact_family(n) / math.sqrt(n)
        V = np.vstack([H, -H])
    return JohnCertificate(V, np.full(2 * n, 0.5))


def john_transform(body: Body, tol: float = 1e-7):
    """Map a body to John position; returns (positioned body, certificate).

    p-norm balls are rescaled in closed form and keep their kind.  Facet
    polytopes get the symmetric linear change of variables T = (n M)^(1/2)
    where M is the optimal design moment matrix of the facet normals; the
    transformed facets whose design weight exceeds tol are the contacts.
    Vertex-described polytopes are not handled directly: position the
    facet body with the same matrix (its polar) and dualize the result.
    """
    if isinstance(body, PNormBody):
        w = john_scale(body.p, body.dim)
        weights = None if w == 1.0 else np.full(body.dim, w)
        positioned = PNormBody(body.p, body.dim, weights=weights)
        return positioned, _pnorm_certificate(body.p, body.dim)

    if isinstance(body, FacetPolytope):
        A = body.facets
        n = body.dim
        _, u = mvee(A, tol=tol)
        M = A.T @ (A * u[:, None])
        evals, Q = np.linalg.eigh(n * M)
        if np.min(evals) <= 0:
            raise DegenerateInputError("design moment matrix is not positive definite")
        Tinv = (Q / np.sqrt(evals)) @ Q.T
        B = A @ Tinv
        positioned = FacetPolytope(B)
        keep = u > tol
        Bk = B[keep]
        norms = np.linalg.norm(Bk, axis=1)
        contacts = Bk / norms[:, None]
        # weights n u_j |b_j|^2 make the identity decomposition exact even
        # though |b_j| is only 1 up to the solver shell tolerance
        cweights = n * u[keep] * norms**2
        return positioned, JohnCertificate(contacts, cweights)

    if isinstance(body, VertexPolytope):
        raise UnsupportedOperationError(
            "vertex-described polytope: position FacetPolytope(vertices) and dualize"
        )
    raise UnsupportedOperationError(f"john_transform does not handle kind {body.kind!r}")


@dataclass(frozen=True)
class SandwichReport:
    """Sampled check of B_2 <= K <= sqrt(n) B_2 for a positioned body."""

    n_samples: int
    dim: int
    min_gauge: float
    max_gauge: float
    inner_violations: int
    outer_violations: int
    tol: float

    @property
    def ok(self) -> bool:
        return self.inner_violations == 0 and self.outer_violations == 0


def verify_sandwich(body: Body, samples: int = 10000, seed: int = 0) -> SandwichReport:
    """Sample directions and test the John sandwich on each.

    Inner containment requires gauge <= 1 and outer containment
    gauge >= n^(-1/2), both with slack tol = 1e-9.  Violations are
    counted, not raised.
    """
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")
    tol = 1e-9
    n = body.dim
    lo_bound = 1.0 / math.sqrt(n)
    rng = np.random.default_rng(seed)
    inner = outer = 0
    gmin, gmax = math.inf, -math.inf
    left = samples
    while left > 0:
        k = min(left, 8192)
        left -= k
        X = rng.standard_normal((k, n))
        X /= np.linalg.norm(X, axis=1)[:, None]
        vals = body.gauge_many(X)
        inner += int(np.sum(vals > 1.0 + tol))
        outer += int(np.sum(vals < lo_bound - tol))
        gmin = min(gmin, float(np.min(vals)))
        gmax = max(gmax, float(np.max(vals)))
    return SandwichReport(samples, n, gmin, gmax, inner, outer, tol)
