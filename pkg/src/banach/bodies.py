"""Symmetric convex bodies and their gauges.

A body here is an origin-symmetric convex set with nonempty interior,
identified with the norm it induces.  Six constructions cover everything
downstream: weighted p-norm balls, polytopes by facets or by vertices,
invertible linear images, hulls with a Euclidean ball, and intersections
with a Euclidean ball.  Every body evaluates its gauge (Minkowski
functional) and dual gauge; where a closed form exists it is used, and
otherwise the evaluation is an LP or a small projection problem.

gauge() returns the value together with a dual certificate y, a vector
with <x, y> = gauge(x) and dual_gauge(y) <= 1, which is simultaneously a
subgradient of the gauge at x.  Certificates make most identities in the
test suite checkable without re-deriving anything: the pairing equality
is the whole proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import hullcalc
from .errors import (
    DomainError,
    InvalidBodyError,
    UnsupportedOperationError,
)

__all__ = [
    "Body",
    "PNormBody",
    "FacetPolytope",
    "VertexPolytope",
    "LinearImage",
    "HullBody",
    "BallIntersection",
    "GaugeValue",
    "gauge",
    "dual_gauge",
    "gauge_many",
    "euclid_project",
    "hull_gauge",
    "body_from_spec",
    "body_to_spec",
]


@dataclass(frozen=True)
class GaugeValue:
    """Gauge value plus a dual certificate.

    certificate y satisfies <x, y> = value and dual_gauge(y) <= 1, so it
    witnesses the value from below; it is also a subgradient at x.
    """

    value: float
    certificate: np.ndarray


def _check_point(x, dim, name="x"):
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise DomainError(f"{name} must have shape ({dim},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} contains non-finite entries")
    return x


def _check_batch(X, dim):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != dim:
        raise DomainError(f"batch must have shape (*, {dim}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError("batch contains non-finite entries")
    return X


class Body:
    """Base class: an origin-symmetric convex body in R^n."""

    kind = "abstract"
    dim: int

    def gauge(self, x) -> float:
        raise NotImplementedError

    def gauge_many(self, X) -> np.ndarray:
        X = _check_batch(X, self.dim)
        return np.array([self.gauge(row) for row in X])

    def dual_gauge(self, y) -> float:
        raise NotImplementedError

    def subgradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} dim={self.dim}>"


class PNormBody(Body):
    """Unit ball of x -> ||w * x||_p with optional positive weights."""

    kind = "pnorm"

    def __init__(self, p, dim, weights=None):
        p = float(p)
        if math.isnan(p) or p < 1.0:
            raise DomainError(f"p must satisfy p >= 1, got {p}")
        if not isinstance(dim, (int, np.integer)) or dim < 1:
            raise InvalidBodyError(f"dim must be a positive integer, got {dim!r}")
        self.p = p
        self.dim = int(dim)
        if weights is None:
            self.weights = None
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != (self.dim,):
                raise InvalidBodyError(f"weights must have shape ({self.dim},), got {w.shape}")
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise InvalidBodyError("weights must be finite and strictly positive")
            self.weights = w

    @property
    def q(self) -> float:
        """Conjugate exponent."""
        if self.p == 1.0:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    def _uniform_weight(self) -> Optional[float]:
        if self.weights is None:
            return 1.0
        w0 = float(self.weights[0])
        if np.all(self.weights == w0):
            return w0
        return None

    def gauge(self, x) -> float:
        x = _check_point(x, self.dim)
        z = np.abs(x) if self.weights is None else self.weights * np.abs(x)
        if math.isinf(self.p):
            return float(np.max(z))
        if self.p == 1.0:
            return float(np.sum(z))
        if self.p == 2.0:
            return float(np.linalg.norm(z))
        m = float(np.max(z))
        if m == 0.0:
            return 0.0
        return m * float(np.sum((z / m) ** self.p)) ** (1.0 / self.p)

    def gauge_many(self, X) -> np.ndarray:
        X = _check_batch(X, self.dim)
        Z = np.abs(X) if self.weights is None else np.abs(X) * self.weights
        if math.isinf(self.p):
            return np.max(Z, axis=1)
        if self.p == 1.0:
            return np.sum(Z, axis=1)
        if self.p == 2.0:
            return np.linalg.norm(Z, axis=1)
        return np.sum(Z**self.p, axis=1) ** (1.0 / self.p)

    def dual_gauge(self, y) -> float:
        y = _check_point(y, self.dim, "y")
        z = np.abs(y) if self.weights is None else np.abs(y) / self.weights
        q = self.q
        if math.isinf(q):
            return float(np.max(z))
        if q == 1.0:
            return float(np.sum(z))
        m = float(np.max(z))
        if m == 0.0:
            return 0.0
        return m * float(np.sum((z / m) ** q)) ** (1.0 / q)

    def dual_gauge_many(self, Y) -> np.ndarray:
        Y = _check_batch(Y, self.dim)
        Z = np.abs(Y) if self.weights is None else np.abs(Y) / self.weights
        q = self.q
        if math.isinf(q):
            return np.max(Z, axis=1)
        if q == 1.0:
            return np.sum(Z, axis=1)
        return np.sum(Z**q, axis=1) ** (1.0 / q)

    def subgradient(self, x) -> np.ndarray:
        x = _check_point(x, self.dim)
        w = self.weights if self.weights is not None else np.ones(self.dim)
        z = w * np.abs(x)
        g = self.gauge(x)
        if g == 0.0:
            return np.zeros(self.dim)
        if self.p == 1.0:
            return w * np.sign(x)
        if math.isinf(self.p):
            # least-norm element of the subdifferential over the tied maxima
            ties = z >= g - 1e-12 * max(g, 1.0)
            lam = np.where(ties, 1.0 / w**2, 0.0)
            lam /= np.sum(lam)
            return lam * w * np.sign(x)
        return w * np.sign(x) * (z / g) ** (self.p - 1.0)

    def polar(self) -> "PNormBody":
        w = None if self.weights is None else 1.0 / self.weights
        return PNormBody(self.q, self.dim, weights=w)

    def to_spec(self) -> dict:
        out = {"kind": "pnorm", "p": "inf" if math.isinf(self.p) else self.p, "dim": self.dim}
        if self.weights is not None:
            out["weights"] = [float(v) for v in self.weights]
        return out


class FacetPolytope(Body):
    """Polytope {x : |<a_j, x>| <= 1} given by facet normals a_j."""

    kind = "polytope"

    def __init__(self, facets):
        A = np.asarray(facets, dtype=float)
        if A.ndim != 2:
            raise InvalidBodyError(f"facets must be a 2-d array, got ndim={A.ndim}")
        if not np.all(np.isfinite(A)):
            raise InvalidBodyError("facet normals contain non-finite entries")
        m, n = A.shape
        if m < n or np.linalg.matrix_rank(A) < n:
            raise InvalidBodyError("facet normals do not span the space, body is unbounded")
        self.facets = A
        self.dim = n
        self._gram_cache: Optional[np.ndarray] = None

    @property
    def _gram(self) -> np.ndarray:
        if self._gram_cache is None:
            self._gram_cache = self.facets @ self.facets.T
        return self._gram_cache

    def gauge(self, x) -> float:
        x = _check_point(x, self.dim)
        return float(np.max(np.abs(self.facets @ x)))

    def gauge_many(self, X) -> np.ndarray:
        X = _check_batch(X, self.dim)
        return np.max(np.abs(X @ self.facets.T), axis=1)

    def subgradient(self, x) -> np.ndarray:
        x = _check_point(x, self.dim)
        q = self.facets @ x
        j = int(np.argmax(np.abs(q)))
        if q[j] == 0.0:
            return np.zeros(self.dim)
        return math.copysign(1.0, q[j]) * self.facets[j]

    def dual_gauge(self, y) -> float:
        # support function over the polytope, a bounded LP
        from scipy.optimize import linprog

        y = _check_point(y, self.dim, "y")
        if not np.any(y):
            return 0.0
        A = self.facets
        res = linprog(
            -y,
            A_ub=np.vstack([A, -A]),
            b_ub=np.ones(2 * A.shape[0]),
            bounds=(None, None),
            method="highs",
        )
        if not res.success:
            raise DomainError(f"support LP failed: {res.message}")
        return float(-res.fun)

    def to_spec(self) -> dict:
        return {"kind": "polytope", "facets": [[float(v) for v in row] for row in self.facets]}


class VertexPolytope(Body):
    """Polytope conv{+-v_j} given by vertices; gauge is a small LP."""

    kind = "polytope"

    def __init__(self, vertices):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2:
            raise InvalidBodyError(f"vertices must be a 2-d array, got ndim={V.ndim}")
        if not np.all(np.isfinite(V)):
            raise InvalidBodyError("vertices contain non-finite entries")
        m, n = V.shape
        if m < n or np.linalg.matrix_rank(V) < n:
            raise InvalidBodyError("vertices do not span the space, body has empty interior")
        self.vertices = V
        self.dim = n

    def gauge(self, x) -> float:
        # min sum |c| subject to V^T c = x, split into c = c+ - c-
        from scipy.optimize import linprog

        x = _check_point(x, self.dim)
        if not np.any(x):
            return 0.0
        m = self.vertices.shape[0]
        res = linprog(
            np.ones(2 * m),
            A_eq=np.hstack([self.vertices.T, -self.vertices.T]),
            b_eq=x,
            bounds=(0, None),
            method="highs",
        )
        if not res.success:
            raise DomainError(f"gauge LP failed: {res.message}")
        return float(res.fun)

    def dual_gauge(self, y) -> float:
        y = _check_point(y, self.dim, "y")
        return float(np.max(np.abs(self.vertices @ y)))

    def subgradient(self, x) -> np.ndarray:
        # maximizer of <x, y> over the polar, itself a facet-type LP
        from scipy.optimize import linprog

        x = _check_point(x, self.dim)
        if not np.any(x):
            return np.zeros(self.dim)
        V = self.vertices
        res = linprog(
            -x,
            A_ub=np.vstack([V, -V]),
            b_ub=np.ones(2 * V.shape[0]),
            bounds=(None, None),
            method="highs",
        )
        if not res.success:
            raise DomainError(f"subgradient LP failed: {res.message}")
        return np.asarray(res.x, dtype=float)

    def to_spec(self) -> dict:
        return {"kind": "polytope", "vertices": [[float(v) for v in row] for row in self.vertices]}


class LinearImage(Body):
    """Image T(K) of an inner body under an invertible linear map."""

    kind = "linear_image"

    def __init__(self, matrix, inner: Body):
        T = np.asarray(matrix, dtype=float)
        if T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise InvalidBodyError(f"matrix must be square, got shape {T.shape}")
        if not np.all(np.isfinite(T)):
            raise InvalidBodyError("matrix contains non-finite entries")
        if not isinstance(inner, Body):
            raise InvalidBodyError("inner must be a body")
        if T.shape[0] != inner.dim:
            raise InvalidBodyError(f"matrix is {T.shape[0]}x{T.shape[0]} but inner body has dim {inner.dim}")
        sv = np.linalg.svd(T, compute_uv=False)
        if sv[-1] <= 1e-13 * max(sv[0], 1.0):
            raise InvalidBodyError("matrix is singular or numerically singular")
        self.matrix = T
        self.inner = inner
        self.dim = inner.dim
        self._inv = np.linalg.inv(T)

    def gauge(self, x) -> float:
        x = _check_point(x, self.dim)
        return self.inner.gauge(self._inv @ x)

    def gauge_many(self, X) -> np.ndarray:
        X = _check_batch(X, self.dim)
        return self.inner.gauge_many(X @ self._inv.T)

    def dual_gauge(self, y) -> float:
        y = _check_point(y, self.dim, "y")
        return self.inner.dual_gauge(self.matrix.T @ y)

    def subgradient(self, x) -> np.ndarray:
        x = _check_point(x, self.dim)
        return self._inv.T @ self.inner.subgradient(self._inv @ x)

    def to_spec(self) -> dict:
        return {
            "kind": "linear_image",
            "matrix": [[float(v) for v in row] for row in self.matrix],
            "inner": self.inner.to_spec(),
        }


def _hull_project_fn(inner: Body):
    """Projection x, s -> argmin over s*K of |x - u| for supported inners."""
    if isinstance(inner, PNormBody):
        return lambda x, s: _pnorm_project(inner, x, s)
    if isinstance(inner, FacetPolytope):
        return lambda x, s: hullcalc.project_facets(inner.facets, x, s, inner._gram)[0]
    raise UnsupportedOperationError(
        f"hull gauge needs a projectable inner body (pnorm or facet polytope), got {type(inner).__name__}"
    )


def _pnorm_project(body: PNormBody, x, s):
    w = body.weights
    p = body.p
    if math.isinf(p):
        return hullcalc.project_pinf(x, w, s)
    if p == 1.0:
        return hullcalc.project_p1(x, w, s)
    if p == 2.0:
        if w is None:
            return hullcalc.project_p2(x, 1.0, s)
        u0 = body._uniform_weight()
        if u0 is not None:
            return hullcalc.project_p2(x, u0, s)
        return hullcalc.project_p2_weighted(x, w, s)
    return hullcalc.project_pgen(x, p, w, s)


def _pnorm_hull_dispatch(inner: PNormBody, t: float, X: np.ndarray, want_arg: bool):
    p, wts = inner.p, inner.weights
    if math.isinf(p):
        return hullcalc.hull_batch_pinf(X, wts, t, want_arg=want_arg)
    if p == 1.0:
        return hullcalc.hull_batch_p1(X, wts, t, want_arg=want_arg)
    u0 = inner._uniform_weight()
    if p == 2.0 and u0 is not None:
        return hullcalc.hull_batch_p2(X, u0, t, want_arg=want_arg)
    if u0 is not None:
        return hullcalc.hull_batch_pgen(X, p, u0, t, want_arg=want_arg)
    return None


def _hull_value(inner: Body, t: float, x: np.ndarray, tol=1e-9):
    """Internal hull gauge for any t > 0; returns (value, u_star)."""
    x = np.asarray(x, dtype=float)
    if isinstance(inner, PNormBody):
        res = _pnorm_hull_dispatch(inner, t, x[None, :], want_arg=True)
        if res is not None:
            vals, U = res
            return float(vals[0]), U[0]
    if isinstance(inner, FacetPolytope):
        from . import _polyqp

        m = inner.facets.shape[0]
        X1 = np.ascontiguousarray(x[None, :], dtype=float)
        QX = np.ascontiguousarray(X1 @ inner.facets.T)
        NX = np.sqrt(np.einsum("ij,ij->i", X1, X1))
        vals, _s, U = _polyqp.facet_hull_argmin(
            inner.facets, inner._gram, QX, X1, NX,
            float(t), 1e-12, min(inner.dim + 2, m), 64, 3 * m + 60)
        return float(vals[0]), U[0]
    gx = inner.gauge(x)
    proj = _hull_project_fn(inner)
    value, _s, u_star = hullcalc.hull_value_single(x, t, gx, proj, tol=tol)
    return value, u_star


def _hull_certificate(inner: Body, t: float, x, value, u_star):
    x = np.asarray(x, dtype=float)
    if value == 0.0:
        return np.zeros(x.shape[0])
    r = float(np.linalg.norm(x - u_star))
    if r > 1e-7 * max(1.0, float(np.linalg.norm(x))):
        return (x - u_star) / (t * r)
    # split degenerates to the inner ball: a least-norm inner subgradient
    # certifies the value whenever staying inside the ball was optimal
    y0 = inner.subgradient(x)
    ny = t * float(np.linalg.norm(y0))
    if ny > 1.0:
        y0 = y0 / ny
    return y0


def _hull_batch(inner: Body, t: float, X: np.ndarray) -> np.ndarray:
    """Vectorized hull gauges; falls back to per-row solves when needed."""
    if isinstance(inner, PNormBody):
        res = _pnorm_hull_dispatch(inner, t, X, want_arg=False)
        if res is not None:
            return res
    if isinstance(inner, FacetPolytope):
        return _facet_hull_table(inner, np.array([float(t)]), X)[:, 0]
    return np.array([_hull_value(inner, t, row)[0] for row in X])


def _facet_hull_table(inner: "FacetPolytope", ts, X, rel_tol=1e-10, kcap=None,
                      budget=48) -> np.ndarray:
    """Hull gauges of the rows of X at every t in ts, shape (len(X), len(ts)).

    Values for the t grid of one row share projection work, stay valid
    upper bounds even under loose settings, and are exactly monotone in t.
    """
    from . import _polyqp

    m = inner.facets.shape[0]
    if kcap is None:
        kcap = min(inner.dim + 2, m)
    ts = np.ascontiguousarray(ts, dtype=float)
    X = np.ascontiguousarray(X, dtype=float)
    out = np.empty((X.shape[0], ts.shape[0]))
    step = 8192
    for lo in range(0, X.shape[0], step):
        Xc = X[lo:lo + step]
        QX = np.ascontiguousarray(Xc @ inner.facets.T)
        NX = np.sqrt(np.einsum("ij,ij->i", Xc, Xc))
        out[lo:lo + step] = _polyqp.facet_hull_values(
            inner._gram, QX, NX, ts, rel_tol, kcap, budget, 3 * m + 60)
    return out


def _hull_subgrads_many(inner: Body, t: float, X: np.ndarray):
    """(values, certificates) for many rows at once; used by the ascent."""
    X = np.asarray(X, dtype=float)
    if isinstance(inner, PNormBody):
        res = _pnorm_hull_dispatch(inner, t, X, want_arg=True)
        if res is not None:
            vals, U = res
            R = X - U
            rr = np.linalg.norm(R, axis=1)
            nx = np.linalg.norm(X, axis=1)
            Y = np.zeros_like(X)
            good = rr > 1e-7 * np.maximum(1.0, nx)
            Y[good] = R[good] / (t * rr[good, None])
            for i in np.nonzero(~good & (vals > 0))[0]:
                Y[i] = _hull_certificate(inner, t, X[i], vals[i], U[i])
            return vals, Y
    if isinstance(inner, FacetPolytope):
        from . import _polyqp

        m = inner.facets.shape[0]
        Xc = np.ascontiguousarray(X, dtype=float)
        QX = np.ascontiguousarray(Xc @ inner.facets.T)
        NX = np.sqrt(np.einsum("ij,ij->i", Xc, Xc))
        vals, _s, U = _polyqp.facet_hull_argmin(
            inner.facets, inner._gram, QX, Xc, NX,
            float(t), 1e-12, min(inner.dim + 2, m), 64, 3 * m + 60)
        R = X - U
        rr = np.linalg.norm(R, axis=1)
        nx = np.linalg.norm(X, axis=1)
        Y = np.zeros_like(X)
        good = rr > 1e-7 * np.maximum(1.0, nx)
        Y[good] = R[good] / (t * rr[good, None])
        for i in np.nonzero(~good & (vals > 0))[0]:
            Y[i] = _hull_certificate(inner, t, X[i], vals[i], U[i])
        return vals, Y
    vals = np.empty(X.shape[0])
    Y = np.zeros_like(X)
    for i, row in enumerate(X):
        v, u = _hull_value(inner, t, row)
        vals[i] = v
        Y[i] = _hull_certificate(inner, t, row, v, u)
    return vals, Y


class HullBody(Body):
    """Convex hull of an inner unit ball with t times the Euclidean ball.

    Standing assumption downstream: the inner body contains the unit
    Euclidean ball (is in John position), so t ranges over [1, sqrt(n)].
    """

    kind = "hull"

    def __init__(self, inner: Body, t: float):
        if not isinstance(inner, Body):
            raise InvalidBodyError("inner must be a body")
        t = float(t)
        if not (1.0 <= t <= math.sqrt(inner.dim) + 1e-12):
            raise DomainError(f"t must lie in [1, sqrt(dim)] = [1, {math.sqrt(inner.dim):.6g}], got {t}")
        _hull_project_fn(inner)  # fail fast on unsupported inner kinds
        self.inner = inner
        self.t = t
        self.dim = inner.dim

    def gauge(self, x) -> float:
        x = _check_point(x, self.dim)
        return _hull_value(self.inner, self.t, x)[0]

    def gauge_many(self, X) -> np.ndarray:
        X = _check_batch(X, self.dim)
        return _hull_batch(self.inner, self.t, X)

    def dual_gauge(self, y) -> float:
        y = _check_point(y, self.dim, "y")
        return max(self.inner.dual_gauge(y), self.t * float(np.linalg.norm(y)))

    def subgradient(self, x) -> np.ndarray:
        x = _check_point(x, self.dim)
        value, u_star = _hull_value(self.inner, self.t, x)
        return _hull_certificate(self.inner, self.t, x, value, u_star)

    def to_spec(self) -> dict:
        return {"kind": "hull", "t": float(self.t), "inner": self.inner.to_spec()}


class BallIntersection(Body):
    """Intersection of an inner body with rho times the Euclidean ball."""

    kind = "intersect_ball"

    def __init__(self, inner: Body, rho: float):
        if not isinstance(inner, Body):
            raise InvalidBodyError("inner must be a body")
        rho = float(rho)
        if not (rho > 0.0) or not math.isfinite(rho):
            raise DomainError(f"rho must be a positive finite number, got {rho}")
        self.inner = inner
        self.rho = rho
        self.dim = inner.dim

    def gauge(self, x) -> float:
        x = _check_point(x, self.dim)
        return max(self.inner.gauge(x), float(np.linalg.norm(x)) / self.rho)

    def gauge_many(self, X) -> np.ndarray:
        X = _check_batch(X, self.dim)
        return np.maximum(self.inner.gauge_many(X), np.linalg.norm(X, axis=1) / self.rho)

    def subgradient(self, x) -> np.ndarray:
        x = _check_point(x, self.dim)
        gi = self.inner.gauge(x)
        ge = float(np.linalg.norm(x)) / self.rho
        if gi >= ge:
            return self.inner.subgradient(x)
        return x / (self.rho * self.rho * ge)

    def _polar_inner(self) -> Body:
        if isinstance(self.inner, PNormBody):
            return self.inner.polar()
        if isinstance(self.inner, VertexPolytope):
            return FacetPolytope(self.inner.vertices)
        raise UnsupportedOperationError(
            "dual gauge of a ball intersection needs a polar with projectable structure; "
            f"inner kind {type(self.inner).__name__} is not supported"
        )

    def dual_gauge(self, y) -> float:
        # polarity swaps intersection with hull: (K n rho B)* = conv(K* u B/rho)
        y = _check_point(y, self.dim, "y")
        polar = self._polar_inner()
        return _hull_value(polar, 1.0 / self.rho, y)[0]

    def to_spec(self) -> dict:
        return {"kind": "intersect_ball", "rho": float(self.rho), "inner": self.inner.to_spec()}


# ---------------------------------------------------------------------------
# module-level operations


def gauge(body: Body, x) -> GaugeValue:
    """Gauge of x with a dual certificate."""
    if not isinstance(body, Body):
        raise InvalidBodyError("body must be a Body instance")
    value = body.gauge(x)
    cert = body.subgradient(x)
    return GaugeValue(value=value, certificate=cert)


def dual_gauge(body: Body, y) -> float:
    """Gauge of y with respect to the polar body."""
    if not isinstance(body, Body):
        raise InvalidBodyError("body must be a Body instance")
    return body.dual_gauge(y)


def gauge_many(body: Body, X) -> np.ndarray:
    """Gauges of the rows of X."""
    if not isinstance(body, Body):
        raise InvalidBodyError("body must be a Body instance")
    return body.gauge_many(X)


def euclid_project(body: Body, x, s: float) -> np.ndarray:
    """Euclidean projection of x onto s * body."""
    if not isinstance(body, Body):
        raise InvalidBodyError("body must be a Body instance")
    s = float(s)
    if not (s > 0.0) or not math.isfinite(s):
        raise DomainError(f"scale s must be positive and finite, got {s}")
    x = _check_point(x, body.dim)
    if isinstance(body, PNormBody):
        return _pnorm_project(body, x, s)
    if isinstance(body, FacetPolytope):
        return hullcalc.project_facets(body.facets, x, s, body._gram)[0]
    raise UnsupportedOperationError(
        f"euclid_project supports pnorm balls and facet polytopes, got {type(body).__name__}"
    )


def hull_gauge(inner: Body, t: float, x) -> GaugeValue:
    """Gauge of x in conv(inner u t*B_2), with a dual certificate."""
    if not isinstance(inner, Body):
        raise InvalidBodyError("inner must be a Body instance")
    t = float(t)
    if not (1.0 <= t <= math.sqrt(inner.dim) + 1e-12):
        raise DomainError(f"t must lie in [1, sqrt(dim)] = [1, {math.sqrt(inner.dim):.6g}], got {t}")
    x = _check_point(x, inner.dim)
    value, u_star = _hull_value(inner, t, x)
    cert = _hull_certificate(inner, t, x, value, u_star)
    return GaugeValue(value=value, certificate=cert)


# ---------------------------------------------------------------------------
# declarative body descriptions (the JSON grammar used by configs)

_ALLOWED_KEYS = {
    "pnorm": {"kind", "p", "dim", "weights"},
    "polytope": {"kind", "facets", "vertices"},
    "linear_image": {"kind", "matrix", "inner"},
    "hull": {"kind", "t", "inner"},
    "intersect_ball": {"kind", "rho", "inner"},
}


def body_from_spec(obj, path="body") -> Body:
    """Build a body from its declarative description.

    Raises InvalidBodyError with the offending key path on malformed
    input, DomainError on out-of-range numeric parameters.
    """
    if not isinstance(obj, dict):
        raise InvalidBodyError(f"{path}: expected an object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind not in _ALLOWED_KEYS:
        raise InvalidBodyError(f"{path}.kind: unknown body kind {kind!r}")
    extra = set(obj) - _ALLOWED_KEYS[kind]
    if extra:
        raise InvalidBodyError(f"{path}: unknown keys {sorted(extra)} for kind {kind!r}")

    if kind == "pnorm":
        if "p" not in obj or "dim" not in obj:
            raise InvalidBodyError(f"{path}: pnorm needs 'p' and 'dim'")
        p = obj["p"]
        if isinstance(p, str):
            if p != "inf":
                raise InvalidBodyError(f"{path}.p: string form must be 'inf', got {p!r}")
            p = math.inf
        elif not isinstance(p, (int, float)) or isinstance(p, bool):
            raise InvalidBodyError(f"{path}.p: expected a number or 'inf', got {p!r}")
        dim = obj["dim"]
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise InvalidBodyError(f"{path}.dim: expected a positive integer, got {dim!r}")
        return PNormBody(p, dim, weights=obj.get("weights"))

    if kind == "polytope":
        has_f = "facets" in obj
        has_v = "vertices" in obj
        if has_f == has_v:
            raise InvalidBodyError(f"{path}: polytope needs exactly one of 'facets' or 'vertices'")
        return FacetPolytope(obj["facets"]) if has_f else VertexPolytope(obj["vertices"])

    if "inner" not in obj:
        raise InvalidBodyError(f"{path}: {kind} needs an 'inner' body")
    inner = body_from_spec(obj["inner"], path=f"{path}.inner")

    if kind == "linear_image":
        if "matrix" not in obj:
            raise InvalidBodyError(f"{path}: linear_image needs 'matrix'")
        return LinearImage(obj["matrix"], inner)
    if kind == "hull":
        if "t" not in obj:
            raise InvalidBodyError(f"{path}: hull needs 't'")
        return HullBody(inner, obj["t"])
    if "rho" not in obj:
        raise InvalidBodyError(f"{path}: intersect_ball needs 'rho'")
    return BallIntersection(inner, obj["rho"])


def body_to_spec(body: Body) -> dict:
    """Inverse of body_from_spec."""
    if not isinstance(body, Body):
        raise InvalidBodyError("body must be a Body instance")
    return body.to_spec()
