"""Gauge, dual gauge, projection, and hull behaviour for every body kind."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banach import (
    BallIntersection,
    DomainError,
    FacetPolytope,
    HullBody,
    InvalidBodyError,
    LinearImage,
    PNormBody,
    UnsupportedOperationError,
    VertexPolytope,
    body_from_spec,
    body_to_spec,
    dual_gauge,
    euclid_project,
    gauge,
    gauge_many,
    hull_gauge,
)

RNG = np.random.default_rng(20260814)


def _body_zoo(dim=4):
    """One representative of each kind, all with 0 in the interior."""
    cross = VertexPolytope(np.vstack([np.eye(dim), -np.eye(dim)]))
    cube = FacetPolytope(np.vstack([np.eye(dim), -np.eye(dim)]))
    T = np.eye(dim) + 0.2 * RNG.standard_normal((dim, dim))
    return [
        PNormBody(1.0, dim),
        PNormBody(2.0, dim),
        PNormBody(3.5, dim),
        PNormBody(math.inf, dim),
        PNormBody(2.0, dim, weights=np.linspace(0.5, 2.0, dim)),
        cross,
        cube,
        LinearImage(T, PNormBody(1.0, dim)),
        HullBody(PNormBody(math.inf, dim), 2.0),
        BallIntersection(PNormBody(1.0, dim), 0.75),
    ]


def _vectors(dim, count=40):
    return RNG.standard_normal((count, dim)) * 3.0


# ---------------------------------------------------------------- examples

def test_gauge_euclidean():
    assert gauge(PNormBody(2.0, 2), [3.0, 4.0]).value == pytest.approx(5.0, abs=1e-12)


def test_gauge_sup_norm():
    assert gauge(PNormBody(math.inf, 2), [1.0, 1.0]).value == pytest.approx(1.0, abs=1e-12)


def test_gauge_ball_intersection():
    body = BallIntersection(PNormBody(math.inf, 3), 0.5)
    e1 = [1.0, 0.0, 0.0]
    assert gauge(body, e1).value == pytest.approx(2.0, abs=1e-12)


def test_dual_gauge_of_l1_is_sup():
    assert dual_gauge(PNormBody(1.0, 2), [1.0, -2.0]) == pytest.approx(2.0, abs=1e-12)


def test_dual_gauge_of_hull():
    body = HullBody(PNormBody(math.inf, 4), 2.0)
    e1 = [1.0, 0.0, 0.0, 0.0]
    assert dual_gauge(body, e1) == pytest.approx(2.0, rel=1e-9)


def test_dual_gauge_vertex_cross_polytope():
    body = VertexPolytope(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]))
    assert dual_gauge(body, [1.0, 1.0]) == pytest.approx(1.0, rel=1e-9)


def test_project_euclidean():
    out = euclid_project(PNormBody(2.0, 2), [2.0, 0.0], s=1.0)
    assert np.allclose(out, [1.0, 0.0], atol=1e-12)


def test_project_sup_ball():
    out = euclid_project(PNormBody(math.inf, 2), [2.0, 2.0], s=1.0)
    assert np.allclose(out, [1.0, 1.0], atol=1e-12)


def test_project_l1_ball():
    out = euclid_project(PNormBody(1.0, 2), [1.0, 1.0], s=1.0)
    assert np.allclose(out, [0.5, 0.5], atol=1e-12)


def test_hull_gauge_examples():
    body = PNormBody(math.inf, 4)
    e1 = [1.0, 0.0, 0.0, 0.0]
    assert hull_gauge(body, 1.0, e1).value == pytest.approx(1.0, abs=1e-12)
    assert hull_gauge(body, 2.0, e1).value == pytest.approx(0.5, abs=1e-12)
    body2 = PNormBody(math.inf, 2)
    got = hull_gauge(body2, math.sqrt(2.0), [1.0, 1.0]).value
    assert got == pytest.approx(1.0, abs=1e-9)


def test_gauge_many_matches_gauge():
    body = PNormBody(1.0, 5)
    X = _vectors(5, 16)
    many = gauge_many(body, X)
    one = np.array([gauge(body, x).value for x in X])
    assert np.allclose(many, one, rtol=1e-12, atol=0)


# -------------------------------------------------------------- invariants

@pytest.mark.parametrize("body", _body_zoo(), ids=lambda b: type(b).__name__ + getattr(b, "_id", ""))
def test_gauge_is_a_norm(body):
    X = _vectors(body.dim, 24)
    g = gauge_many(body, X)
    for lam in (0.5, 3.0):
        assert np.allclose(gauge_many(body, lam * X), lam * g, rtol=1e-12, atol=1e-15)
    assert np.array_equal(gauge_many(body, -X), g)
    Y = _vectors(body.dim, 24)
    gy = gauge_many(body, Y)
    gxy = gauge_many(body, X + Y)
    assert np.all(gxy <= g + gy + 1e-9)


@pytest.mark.parametrize("body", _body_zoo())
def test_duality_pairing(body):
    X = _vectors(body.dim, 12)
    Y = _vectors(body.dim, 12)
    gx = gauge_many(body, X)
    for y, in zip(Y):
        dy = dual_gauge(body, y)
        dots = np.abs(X @ y)
        assert np.all(dots <= gx * dy * (1 + 1e-9) + 1e-12)


@pytest.mark.parametrize("p,q", [(1.0, math.inf), (2.0, 2.0), (4.0, 4.0 / 3.0)])
def test_bipolar_pnorm(p, q):
    body = PNormBody(p, 6)
    dual = PNormBody(q, 6)
    X = _vectors(6, 30)
    lhs = np.array([dual_gauge(body, x) for x in X])
    rhs = gauge_many(dual, X)
    assert np.allclose(lhs, rhs, rtol=1e-8, atol=1e-12)


@pytest.mark.parametrize("body", _body_zoo())
def test_gauge_certificate(body):
    for x in _vectors(body.dim, 8):
        out = gauge(body, x)
        y = out.certificate
        assert y is not None
        err = abs(float(np.dot(x, y)) - out.value * dual_gauge(body, y))
        assert err <= 1e-8 * max(out.value, 1e-30)


@pytest.mark.parametrize("kind", ["pnorm1", "cube", "pnorm_inf"])
def test_hull_contains_unit_ball_after_john(kind):
    from banach import john_transform

    dim = 8
    if kind == "pnorm1":
        body = PNormBody(1.0, dim)
    elif kind == "cube":
        body = FacetPolytope(np.vstack([np.eye(dim), -np.eye(dim)]))
    else:
        body = PNormBody(math.inf, dim)
    positioned, _ = john_transform(body)
    U = _vectors(dim, 50)
    U /= np.linalg.norm(U, axis=1)[:, None]
    for t in (1.0, 2.0, math.sqrt(dim)):
        vals = np.array([hull_gauge(positioned, t, u).value for u in U])
        assert np.all(vals <= 1 + 1e-9)


@pytest.mark.parametrize("body", [
    PNormBody(1.0, 4), PNormBody(2.0, 4), PNormBody(3.5, 4),
    PNormBody(math.inf, 4),
    FacetPolytope(np.vstack([np.eye(4), -np.eye(4)])),
])
def test_hull_monotone_in_t(body):
    ts = [1.0, 1.3, 1.7, 2.0]
    X = _vectors(body.dim, 10)
    prev = None
    for t in ts:
        cur = np.array([hull_gauge(body, t, x).value for x in X])
        if prev is not None:
            assert np.all(cur <= prev + 1e-12)
        prev = cur


def test_hull_primal_dual_consistency():
    body = PNormBody(1.0, 6)
    t = 2.0
    hull = HullBody(body, t)
    X = _vectors(6, 6)
    dirs = RNG.standard_normal((2000, 6))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    for x in X:
        primal = gauge(hull, x).value
        duals = np.array([dual_gauge(hull, d) for d in dirs[:200]])
        lower = np.max((dirs[:200] @ x) / duals)
        assert lower <= primal * (1 + 1e-4)
        y = gauge(hull, x).certificate
        attained = float(np.dot(x, y)) / dual_gauge(hull, y)
        assert attained == pytest.approx(primal, rel=1e-4)


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
def test_projection_variational_inequality(p):
    body = PNormBody(p, 5)
    for x in _vectors(5, 10):
        z = euclid_project(body, x, s=1.0)
        assert gauge(body, z).value <= 1 + 1e-9
        probes = RNG.standard_normal((40, 5))
        probes /= gauge_many(body, probes)[:, None]
        lhs = (x - z) @ (probes - z).T
        assert np.all(lhs <= 1e-9)


def test_projection_scales_with_s():
    body = PNormBody(2.0, 3)
    x = np.array([3.0, 0.0, 0.0])
    z2 = euclid_project(body, x, s=2.0)
    assert np.allclose(z2, [2.0, 0.0, 0.0], atol=1e-12)


def test_projection_unsupported_kind():
    body = HullBody(PNormBody(1.0, 3), 1.5)
    with pytest.raises(UnsupportedOperationError):
        euclid_project(body, [1.0, 0.0, 0.0], s=1.0)


# ------------------------------------------------------- hypothesis checks

@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.floats(0.01, 100.0))
@settings(max_examples=60)
def test_homogeneity_property(vec, lam):
    body = PNormBody(3.0, 3)
    base = gauge(body, vec).value
    scaled = gauge(body, [lam * v for v in vec]).value
    assert scaled == pytest.approx(lam * base, rel=1e-12, abs=1e-250)


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4),
       st.lists(st.floats(-5, 5), min_size=4, max_size=4))
@settings(max_examples=60)
def test_triangle_property_cross_polytope(u, v):
    body = VertexPolytope(np.vstack([np.eye(4), -np.eye(4)]))
    s = gauge(body, np.add(u, v)).value
    assert s <= gauge(body, u).value + gauge(body, v).value + 1e-9


# ------------------------------------------------------------- error paths

def test_nan_input_rejected():
    with pytest.raises(DomainError):
        gauge(PNormBody(2.0, 2), [float("nan"), 1.0])


def test_singular_linear_image_rejected():
    T = np.zeros((3, 3))
    with pytest.raises(InvalidBodyError):
        LinearImage(T, PNormBody(2.0, 3))


def test_hull_t_below_one_rejected():
    with pytest.raises(DomainError):
        HullBody(PNormBody(2.0, 3), 0.5)
    with pytest.raises(DomainError):
        hull_gauge(PNormBody(2.0, 3), 0.5, [1.0, 0.0, 0.0])


def test_pnorm_below_one_rejected():
    with pytest.raises(DomainError):
        PNormBody(0.5, 3)


def test_empty_polytope_rejected():
    with pytest.raises(InvalidBodyError):
        VertexPolytope(np.zeros((0, 3)))


def test_flat_vertex_polytope_rejected():
    verts = np.array([[1.0, 0.0], [-1.0, 0.0]])
    with pytest.raises(InvalidBodyError):
        VertexPolytope(verts)


# ------------------------------------------------------------ JSON grammar

def test_body_spec_round_trip():
    specs = [
        {"kind": "pnorm", "p": 2, "dim": 3},
        {"kind": "pnorm", "p": "inf", "dim": 4},
        {"kind": "pnorm", "p": 2, "dim": 3, "weights": [1.0, 2.0, 3.0]},
        {"kind": "polytope", "vertices": np.vstack([np.eye(2), -np.eye(2)]).tolist()},
        {"kind": "polytope", "facets": np.vstack([np.eye(2), -np.eye(2)]).tolist()},
        {"kind": "hull", "t": 2.0,
         "inner": {"kind": "pnorm", "p": "inf", "dim": 4}},
        {"kind": "intersect_ball", "rho": 0.5,
         "inner": {"kind": "pnorm", "p": 1, "dim": 3}},
        {"kind": "linear_image", "matrix": [[2.0, 0.0], [0.0, 1.0]],
         "inner": {"kind": "pnorm", "p": 2, "dim": 2}},
    ]
    for spec in specs:
        body = body_from_spec(spec)
        again = body_from_spec(json.loads(json.dumps(body_to_spec(body))))
        X = _vectors(body.dim, 6)
        assert np.allclose(gauge_many(body, X), gauge_many(again, X), rtol=1e-12)


def test_body_spec_rejects_unknown_kind():
    with pytest.raises(InvalidBodyError):
        body_from_spec({"kind": "banana", "dim": 3})


def test_body_spec_rejects_facets_and_vertices_together():
    with pytest.raises(InvalidBodyError):
        body_from_spec({"kind": "polytope",
                        "facets": [[1.0, 0.0]], "vertices": [[1.0, 0.0]]})
