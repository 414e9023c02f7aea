"""Build unit balls, evaluate gauges and duals, and take hulls with discs.

Every body kind speaks the same three-verb API: gauge, dual_gauge,
gauge_many.  Gauges come back with a dual certificate that you can
check by hand, which is what the last section does.
"""

import math

import numpy as np

import banach as B


def main():
    x = np.array([3.0, 4.0])
    print("Euclidean gauge of (3,4):", B.gauge(B.PNormBody(2, 2), x).value)
    print("sup-norm gauge of (1,1): ", B.gauge(B.PNormBody(math.inf, 2), [1, 1]).value)
    print("l1 dual gauge of (1,-2): ", B.dual_gauge(B.PNormBody(1, 2), [1, -2]))

    # the same square, described three ways
    square_f = B.FacetPolytope(np.vstack([np.eye(2), -np.eye(2)]))
    square_p = B.PNormBody(math.inf, 2)
    square_v = B.VertexPolytope(np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], float))
    pt = np.array([0.4, -0.9])
    print("\nsquare gauges at (0.4,-0.9):",
          *(f"{B.gauge(b, pt).value:.6f}" for b in (square_f, square_p, square_v)))

    # hull with a disc of radius t: gauge shrinks as t grows
    body = B.PNormBody(math.inf, 4)
    e1 = np.eye(4)[0]
    for t in (1.0, 1.5, 2.0):
        print(f"hull gauge of e1 at t={t}: {B.hull_gauge(body, t, e1).value:.4f}")

    # certificate: <x, y> recovers value * dual_gauge(y)
    body = B.BallIntersection(B.PNormBody(1, 3), 0.75)
    out = B.gauge(body, [1.0, -0.5, 0.25])
    y = out.certificate
    lhs = float(np.dot([1.0, -0.5, 0.25], y))
    rhs = out.value * B.dual_gauge(body, y)
    print(f"\ncertificate identity: {lhs:.12f} == {rhs:.12f}")

    # round-trip through the JSON grammar
    spec = {"kind": "hull", "t": 2.0,
            "inner": {"kind": "pnorm", "p": "inf", "dim": 4}}
    hull = B.body_from_spec(spec)
    print("from spec:", B.body_to_spec(hull))


if __name__ == "__main__":
    main()
