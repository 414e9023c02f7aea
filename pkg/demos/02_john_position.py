"""Put bodies in John position and inspect the contact structure.

For p-norm balls the positioning is a closed-form rescale; for facet
polytopes it runs an inscribed-ellipsoid solve on the polar.  Either
way the result is certified: contact points, weights summing to n,
and the decomposition-of-identity residual.
"""

import math

import numpy as np

import banach as B


def main():
    for p in (1, 2, 4, math.inf):
        n = 16
        print(f"analytic inner radius of l{p} ball, n={n}: "
              f"{B.analytic_john_radius(p, n):.6f}")

    body, cert = B.john_transform(B.PNormBody(1, 64))
    print("\nJohn l1 n=64:")
    print("  contacts:", cert.contacts.shape, " weight sum:",
          round(float(cert.weights.sum()), 6))
    print("  identity residual:", cert.identity_residual())
    rep = B.verify_sandwich(body, samples=20000, seed=0)
    print(f"  sandwich ok={rep.ok} gauge range=({rep.min_gauge:.4f}, {rep.max_gauge:.4f})")

    # a lopsided random polytope gets a genuine linear change of basis
    rng = np.random.default_rng(3)
    A = rng.standard_normal((48, 24)) * (0.3 + rng.random((48, 1)))
    pos, cert = B.john_transform(B.FacetPolytope(A))
    rep = B.verify_sandwich(pos, samples=20000, seed=1)
    print(f"\npolytope n=24, 48 facets: contacts={len(cert.weights)}"
          f" residual={cert.identity_residual():.2e} sandwich ok={rep.ok}")

    # the inscribed-ellipsoid primitive on its own
    ell, u = B.mvee([[1, 0], [-1, 0], [0, 1], [0, -1]])
    print("\nmvee of the cross-polytope vertices -> shape matrix:")
    print(np.round(ell.shape, 8))


if __name__ == "__main__":
    main()
