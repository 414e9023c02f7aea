"""Sparse isometries: classical RIP, its gauge-space generalization, JL.

The general analyzer degrades gracefully: on Euclidean inputs with
orthonormal bases it reduces bit-for-bit to the classical SVD check,
and on other gauges it reports empirically searched extremes.
"""

import math

import numpy as np

import banach as B


def main():
    n, k, eps = 256, 4, 0.3
    m = math.ceil(4 * eps ** -2 * k * math.log(math.e * n / k))
    rep = B.gaussian_rip(n, m, k, eps, rng=0)
    print(f"gaussian RIP n={n} k={k} m={m}: lo={rep.worst_lo:.4f} "
          f"hi={rep.worst_hi:.4f} pass={rep.passed} "
          f"(supports tested: {rep.tested_supports}, partial={rep.partial})")

    g = B.gaussian_rip(32, 48, 2, 0.5, rng=7)
    e = B.general_rip(B.PNormBody(2, 32), np.eye(32),
                      B.PNormBody(2, 48), np.eye(48), 2, 0.5, rng=7)
    print("reduction to the classical path is exact:", g == e)

    # a non-Euclidean source needs a basis adapted to its gauge
    body, _ = B.john_transform(B.PNormBody(1, 64))
    hb = B.hilbertian_basis(body, 2, rng=5, n_samples=1024, support_cap=48)
    print(f"\nadapted basis for John l1 n=64: sparse-isometry quality "
          f"[{hb.lo:.3f}, {hb.hi:.3f}]")
    rep = B.general_rip(body, hb.matrix, B.PNormBody(2, 128), np.eye(128),
                        2, 0.4, rng=31, n_samples=400, restarts=6,
                        support_cap=60)
    print(f"general RIP on l1: lo={rep.worst_lo:.3f} hi={rep.worst_hi:.3f} "
          f"pass={rep.passed}")

    omega = np.random.default_rng(0).standard_normal((32, 64))
    jl = B.jl_sparse(B.PNormBody(2, 64), np.eye(64), omega, 0.5, rng=9)
    print(f"\nJL on 32 points: target dim m={jl.m}, max pairwise error "
          f"{jl.max_err:.3f} (eps=0.5)")

    ct = B.cotype_gap_check(body, 2, 1 / math.sqrt(2), n_samples=20000, rng=2)
    print(f"\ncotype-2 check on l1: M={ct.m_estimate:.4f} "
          f"bound={ct.bound:.4f} fitted c={ct.fitted_c:.3f}")


if __name__ == "__main__":
    main()
