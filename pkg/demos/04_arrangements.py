"""Sparsity budgets, Euclidean subspaces, and where they fail.

A vector earns a distortion budget D(a) from three measures: support
size, cyclic window, and the bit length of a run-length code.  The
experiments here check random subspaces against that budget, split
l1 into two Euclidean halves, and refute near-isometries onto l-inf.
"""

import math

import numpy as np

import banach as B


def main():
    a = np.zeros(16)
    a[[0, 1, 15]] = (1.0, -2.0, 0.5)
    prof = B.distortion_budget(a, c_prime=2.0)
    print(f"a with support {{0,1,15}} in R^16: nnz={prof.nnz} cyc={prof.cyc} "
          f"kol={prof.kol_bits} bits")
    print("  budget terms:", tuple(round(t, 3) for t in prof.d_terms),
          "-> D(a) =", round(prof.D, 3))

    body, _ = B.john_transform(B.PNormBody(1, 32))
    Q = B.haar_subspace(32, 4, 5)
    d = B.subspace_distortion(body, Q, n_samples=4096, rng=0)
    print(f"\nrandom 4-dim subspace of John l1 n=32: gauge range "
          f"[{d.lo:.3f}, {d.hi:.3f}] ratio={d.ratio:.3f}")

    rows = B.kashin_experiment(64, 5, rng=42, n_samples=2048)
    print("\nKashin split of l1 n=64, five trials, worst half ratios:")
    print(" ", [round(r.worst, 3) for r in rows])

    rep = B.block_decomposition(body, eps=0.2, rng=1, n_samples=2048)
    print(f"\ncoordinate blocks k={rep.k}: max median deviation "
          f"{rep.max_deviation:.3f}, max scaled b {rep.max_b_scaled:.3f}")

    # 2-sparse witnesses against near-isometries into l-inf
    T = B.sample_orthogonal(16, 9).matrix
    x = B.linfty_refute(T, eps=0.02)
    r = np.max(np.abs(T @ x)) / np.linalg.norm(x)
    print(f"\nrefuter on a Haar basis: witness nnz={np.count_nonzero(x)} "
          f"ratio={r:.4f} (outside 1 +/- 0.02)")


if __name__ == "__main__":
    main()
