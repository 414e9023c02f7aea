"""Sparsity arithmetic, subspace distortion, and basis experiments."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banach import (
    DomainError,
    PNormBody,
    SubspaceBasis,
    basis_columns_subspace,
    block_decomposition,
    coordinate_subspace,
    cyclic_length,
    distortion_budget,
    haar_subspace,
    john_transform,
    kashin_experiment,
    kol_proxy,
    linfty_refute,
    loc_hilbert_check,
    random_basis_experiment,
    sample_orthogonal,
    sparsity,
    subspace_distortion,
)
from banach.arrange import paper_block_count


@pytest.fixture(scope="module")
def john_l1_32():
    return john_transform(PNormBody(1, 32))[0]


# ------------------------------------------------------------ counting

def test_sparsity_counts_exact_zeros():
    assert sparsity([0, 1, 0, 2]) == 2
    assert sparsity(np.zeros(5)) == 0
    assert sparsity(np.ones(8)) == 8
    assert sparsity([1e-300, 0.0]) == 1


def test_cyclic_length_examples():
    v = np.zeros(8); v[0] = 1; v[7] = 2
    assert cyclic_length(v) == 2
    v = np.zeros(8); v[0] = 1; v[4] = 1
    assert cyclic_length(v) == 5
    assert cyclic_length(np.ones(8)) == 8
    assert cyclic_length(np.zeros(8)) == 0
    v = np.zeros(8); v[3] = 1
    assert cyclic_length(v) == 1


def test_cyclic_length_shift_invariant():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(2, 30))
        a = (rng.random(n) < 0.3) * rng.standard_normal(n)
        c = cyclic_length(a)
        for s in range(1, n):
            assert cyclic_length(np.roll(a, s)) == c


def _brute_cyclic(a):
    n = len(a)
    sup = set(np.flatnonzero(a).tolist())
    if not sup:
        return 0
    best = n
    for start in range(n):
        for length in range(1, n + 1):
            win = {(start + t) % n for t in range(length)}
            if sup <= win:
                best = min(best, length)
                break
    return best


def test_cyclic_length_against_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(300):
        n = int(rng.integers(2, 13))
        a = np.zeros(n)
        nnz = int(rng.integers(0, 5))
        idx = rng.choice(n, size=min(nnz, n), replace=False)
        a[idx] = 1.0
        assert cyclic_length(a) == _brute_cyclic(a)


def test_kol_proxy_examples():
    a = np.array([0, 0, 0, 1, 1, 0, 0, 0], float)
    assert kol_proxy(a) == 10
    assert kol_proxy(np.zeros(8)) == 8


def test_kol_proxy_contiguous_support_is_cheap():
    for n in (8, 64, 1000):
        for start in (0, 3):
            for ln in (1, 2, n // 2):
                a = np.zeros(n)
                a[start:start + ln] = 1
                bound = 1 + 3 * (2 * int(math.floor(math.log2(n))) + 1)
                assert kol_proxy(a) <= bound


def test_kol_proxy_never_worse_than_run_listing():
    rng = np.random.default_rng(1)
    for _ in range(300):
        n = int(rng.integers(2, 200))
        a = (rng.random(n) < rng.random()) * 1.0
        nnz = sparsity(a)
        assert 0 <= nnz <= cyclic_length(a) <= n
        header = 2 + 2 * int(math.floor(math.log2(n)))
        assert kol_proxy(a) <= header + 2 * nnz * (math.ceil(math.log2(n)) + 2)


# ---------------------------------------------------------------- budgets

def test_distortion_budget_unit_vector():
    e1 = np.zeros(8)
    e1[0] = 1.0
    prof = distortion_budget(e1, 1.0)
    assert prof.d_terms[0] == 1.0
    assert prof.d_terms[1] == pytest.approx(
        math.sqrt((1 + math.log(8)) / math.log(9)), abs=1e-12)
    assert prof.D == 1.0 and prof.d_raw == 1.0
    # scaling the vector changes nothing
    assert distortion_budget(2 * e1, 1.0) == prof


def test_distortion_budget_zero_vector():
    prof = distortion_budget(np.zeros(8))
    assert prof.nnz == 0 and prof.d_raw == 0.0
    assert prof.d_terms[1] == pytest.approx(
        math.sqrt(math.log(8) / math.log(9)), abs=1e-15)


def test_distortion_budget_needs_dim_two():
    with pytest.raises(DomainError):
        distortion_budget([1.0])


@given(st.integers(2, 100), st.integers(0, 1000))
@settings(max_examples=60)
def test_distortion_budget_min_term(n, seed):
    rng = np.random.default_rng(seed)
    a = (rng.random(n) < 0.4) * rng.standard_normal(n)
    pr = distortion_budget(a, 2.5)
    assert pr.d_raw == min(pr.d_terms)
    assert pr.d_raw <= math.sqrt(pr.nnz) + 1e-15
    assert pr.D == 2.5 * pr.d_raw
    if pr.nnz:
        assert pr.d_raw >= 1.0


# ------------------------------------------------------------- subspaces

def test_subspace_constructors():
    sb = coordinate_subspace(8, [5, 2])
    assert sb.support == (2, 5) and sb.Q.shape == (8, 2)
    assert sb.origin == "coordinate"
    hb = haar_subspace(16, 4, 7)
    assert hb.seed == 7 and hb.k == 4
    U = sample_orthogonal(6, 3).matrix
    bb = basis_columns_subspace(U, [0, 4])
    assert bb.support == (0, 4)


def test_subspace_rejects_non_orthonormal():
    with pytest.raises(DomainError):
        SubspaceBasis(np.ones((4, 2)), "haar")


def test_distortion_euclidean_exact():
    d = subspace_distortion(PNormBody(2, 16), haar_subspace(16, 5, 3), rng=1)
    assert d.lo == 1.0 and d.hi == 1.0
    assert d.lo_exact and d.hi_exact
    assert d.ratio == 1.0


def test_distortion_weighted_euclidean_svd():
    wb = PNormBody(2, 10, weights=np.linspace(0.5, 2.0, 10))
    Q = haar_subspace(10, 3, 5)
    d = subspace_distortion(wb, Q, rng=1)
    sv = np.linalg.svd(wb.weights[:, None] * Q.Q, compute_uv=False)
    assert d.lo == sv[-1] and d.hi == sv[0]
    assert d.hi_exact


def test_distortion_sup_norm_max_is_row_norm():
    Q = haar_subspace(64, 8, 11)
    d = subspace_distortion(PNormBody(math.inf, 64), Q, n_samples=2048, rng=2)
    assert d.hi == pytest.approx(np.max(np.linalg.norm(Q.Q, axis=1)), abs=1e-12)
    assert d.hi_exact and not d.lo_exact
    assert d.lo <= d.hi


def test_distortion_brackets_fresh_samples(john_l1_32):
    Q = haar_subspace(32, 6, 21)
    d = subspace_distortion(john_l1_32, Q, n_samples=10000, rng=3)
    fresh = np.random.default_rng(999).standard_normal((10000, 6))
    fresh /= np.linalg.norm(fresh, axis=1)[:, None]
    ratios = john_l1_32.gauge_many(fresh @ Q.Q.T)
    assert d.lo <= ratios.min() + 1e-12
    assert ratios.max() <= d.hi + 1e-12


# ------------------------------------------------------------ experiments

def test_kashin_split_ratio_bounded():
    rows = kashin_experiment(64, 5, rng=42, n_samples=2048)
    assert len(rows) == 5
    for r in rows:
        assert r.worst == max(r.ratio_first, r.ratio_second)
        assert r.worst <= 3.0


def test_kashin_needs_even_dim():
    with pytest.raises(DomainError):
        kashin_experiment(7, 2)


def test_kashin_dim_two_is_exact():
    for r in kashin_experiment(2, 2, rng=0, n_samples=128):
        assert r.worst == pytest.approx(1.0, abs=1e-9)


def test_blocks_euclidean_degenerate():
    rep = block_decomposition(PNormBody(2, 64), eps=0.2, rng=5, n_samples=1024)
    assert rep.k == 8 and rep.n_blocks == 8
    assert rep.max_deviation < 1e-9
    assert all(abs(r.b - 1.0) < 1e-9 for r in rep.rows)


def test_blocks_john_l1(john_l1_32):
    rep = block_decomposition(john_l1_32, eps=0.2, rng=5, n_samples=2048)
    assert rep.max_deviation <= 0.2
    assert rep.max_b_scaled <= 5.0


def test_paper_block_count_formula():
    assert paper_block_count(256, 0.25) == math.floor(
        256 ** (1 - 0.0625 / math.log(4) ** 2))


def test_blocks_reject_oversized_k():
    with pytest.raises(DomainError):
        block_decomposition(PNormBody(2, 8), eps=0.2, k=9)


def test_random_basis_rows(john_l1_32):
    supports = [[0, 1], [0, 1, 2, 3], list(range(8))]
    rows = random_basis_experiment(john_l1_32, supports, n_samples=1024, rng=9)
    for r in rows:
        assert r.lo <= r.hi and r.ratio == r.hi / r.lo
        assert r.d_raw <= math.sqrt(len(r.support)) + 1e-15
        assert 1.0 <= r.t <= math.sqrt(32)
        assert not math.isnan(r.m_t)
    again = random_basis_experiment(john_l1_32, supports, n_samples=1024, rng=9)
    assert rows == again


# --------------------------------------------------------- local structure

def test_loc_hilbert_euclidean_clean():
    rep = loc_hilbert_check(PNormBody(2, 8), np.eye(8), 2, 0.05,
                            n_samples=256, rng=3)
    assert rep.violation == 0.0
    assert not rep.partial
    assert rep.checked == 28


def test_loc_hilbert_flags_sup_norm():
    rep = loc_hilbert_check(PNormBody(math.inf, 16), np.eye(16), 2, 0.02,
                            n_samples=256, rng=3)
    assert rep.violation > 0.3
    assert rep.lo < 0.98 * (1 - 1e-6)
    assert rep.witness_support is not None


def test_loc_hilbert_support_cap():
    rep = loc_hilbert_check(PNormBody(2, 40), np.eye(40), 3, 0.05,
                            n_samples=64, rng=3, support_cap=100)
    assert rep.partial and rep.checked == 100


# ------------------------------------------------------------- refutation

def test_refute_identity_uses_pair():
    x = linfty_refute(np.eye(3), 0.02)
    assert np.count_nonzero(x) == 2
    assert np.max(np.abs(x)) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert np.max(np.abs(np.eye(3) @ x)) < 0.98


def test_refute_stretched_diagonal_uses_single():
    x = linfty_refute(np.diag([2.0, 1.0, 1.0]), 0.02)
    assert np.count_nonzero(x) == 1 and x[0] != 0


def test_refute_eps_domain():
    with pytest.raises(DomainError):
        linfty_refute(np.eye(3), 0.05)
    with pytest.raises(DomainError):
        linfty_refute(np.eye(3), 0.0)


@pytest.mark.parametrize("family", ["haar", "permutation"])
def test_refute_random_maps(family):
    gen = np.random.default_rng(2024)
    for _ in range(20):
        if family == "haar":
            T = sample_orthogonal(16, int(gen.integers(2 ** 63))).matrix
        else:
            P = np.eye(16)[gen.permutation(16)]
            signs = np.where(gen.random(16) < 0.5, -1.0, 1.0)
            T = P * signs + 0.02 * gen.standard_normal((16, 16)) / 4.0
        x = linfty_refute(T, 0.02)
        r = np.max(np.abs(T @ x)) / np.linalg.norm(x)
        assert r > 1.02 + 1e-15 or r < 0.98 - 1e-15
        assert np.count_nonzero(x) <= 2
