"""Sparse isometry checks, random sketches, and embedding experiments."""

import math

import numpy as np
import pytest

from banach import (
    DegenerateInputError,
    DomainError,
    PNormBody,
    cotype_gap_check,
    gaussian_rip,
    gaussian_sketch,
    general_rip,
    hilbertian_basis,
    jl_sparse,
    john_transform,
    sample_orthogonal,
)


@pytest.fixture(scope="module")
def john_l1_64():
    return john_transform(PNormBody(1, 64))[0]


# ---------------------------------------------------------------- sketches

def test_sketch_reproducible():
    op1 = gaussian_sketch(16, 8, 42)
    op2 = gaussian_sketch(16, 8, 42)
    assert np.array_equal(op1.G, op2.G)
    assert op1.scale == 1 / math.sqrt(8)
    x = np.ones(16)
    assert np.allclose(op1.apply(x), op1.scale * op1.G @ x)


def test_rip_full_support_matches_svd():
    rep = gaussian_rip(6, 6, 6, 0.9, rng=3)
    sv = np.linalg.svd(gaussian_sketch(6, 6, 3).G / math.sqrt(6),
                       compute_uv=False)
    assert rep.tested_supports == 1 and not rep.partial
    assert rep.worst_lo == pytest.approx(sv[-1], abs=1e-14)
    assert rep.worst_hi == pytest.approx(sv[0], abs=1e-14)


def test_rip_singleton_supports_are_column_norms():
    rep = gaussian_rip(8, 20, 1, 0.5, rng=7)
    cols = np.linalg.norm(gaussian_sketch(8, 20, 7).G, axis=0) / math.sqrt(20)
    assert rep.worst_lo == pytest.approx(cols.min(), abs=1e-12)
    assert rep.worst_hi == pytest.approx(cols.max(), abs=1e-12)


def test_rip_rank_deficient():
    rep = gaussian_rip(8, 3, 5, 0.5, rng=1)
    assert not rep.passed
    assert rep.reason == "rank deficient"
    assert rep.worst_lo == 0.0


def test_rip_band_interlaces_in_k():
    r3 = gaussian_rip(8, 12, 3, 0.6, rng=11)
    r2 = gaussian_rip(8, 12, 2, 0.6, rng=11)
    assert r2.worst_lo >= r3.worst_lo - 1e-15
    assert r2.worst_hi <= r3.worst_hi + 1e-15
    if r3.passed:
        assert gaussian_rip(8, 12, 3, 0.8, rng=11).passed


def test_rip_support_cap_marks_partial():
    rep = gaussian_rip(64, 96, 4, 0.5, rng=2, support_cap=500)
    assert rep.partial and rep.tested_supports == 500


# --------------------------------------------------------------- reduction

def test_general_rip_reduces_to_gaussian():
    g = gaussian_rip(32, 48, 2, 0.5, rng=77, support_cap=600)
    e = general_rip(PNormBody(2, 32), np.eye(32), PNormBody(2, 48),
                    np.eye(48), 2, 0.5, rng=77, support_cap=600)
    assert g == e


def test_general_rip_orthonormal_bases_equivalent():
    g = gaussian_rip(32, 48, 2, 0.5, rng=77, support_cap=600)
    U = sample_orthogonal(32, 5).matrix
    V = sample_orthogonal(48, 6).matrix
    e = general_rip(PNormBody(2, 32), U, PNormBody(2, 48), V, 2, 0.5,
                    rng=77, support_cap=600)
    assert g == e


def test_general_rip_john_l1_with_adapted_basis(john_l1_64):
    hb = hilbertian_basis(john_l1_64, 2, rng=5, n_samples=1024, support_cap=48)
    assert hb.lo <= 1.0 <= hb.hi
    rep = general_rip(john_l1_64, hb.matrix, PNormBody(2, 128), np.eye(128),
                      2, 0.4, rng=31, n_samples=400, restarts=6,
                      support_cap=60)
    assert rep.passed


def test_general_rip_dimension_mismatch():
    with pytest.raises(DomainError):
        general_rip(PNormBody(2, 32), np.eye(31), PNormBody(2, 48),
                    np.eye(48), 2, 0.5)


# -------------------------------------------------------------- embeddings

@pytest.fixture(scope="module")
def omega_gaussian():
    return np.random.default_rng(0).standard_normal((32, 64))


def test_jl_target_dimension_formula(omega_gaussian):
    rep = jl_sparse(PNormBody(2, 64), np.eye(64), omega_gaussian, 0.5, rng=9)
    assert rep.m == 111
    assert rep.pairs == 32 * 31 // 2
    assert rep.max_err <= 0.5


def test_jl_scale_invariant(omega_gaussian):
    a = jl_sparse(PNormBody(2, 64), np.eye(64), omega_gaussian, 0.5, rng=9)
    b = jl_sparse(PNormBody(2, 64), np.eye(64), 3.7 * omega_gaussian, 0.5, rng=9)
    assert b.max_err == pytest.approx(a.max_err, abs=1e-12)


def test_jl_duplicate_members(omega_gaussian):
    om = np.vstack([omega_gaussian[:4], omega_gaussian[0]])
    rep = jl_sparse(PNormBody(2, 64), np.eye(64), om, 0.5, rng=9)
    assert rep.pairs == 5 * 4 // 2 - 1
    with pytest.raises(DegenerateInputError):
        jl_sparse(PNormBody(2, 64), np.eye(64), np.ones((3, 64)), 0.5)


def test_jl_sparsity_enforced(omega_gaussian):
    with pytest.raises(DomainError):
        jl_sparse(PNormBody(2, 64), np.eye(64), omega_gaussian, 0.5, rng=9, k=2)


def test_jl_sparse_members_on_l1(john_l1_64):
    gen = np.random.default_rng(12)
    om = np.zeros((16, 64))
    for i in range(16):
        idx = gen.choice(64, 2, replace=False)
        om[i, idx] = gen.standard_normal(2)
    hb = hilbertian_basis(john_l1_64, 2, rng=8, n_samples=512, support_cap=32)
    rep = jl_sparse(john_l1_64, hb.matrix, om, 0.5, rng=10, k=2)
    assert rep.pairs == 16 * 15 // 2
    assert rep.max_err < 1.0


# ------------------------------------------------------------------ cotype

def test_cotype_euclidean_tight():
    rep = cotype_gap_check(PNormBody(2, 8), 2, 1.0, n_samples=500, rng=1)
    assert rep.m_estimate == 1.0
    assert rep.bound == 1.0
    assert rep.fitted_c == 1.0


def test_cotype_l1_constant():
    body, _ = john_transform(PNormBody(1, 1024))
    rep = cotype_gap_check(body, 2, 1 / math.sqrt(2), n_samples=20000, rng=2)
    # mean gauge sqrt(2/pi) over bound 1/sqrt(2) gives 2/sqrt(pi)
    assert rep.fitted_c == pytest.approx(2 / math.sqrt(math.pi), abs=0.02)


def test_cotype_sup_norm_logarithmic():
    rep = cotype_gap_check(PNormBody(math.inf, 1024), math.inf, 1.0,
                           n_samples=20000, rng=3)
    assert rep.fitted_c > 0


def test_cotype_q_domain():
    with pytest.raises(DomainError):
        cotype_gap_check(PNormBody(2, 8), 1.5, 1.0)
