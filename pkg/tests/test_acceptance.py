"""Acceptance gate: one test per shipped guarantee.

Run with -v to get one pass/fail line per criterion.  Tolerances are
pinned here and nowhere else; loosening them is a release decision.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

import banach as B
from banach.arrange import _gamma_bits
from banach.config import parse_config
from banach.reporting import read_csv
from banach.runner import run


def _john(p, n):
    return B.john_transform(B.PNormBody(p, n))


@pytest.fixture(scope="session")
def lemma1_families():
    """All hull-ratio tables for criteria 4 and 5, built once and timed."""
    tables = {}
    t_grid = [2.0, 4.0, 8.0]
    start = time.perf_counter()
    for p in (1, 2, 4, math.inf):
        for n in (64, 256):
            body, cert = _john(p, n)
            tables[f"l{p}_n{n}"] = B.lemma1_ratio(
                body, t_grid, 100000, 40 + n, c_prime=4.0,
                contacts=cert.contacts)
    rng = np.random.default_rng(7)
    for i in range(5):
        n, m = 64, 96
        A = rng.standard_normal((m, n)) * (0.5 + rng.random((m, 1)))
        pos, cert = B.john_transform(B.FacetPolytope(A))
        tables[f"poly{i}"] = B.lemma1_ratio(
            pos, t_grid, 100000, 70 + i, c_prime=4.0, contacts=cert.contacts)
    elapsed = time.perf_counter() - start
    return tables, elapsed


def test_criterion_01_john_exactness():
    start = time.perf_counter()
    for n in range(2, 65):
        assert abs(B.analytic_john_radius(1, n) - n ** -0.5) <= 1e-9
        assert abs(B.analytic_john_radius(math.inf, n) - 1.0) <= 1e-9
        for p in (2, 3, 4, 8, 16):
            assert abs(B.analytic_john_radius(p, n) - n ** (1 / p - 0.5)) <= 1e-9
    for p in (1, 2, 4, math.inf):
        body, cert = _john(p, 64)
        assert cert.identity_residual() < 1e-9
    ell, _ = B.mvee([[1, 0], [-1, 0], [0, 1], [0, -1]])
    assert np.max(np.abs(ell.shape - np.eye(2))) <= 1e-5
    assert time.perf_counter() - start < 1.0


def test_criterion_02_gauge_duality():
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    dim = 8
    V = rng.standard_normal((20, dim))
    A = rng.standard_normal((24, dim)) * (0.5 + rng.random((24, 1)))
    T = np.eye(dim) + 0.2 * rng.standard_normal((dim, dim))
    kinds = [
        (B.PNormBody(1, dim), 1500),
        (B.PNormBody(2, dim), 1500),
        (B.PNormBody(3.5, dim), 1500),
        (B.PNormBody(math.inf, dim), 1500),
        (B.PNormBody(2, dim, weights=np.linspace(0.5, 2, dim)), 1000),
        (B.VertexPolytope(np.vstack([V, -V])), 600),
        (B.FacetPolytope(A), 600),
        (B.LinearImage(T, B.PNormBody(1, dim)), 600),
        (B.HullBody(_john(1, dim)[0], 2.0), 600),
        (B.BallIntersection(B.PNormBody(1, dim), 0.75), 600),
    ]
    total = 0
    for body, count in kinds:
        X = rng.standard_normal((count, dim)) * 2.0
        Y = rng.standard_normal((count, dim)) * 2.0
        gx = B.gauge_many(body, X)
        for x, y, g in zip(X, Y, gx):
            dy = B.dual_gauge(body, y)
            assert abs(float(x @ y)) <= g * dy * (1 + 1e-9) + 1e-12
            total += 1
    # hull primal/dual consistency via the certificate identity
    hull = B.HullBody(_john(1, 16)[0], 3.0)
    for x in rng.standard_normal((200, 16)):
        out = B.gauge(hull, x)
        attained = float(x @ out.certificate) / B.dual_gauge(hull, out.certificate)
        assert attained == pytest.approx(out.value, rel=1e-4)
    assert total == 10000
    assert time.perf_counter() - start < 30.0


def test_criterion_03_hull_certificate():
    for p in (1, 2, 4, math.inf):
        for n in (16, 64, 256):
            body, cert = _john(p, n)
            for t in sorted({1.0, 2.0, 4.0, math.sqrt(n)}):
                hull = B.HullBody(body, t)
                bt = B.estimate_b(hull, contacts=cert.contacts, rng=0)
                assert bt.certified
                assert abs(float(bt) - 1.0 / t) <= 1e-6, (p, n, t, float(bt))
                ascent = B.estimate_b(hull, rng=1)
                assert float(ascent) <= 1.0 / t + 1e-6, (p, n, t, float(ascent))


def test_criterion_04_lemma1_constant(lemma1_families):
    tables, elapsed = lemma1_families
    assert len(tables) == 13
    for name, tbl in tables.items():
        assert tbl.fitted_c >= 0.1, (name, tbl.fitted_c)
        for row in tbl.rows:
            assert not row.skipped, (name, row.t)
            assert row.b_certified, (name, row.t)
    assert elapsed < 300.0, f"lemma1 suite took {elapsed:.0f}s"


def test_criterion_05_monotonicity(lemma1_families):
    tables, _ = lemma1_families
    for name, tbl in tables.items():
        rows = sorted(tbl.rows, key=lambda r: r.t)
        for a, b in itertools.pairwise(rows):
            slack = 3.0 * (a.m_t_stderr + b.m_t_stderr)
            assert b.m_t <= a.m_t + slack, (name, a.t, b.t)
            assert b.t * b.m_t >= a.t * a.m_t - slack, (name, a.t, b.t)


def test_criterion_06_mean_values():
    body1, cert1 = _john(1, 1024)
    st1 = B.estimate_stats(body1, 100000, 11, contacts=cert1.contacts)
    assert abs(st1.mean_M - math.sqrt(2 / math.pi)) <= 0.01
    body_inf, cert_inf = _john(math.inf, 1024)
    st_inf = B.estimate_stats(body_inf, 100000, 12, contacts=cert_inf.contacts)
    assert abs(st_inf.mean_M - 0.116) / 0.116 <= 0.10


def test_criterion_07_cdf_ordering():
    grid = np.linspace(0.25, 4.0, 16)
    for p in (1, 4):
        body, _ = _john(p, 64)
        ct = B.schsch_compare(body, grid, 100000, 17 + p)
        slack = 2.0 * (ct.stderr_body + ct.stderr_linf)
        assert np.all(ct.cdf_body <= ct.cdf_linf + slack + 1e-12), p


def test_criterion_08_order_stats():
    start = time.perf_counter()
    freq = B.order_stats_experiment(100000, 0.6, 500, 0, c_prime=0.05)
    assert float(freq) >= 0.5
    assert time.perf_counter() - start < 60.0


def test_criterion_09_kashin_splits():
    for n in (64, 128, 256):
        rows = B.kashin_experiment(n, 20, rng=1337, n_samples=4096)
        good = sum(1 for r in rows if r.worst <= 3.0)
        assert good >= 18, (n, good, max(r.worst for r in rows))


def test_criterion_10_block_decomposition():
    body, _ = _john(1, 256)
    good = 0
    for seed in range(10):
        rep = B.block_decomposition(body, eps=0.2, rng=seed, k=16,
                                    n_samples=4096)
        ok = rep.max_deviation <= 0.2 and rep.max_b_scaled <= 5.0
        good += ok
    assert good >= 9, good


def test_criterion_11_refuter():
    gen = np.random.default_rng(2024)
    eps = 0.02
    found = 0
    for _ in range(100):
        T = B.sample_orthogonal(16, int(gen.integers(2 ** 63))).matrix
        x = B.linfty_refute(T, eps)
        r = np.max(np.abs(T @ x)) / np.linalg.norm(x)
        assert abs(r - 1.0) > eps
        assert np.count_nonzero(x) <= 2
        found += 1
    for _ in range(100):
        P = np.eye(16)[gen.permutation(16)]
        signs = np.where(gen.random(16) < 0.5, -1.0, 1.0)
        T = P * signs + eps * gen.standard_normal((16, 16)) / 4.0
        x = B.linfty_refute(T, eps)
        r = np.max(np.abs(T @ x)) / np.linalg.norm(x)
        assert abs(r - 1.0) > eps
        found += 1
    assert found == 200


def test_criterion_12_classical_rip():
    m = math.ceil(4 * 0.3 ** -2 * 4 * math.log(math.e * 256 / 4))
    assert m == 918
    passed = 0
    for seed in range(20):
        rep = B.gaussian_rip(256, m, 4, 0.3, rng=1000 + seed)
        passed += rep.passed
    assert passed >= 19, passed
    rep1 = B.gaussian_rip(8, 20, 1, 0.5, rng=7)
    cols = np.linalg.norm(B.gaussian_sketch(8, 20, 7).G, axis=0) / math.sqrt(20)
    assert abs(rep1.worst_lo - cols.min()) <= 1e-12
    assert abs(rep1.worst_hi - cols.max()) <= 1e-12


def test_criterion_13_reduction_identities():
    g = B.gaussian_rip(32, 48, 2, 0.5, rng=77, support_cap=600)
    e = B.general_rip(B.PNormBody(2, 32), np.eye(32), B.PNormBody(2, 48),
                      np.eye(48), 2, 0.5, rng=77, support_cap=600)
    assert abs(g.worst_lo - e.worst_lo) <= 1e-10
    assert abs(g.worst_hi - e.worst_hi) <= 1e-10
    assert g == e
    omega = np.random.default_rng(0).standard_normal((32, 64))
    ok = 0
    for seed in range(20):
        rep = B.jl_sparse(B.PNormBody(2, 64), np.eye(64), omega, 0.5,
                          rng=2000 + seed)
        assert rep.m == 111
        ok += rep.max_err <= 0.5
    assert ok >= 18, ok


def _brute_cyclic(n, support):
    if not support:
        return 0
    best = n
    sup = set(support)
    for start in range(n):
        for length in range(1, n + 1):
            if sup <= {(start + t) % n for t in range(length)}:
                best = min(best, length)
                break
    return best


KOL_FIXTURES = [
    ([0] * 8, 8),
    ([0, 0, 0, 1, 1, 0, 0, 0], 10),
    ([1], 2),
    ([0], 2),
    ([1, 1, 1, 1], 6),
    ([1, 0, 0, 0], 5),
    ([0, 1, 0, 0], 6),
    ([0, 0, 0, 1], 5),
    ([1, 0, 1, 0], 5),
    ([1, 1, 0, 0, 1, 1], 10),
    ([1, 0] * 4, 9),
    ([0] * 15 + [1], 9),
    ([1] * 16, 10),
    ([0] * 16, 10),
    ([1] + [0] * 15, 9),
    ([0] * 7 + [1, 1] + [0] * 7, 14),
    ([1, 1, 1, 0, 1], 6),
    ([0, 1, 1, 1, 0, 0], 8),
    ([1, 0, 0, 1], 6),
    ([0, 1], 3),
]


def test_criterion_14_combinatorial_oracles():
    # cyclic window length against exhaustive search
    for n in range(2, 13):
        for k in range(0, 5):
            for support in itertools.combinations(range(n), k):
                a = np.zeros(n)
                a[list(support)] = 1.0
                assert B.cyclic_length(a) == _brute_cyclic(n, support), \
                    (n, support)
    # run-length code against hand-computed bit counts
    assert len(KOL_FIXTURES) == 20
    for vec, bits in KOL_FIXTURES:
        assert B.kol_proxy(np.array(vec, float)) == bits, vec
    # the gamma code itself, by hand
    for k, g in [(1, 1), (2, 3), (3, 3), (4, 5), (7, 5), (8, 7), (255, 15)]:
        assert _gamma_bits(k) == g
    # scaling the vector never changes its budget
    rng = np.random.default_rng(5)
    for _ in range(100):
        n = int(rng.integers(2, 60))
        a = (rng.random(n) < 0.4) * rng.standard_normal(n)
        base = B.distortion_budget(a, 2.0)
        for c in (2.0, -1.0, 1e-8, 3.7e5):
            assert B.distortion_budget(c * a, 2.0) == base


def test_criterion_15_determinism(tmp_path):
    configs = [
        {
            "experiment": "stats",
            "body": {"kind": "pnorm", "p": 1, "dim": 32},
            "grid": {"n": [32]},
            "seeds": [1, 2, 3, 4],
            "samples": 2000,
            "john": True,
        },
        {
            "experiment": "lemma1",
            "body": {"kind": "pnorm", "p": "inf", "dim": 64},
            "grid": {"n": [64], "t": [1.0, 2.0, 4.0]},
            "seeds": [5, 6],
            "samples": 1500,
            "john": True,
        },
    ]
    for i, raw in enumerate(configs):
        cfg = parse_config(raw)
        r1 = run(cfg, out_dir=str(tmp_path / f"c{i}_t1"), threads=1)
        r4 = run(cfg, out_dir=str(tmp_path / f"c{i}_t4"), threads=4)
        b1 = open(r1.csv_path, "rb").read()
        b4 = open(r4.csv_path, "rb").read()
        assert b1 == b4
        r1b = run(cfg, out_dir=str(tmp_path / f"c{i}_t1b"), threads=1)
        assert open(r1b.csv_path, "rb").read() == b1
        _, rows = read_csv(r1.csv_path)
        assert rows
