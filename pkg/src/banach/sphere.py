"""Monte Carlo statistics of gauges over the unit sphere.

Haar samplers for S^{n-1}, the orthogonal group and the Grassmannian,
and the estimators built on them: the spherical mean and median of a
gauge, its maximum b, the hull statistics M_t and b_t with the fitted
lower-bound constant, concentration and small-ball probes, and the
Gaussian order-statistics experiment.

Every estimator derives all of its randomness from a single 64-bit root
seed through fixed-size chunk substreams, so results are reproducible
bit for bit regardless of how chunks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bodies as _bodies
from ._rng import as_generator, chunk_generator, root_seed, sphere_chunks, gaussian_chunks
from .bodies import Body, FacetPolytope, HullBody, PNormBody
from .errors import DomainError
from .john import john_scale

__all__ = [
    "OrthogonalSample",
    "StatsSummary",
    "BEstimate",
    "LevyReport",
    "SmallBallReport",
    "CdfComparison",
    "DuEstimate",
    "Lemma1Row",
    "Lemma1Table",
    "OrderStatsResult",
    "sample_sphere",
    "sample_orthogonal",
    "sample_grassmann",
    "estimate_stats",
    "estimate_b",
    "levy_check",
    "small_ball",
    "schsch_compare",
    "d_u_estimate",
    "lemma1_ratio",
    "order_stats_experiment",
]

# profile for the shared-grid polytope hull solver used by the batch
# estimators: values are valid upper bounds and exactly monotone along
# the t grid; the cap costs a few percent of slack at the deepest t
_GRID_PROFILE = dict(rel_tol=1e-3, kcap=48, budget=12)


def _subseed(seed: int, tag: int) -> int:
    """Independent 63-bit root for an internal phase of an estimator."""
    ss = np.random.SeedSequence(seed, spawn_key=(0x5EED, tag))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


# ---------------------------------------------------------------------------
# samplers


def sample_sphere(n: int, rng) -> np.ndarray:
    """Haar-uniform unit vector: a normalized standard Gaussian draw."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    gen = as_generator(rng)
    v = gen.standard_normal(int(n))
    nv = float(np.linalg.norm(v))
    if nv < 1e-300:
        v[0] = 1.0
        nv = 1.0
    return v / nv


@dataclass(frozen=True)
class OrthogonalSample:
    """Haar-distributed orthogonal matrix together with its root seed."""

    matrix: np.ndarray
    seed: int


def _haar_columns(n: int, k: int, gen: np.random.Generator) -> np.ndarray:
    G = gen.standard_normal((n, k))
    Q, R = np.linalg.qr(G)
    # the sign convention R_ii > 0 is what makes the law Haar
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d


def sample_orthogonal(n: int, rng) -> OrthogonalSample:
    """Haar matrix from the QR of a Gaussian with positive R diagonal."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    seed = root_seed(rng)
    Q = _haar_columns(int(n), int(n), np.random.default_rng(seed))
    return OrthogonalSample(Q, seed)


def sample_grassmann(n: int, k: int, rng) -> np.ndarray:
    """Orthonormal basis of a Haar-uniform k-dimensional subspace."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise DomainError(f"k must satisfy 1 <= k <= {n}, got {k!r}")
    return _haar_columns(int(n), int(k), as_generator(rng))


# ---------------------------------------------------------------------------
# maximum of the gauge


class BEstimate(float):
    """Lower bound for b = max gauge over the sphere.

    `certified` marks the cases where a supplied contact direction
    attains the analytic maximum (1/t for hull bodies, 1 for a body in
    John position), turning the bound into the exact value.
    """

    certified: bool

    def __new__(cls, value: float, certified: bool = False):
        obj = super().__new__(cls, float(value))
        obj.certified = bool(certified)
        return obj


def _subgrad_rows(body: Body, X: np.ndarray):
    if isinstance(body, HullBody):
        return _bodies._hull_subgrads_many(body.inner, body.t, X)
    vals = body.gauge_many(X)
    G = np.empty_like(X)
    for i, row in enumerate(X):
        G[i] = body.subgradient(row)
    return vals, G


def estimate_b(body: Body, contacts=None, restarts: int = 8, rng=0,
               max_steps: int = 60) -> BEstimate:
    """Maximum gauge over the sphere: contacts first, then sphere ascent.

    The ascent step replaces theta by its normalized subgradient, which
    never decreases the gauge of a norm.  The result is a lower bound;
    it is certified exact when a contact reaches the analytic roof, and
    for hull bodies the search is skipped in that case because the roof
    gauge <= |x|/t cannot be exceeded.
    """
    if restarts < 1:
        raise DomainError(f"restarts must be at least 1, got {restarts}")
    seed = root_seed(rng)
    roof = 1.0 / body.t if isinstance(body, HullBody) else 1.0
    best = 0.0
    contact_best = -math.inf
    if contacts is not None and len(contacts) > 0:
        V = np.atleast_2d(np.asarray(contacts, dtype=float))
        contact_best = float(np.max(body.gauge_many(V)))
        best = contact_best
        if isinstance(body, HullBody) and abs(contact_best - roof) <= 1e-6:
            return BEstimate(contact_best, True)

    gen = chunk_generator(seed, 0)
    Th = gen.standard_normal((restarts, body.dim))
    Th /= np.linalg.norm(Th, axis=1)[:, None]
    vals, G = _subgrad_rows(body, Th)
    for _ in range(max_steps):
        ng = np.linalg.norm(G, axis=1)
        live = ng > 0
        if not np.any(live):
            break
        Th[live] = G[live] / ng[live, None]
        new_vals, G = _subgrad_rows(body, Th)
        gain = float(np.max(new_vals - vals))
        vals = new_vals
        if gain <= 1e-12 * max(1.0, float(np.max(vals))):
            break
    best = max(best, float(np.max(vals)))
    certified = abs(contact_best - roof) <= 1e-6 and best <= roof + 1e-6
    return BEstimate(best, certified)


# ---------------------------------------------------------------------------
# summary statistics


@dataclass(frozen=True)
class StatsSummary:
    """Spherical statistics of one gauge from a Monte Carlo run."""

    mean_M: float
    median: float
    b_max: float
    quantiles: dict
    stderr_mean: float
    n_samples: int
    seed: int
    k_dvoretzky: float


def estimate_stats(body: Body, n_samples: int, rng, contacts=None,
                   restarts: int = 8) -> StatsSummary:
    """Mean, median and quantiles of the gauge over Haar samples.

    b_max combines the dedicated maximum search with the sampled
    maximum, so it always dominates the empirical quantiles.
    """
    if n_samples < 100:
        raise DomainError(f"n_samples must be at least 100, got {n_samples}")
    seed = root_seed(rng)
    vals = np.empty(int(n_samples))
    pos = 0
    for block in sphere_chunks(body.dim, int(n_samples), seed):
        vals[pos:pos + len(block)] = body.gauge_many(block)
        pos += len(block)
    mean = float(np.mean(vals))
    med = float(np.median(vals))
    qs = {q: float(np.quantile(vals, q)) for q in (0.1, 0.25, 0.75, 0.9)}
    stderr = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    b = estimate_b(body, contacts=contacts, restarts=restarts,
                   rng=_subseed(seed, 1))
    b_max = max(float(b), float(np.max(vals)))
    kd = body.dim * mean * mean / (b_max * b_max)
    return StatsSummary(mean, med, b_max, qs, stderr, int(n_samples), seed, kd)


# ---------------------------------------------------------------------------
# concentration probes


@dataclass(frozen=True)
class LevyReport:
    """Tail fractions of |gauge - median| at deviations {1,2,4} b/sqrt(n).

    fitted_c2 models the tail as exp(-c2 * n * (dev/b)^2), i.e. the
    deviation is measured in units of the Lipschitz constant b; the
    reported value is the most conservative constant across the grid,
    with zero-event fractions censored by the rule of three.
    """

    taus: tuple
    thresholds: tuple
    fractions: tuple
    fitted_c2: float
    b: float
    median: float
    n_samples: int
    seed: int


def levy_check(body: Body, n_samples: int, rng, b=None, contacts=None) -> LevyReport:
    if n_samples < 100:
        raise DomainError(f"n_samples must be at least 100, got {n_samples}")
    seed = root_seed(rng)
    n = body.dim
    vals = np.empty(int(n_samples))
    pos = 0
    for block in sphere_chunks(n, int(n_samples), seed):
        vals[pos:pos + len(block)] = body.gauge_many(block)
        pos += len(block)
    med = float(np.median(vals))
    if b is None:
        b = float(estimate_b(body, contacts=contacts, rng=_subseed(seed, 1)))
    taus = (1.0, 2.0, 4.0)
    thresholds = []
    fractions = []
    c2s = []
    for k in taus:
        thr = k * b / math.sqrt(n)
        q = float(np.mean(np.abs(vals - med) > thr))
        thresholds.append(thr)
        fractions.append(q)
        q_floor = max(q, 3.0 / n_samples)
        c2s.append(-math.log(q_floor) / (k * k))
    return LevyReport(taus, tuple(thresholds), tuple(fractions),
                      min(c2s), float(b), med, int(n_samples), seed)


@dataclass(frozen=True)
class SmallBallReport:
    """Estimate of sigma{gauge <= t/sqrt(n)} with its comparison bound."""

    t: float
    estimate: float
    wilson_low: float
    wilson_high: float
    censored: bool
    upper95: float
    bound: float
    constants: tuple
    n_samples: int
    seed: int


def _wilson(k: int, n: int, z: float = 1.959963984540054):
    p = k / n
    z2 = z * z
    center = (p + z2 / (2 * n)) / (1 + z2 / n)
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n)
    return max(0.0, center - half), min(1.0, center + half)


def small_ball(body: Body, t: float, n_samples: int, rng,
               constants=(1.0, 1.0, 1.0)) -> SmallBallReport:
    """Probability that the gauge falls below t/sqrt(n) on the sphere.

    Zero-event runs report the rule-of-three 95% upper bound 3/n and are
    flagged censored.  The paired bound is C exp(-c1 n exp(-c2 t^2)) for
    the configured constants.
    """
    n = body.dim
    t = float(t)
    if not 1.0 <= t <= math.sqrt(n) + 1e-12:
        raise DomainError(f"t must lie in [1, sqrt(n)] = [1, {math.sqrt(n):.6g}], got {t}")
    if n_samples < 100:
        raise DomainError(f"n_samples must be at least 100, got {n_samples}")
    seed = root_seed(rng)
    thr = t / math.sqrt(n)
    hits = 0
    for block in sphere_chunks(n, int(n_samples), seed):
        hits += int(np.sum(body.gauge_many(block) <= thr))
    p = hits / n_samples
    lo, hi = _wilson(hits, int(n_samples))
    censored = hits == 0
    upper95 = 3.0 / n_samples if censored else hi
    C, c1, c2 = (float(v) for v in constants)
    bound = C * math.exp(-c1 * n * math.exp(-c2 * t * t))
    return SmallBallReport(t, p, lo, hi, censored, upper95, bound,
                           (C, c1, c2), int(n_samples), seed)


@dataclass(frozen=True)
class CdfComparison:
    """Empirical CDF of gauge(G) against the coordinate maximum of G."""

    t_grid: np.ndarray
    cdf_body: np.ndarray
    cdf_linf: np.ndarray
    stderr_body: np.ndarray
    stderr_linf: np.ndarray
    n_samples: int
    seed: int


def schsch_compare(body: Body, t_grid, n_samples: int, rng) -> CdfComparison:
    """Paired CDFs of the gauge and the sup norm of one Gaussian stream.

    Both distribution functions are evaluated on the shared grid from
    the same Gaussian samples, with binomial standard errors.
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise DomainError("t_grid must be a non-empty 1-d array of finite reals")
    if n_samples < 100:
        raise DomainError(f"n_samples must be at least 100, got {n_samples}")
    seed = root_seed(rng)
    n = body.dim
    counts_body = np.zeros(grid.size, dtype=np.int64)
    counts_inf = np.zeros(grid.size, dtype=np.int64)
    for G in gaussian_chunks(n, int(n_samples), seed):
        vb = body.gauge_many(G)
        vi = np.max(np.abs(G), axis=1)
        counts_body += np.sum(vb[:, None] <= grid[None, :], axis=0)
        counts_inf += np.sum(vi[:, None] <= grid[None, :], axis=0)
    cdf_b = counts_body / n_samples
    cdf_i = counts_inf / n_samples
    se_b = np.sqrt(cdf_b * (1 - cdf_b) / n_samples)
    se_i = np.sqrt(cdf_i * (1 - cdf_i) / n_samples)
    return CdfComparison(grid, cdf_b, cdf_i, se_b, se_i, int(n_samples), seed)


class DuEstimate(float):
    """min(n, -log sigma{gauge <= M/u}); `censored` marks zero-event runs.

    A zero-event run takes the capped value n (the -log of an empirical
    zero), is flagged censored, and carries `lower95`, the rule-of-three
    bound that the data actually supports.
    """

    censored: bool
    lower95: float

    def __new__(cls, value: float, censored: bool = False, lower95=None):
        obj = super().__new__(cls, float(value))
        obj.censored = bool(censored)
        obj.lower95 = float(value) if lower95 is None else float(lower95)
        return obj


def d_u_estimate(body: Body, u: float, n_samples: int, rng, mean_M=None) -> DuEstimate:
    """Depth of the small-ball event {gauge <= mean_M / u}."""
    u = float(u)
    if not u > 1.0:
        raise DomainError(f"u must exceed 1, got {u}")
    if n_samples < 100:
        raise DomainError(f"n_samples must be at least 100, got {n_samples}")
    seed = root_seed(rng)
    n = body.dim
    if mean_M is None:
        acc = 0.0
        cnt = 0
        for block in sphere_chunks(n, int(n_samples), _subseed(seed, 1)):
            acc += float(np.sum(body.gauge_many(block)))
            cnt += len(block)
        mean_M = acc / cnt
    thr = float(mean_M) / u
    hits = 0
    for block in sphere_chunks(n, int(n_samples), seed):
        hits += int(np.sum(body.gauge_many(block) <= thr))
    if hits == 0:
        return DuEstimate(float(n), True, min(float(n), -math.log(3.0 / n_samples)))
    return DuEstimate(min(float(n), -math.log(hits / n_samples)), False)


# ---------------------------------------------------------------------------
# hull statistics along a t grid


@dataclass(frozen=True)
class Lemma1Row:
    t: float
    m_t: float
    m_t_mean: float
    m_t_stderr: float
    b_t: float
    b_certified: bool
    ratio: float
    bound_term: float
    c_term: float
    skipped: bool


@dataclass(frozen=True)
class Lemma1Table:
    """Hull statistics M_t (median), b_t, and the fitted ratio constant."""

    rows: tuple
    fitted_c: float
    c_prime: float
    n_samples: int
    seed: int


def _john_contact(body: Body):
    """One analytic contact direction if the body is visibly positioned."""
    n = body.dim
    if isinstance(body, PNormBody):
        u0 = body._uniform_weight()
        if u0 is not None and abs(u0 - john_scale(body.p, n)) <= 1e-9 * max(1.0, u0):
            if body.p >= 2.0 or math.isinf(body.p):
                v = np.zeros(n)
                v[0] = 1.0
            else:
                v = np.full(n, n ** -0.5)
            return v[None, :]
    if isinstance(body, FacetPolytope):
        norms = np.linalg.norm(body.facets, axis=1)
        j = int(np.argmax(norms))
        if abs(norms[j] - 1.0) <= 1e-6:
            return (body.facets[j] / norms[j])[None, :]
    return None


def _hull_grid_values(body: Body, ts: np.ndarray, n_samples: int, seed: int) -> np.ndarray:
    out = np.empty((int(n_samples), ts.size))
    pos = 0
    for block in sphere_chunks(body.dim, int(n_samples), seed):
        if isinstance(body, FacetPolytope):
            out[pos:pos + len(block)] = _bodies._facet_hull_table(
                body, ts, block, **_GRID_PROFILE)
        else:
            for j, t in enumerate(ts):
                out[pos:pos + len(block), j] = HullBody(body, float(t)).gauge_many(block)
        pos += len(block)
    return out


def _median_stderr(sorted_col: np.ndarray) -> float:
    # one-sigma order-statistic bracket around the middle rank
    N = sorted_col.size
    half = math.sqrt(N) / 2.0
    lo = max(0, int(math.floor(N / 2 - half)))
    hi = min(N - 1, int(math.ceil(N / 2 + half)))
    return float(sorted_col[hi] - sorted_col[lo]) / 2.0


def lemma1_ratio(body: Body, t_grid, n_samples: int, rng, c_prime: float = 4.0,
                 contacts=None) -> Lemma1Table:
    """Table of (t, M_t, b_t, ratio, bound, fitted c) over a shared sample.

    M_t is the median of the hull gauge (the mean rides along), b_t the
    certified maximum 1/t where a contact is available.  Grid points
    whose bound log argument c'n/t^2 drops to 1 or below are skipped and
    flagged.  All t values reuse one set of sphere samples, which makes
    the monotonicity of M_t and t*M_t exact for polytope inners.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise DomainError("t_grid must be a non-empty 1-d array")
    n = body.dim
    if np.any(ts < 1.0) or np.any(ts > math.sqrt(n) + 1e-12):
        raise DomainError(f"t_grid must lie within [1, sqrt(n)] = [1, {math.sqrt(n):.6g}]")
    if not c_prime > 0:
        raise DomainError(f"c_prime must be positive, got {c_prime}")
    if n_samples < 100:
        raise DomainError(f"n_samples must be at least 100, got {n_samples}")
    seed = root_seed(rng)
    V = _hull_grid_values(body, ts, int(n_samples), seed)
    if contacts is None:
        contacts = _john_contact(body)
    rows = []
    fitted = math.inf
    for j, t in enumerate(ts):
        col = np.sort(V[:, j])
        med = float(col[col.size // 2]) if col.size % 2 else float(
            0.5 * (col[col.size // 2 - 1] + col[col.size // 2]))
        mean = float(np.mean(col))
        se = _median_stderr(col)
        b_t = estimate_b(HullBody(body, float(t)), contacts=contacts,
                         restarts=4, rng=_subseed(seed, 100 + j))
        arg = c_prime * n / (t * t)
        if arg <= 1.0:
            rows.append(Lemma1Row(float(t), med, mean, se, float(b_t),
                                  b_t.certified, math.nan, math.nan, math.nan, True))
            continue
        bound_term = t * math.sqrt(math.log(arg) / n)
        ratio = med / float(b_t)
        c_term = ratio / bound_term
        fitted = min(fitted, c_term)
        rows.append(Lemma1Row(float(t), med, mean, se, float(b_t),
                              b_t.certified, ratio, bound_term, c_term, False))
    return Lemma1Table(tuple(rows), fitted, float(c_prime), int(n_samples), seed)


# ---------------------------------------------------------------------------
# Gaussian order statistics


class OrderStatsResult(float):
    """Frequency of trials whose window count clears the threshold."""

    threshold: float
    mean_count: float
    window: tuple
    trials: int

    def __new__(cls, value: float, threshold: float, mean_count: float,
                window: tuple, trials: int):
        obj = super().__new__(cls, float(value))
        obj.threshold = float(threshold)
        obj.mean_count = float(mean_count)
        obj.window = tuple(window)
        obj.trials = int(trials)
        return obj


def order_stats_experiment(m: int, s: float, trials: int, rng,
                           c_window: float = 2.0, c_prime: float = 0.05) -> OrderStatsResult:
    """Frequency of {count of X_i in [s sqrt(log m), 3 sqrt(log m)] >= c' m^(1-s^2)}.

    Logs are natural.  The admissible s range is [(log m)^(-1/2),
    1 - c_window/log m]; outside it the window calibration breaks down.
    """
    if not isinstance(m, (int, np.integer)) or m < 3:
        raise DomainError(f"m must be an integer >= 3, got {m!r}")
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials!r}")
    s = float(s)
    lm = math.log(m)
    lo_s = 1.0 / math.sqrt(lm)
    hi_s = 1.0 - c_window / lm
    if not lo_s - 1e-12 <= s <= hi_s + 1e-12:
        raise DomainError(f"s must lie in [{lo_s:.6g}, {hi_s:.6g}], got {s}")
    seed = root_seed(rng)
    L = math.sqrt(lm)
    lo, hi = s * L, 3.0 * L
    need = c_prime * m ** (1.0 - s * s)
    hits = 0
    total = 0
    for i in range(int(trials)):
        x = chunk_generator(seed, i).standard_normal(int(m))
        cnt = int(np.sum((x >= lo) & (x <= hi)))
        total += cnt
        if cnt >= need:
            hits += 1
    return OrderStatsResult(hits / trials, need, total / trials, (lo, hi), int(trials))
