"""Gauge-ball projections and hull gauges.

The convex hull of a unit ball K with a Euclidean ball of radius t has a
gauge equal to the infimal convolution of the two gauges.  Fixing the
K-budget s reduces the evaluation to a one-dimensional convex problem

    g(s) = s + dist(x, s*K) / t,      0 <= s <= gauge_K(x),

solved by golden section in general.  For weighted 1-norm and sup-norm
balls dist(x, s*K) is piecewise quadratic in the scalarization variable,
so the minimum is found exactly from per-segment quadratics.  For smooth
p-norm balls the joint optimality system collapses to a scalar root-find
in the proportionality constant of (a_i - v_i) = c * v_i^(p-1), handled
by a bracketed Newton iteration.  All batch variants are vectorized
across samples and are what the Monte Carlo estimators call.
"""

from __future__ import annotations

import math

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


# ---------------------------------------------------------------------------
# projections onto scaled p-norm balls


def project_p2(x, w, s):
    """Project x onto {u : w * |u|_2 <= s} (uniform weight w)."""
    r = s / w
    nx = float(np.linalg.norm(x))
    if nx <= r:
        return x.copy()
    return x * (r / nx)


def project_p2_weighted(x, w, s):
    """Project x onto the ellipsoid {u : sum (w_i u_i)^2 <= s^2}."""
    z = np.sum((w * x) ** 2)
    if z <= s * s:
        return x.copy()
    # u_i = x_i / (1 + lam w_i^2), lam >= 0 chosen to activate the constraint
    lo, hi = 0.0, 1.0
    while np.sum((w * x / (1.0 + hi * w * w)) ** 2) > s * s:
        hi *= 2.0
        if hi > 1e300:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.sum((w * x / (1.0 + mid * w * w)) ** 2) > s * s:
            lo = mid
        else:
            hi = mid
    return x / (1.0 + hi * w * w)


def project_pinf(x, w, s):
    """Project x onto {u : max_i w_i |u_i| <= s} by coordinate clipping."""
    cap = s / (w if w is not None else 1.0)
    return np.clip(x, -cap, cap)


def project_p1(x, w, s):
    """Project x onto {u : sum_i w_i |u_i| <= s} by sorted soft threshold."""
    a = np.abs(x)
    wv = np.broadcast_to(np.asarray(w if w is not None else 1.0, dtype=float), a.shape)
    if float(np.sum(wv * a)) <= s:
        return x.copy()
    # u_i = sign(x_i) max(a_i - mu w_i, 0); find mu making the budget tight
    z = a / wv
    order = np.argsort(-z)
    zs = z[order]
    cw = np.cumsum((wv * a)[order])
    c2 = np.cumsum((wv * wv)[order])
    mu_cand = (cw - s) / c2
    mu = mu_cand[-1]
    for k in range(len(zs)):
        lo_b = zs[k + 1] if k + 1 < len(zs) else 0.0
        if lo_b - 1e-15 <= mu_cand[k] <= zs[k] + 1e-15:
            mu = mu_cand[k]
            break
    mu = max(float(mu), 0.0)
    return np.sign(x) * np.maximum(a - mu * wv, 0.0)


def project_pgen(x, p, w, s, tol=1e-12):
    """Project x onto {u : sum (w_i |u_i|)^p <= s^p} for general p in (1, inf).

    KKT gives v_i + c_i v_i^(p-1) = a_i with c_i = mu w_i^p; the constraint
    norm is strictly decreasing in mu, so an outer bisection on mu with a
    bracketed Newton inner solve per coordinate pins the multiplier.
    """
    a = np.abs(x)
    wv = np.broadcast_to(np.asarray(w if w is not None else 1.0, dtype=float), a.shape).astype(float)
    if float(np.sum((wv * a) ** p)) <= s**p:
        return x.copy()
    pm1 = p - 1.0
    wp = wv**p

    def solve_v(mu):
        c = mu * wp
        hi = np.minimum(a, (a / np.maximum(c, 1e-300)) ** (1.0 / pm1))
        lo = np.zeros_like(a)
        v = hi.copy()
        for _ in range(16):
            vs = np.maximum(v, 1e-300)
            f = v + c * vs**pm1 - a
            lo = np.where(f < 0, v, lo)
            hi = np.where(f > 0, v, hi)
            fp = 1.0 + c * pm1 * vs ** (p - 2.0)
            vn = v - f / fp
            bad = ~np.isfinite(vn) | (vn <= lo) | (vn >= hi)
            v = np.where(bad, 0.5 * (lo + hi), vn)
        return v

    sp = s**p
    lo_m, hi_m = 0.0, 1.0
    for _ in range(200):
        if float(np.sum((wv * solve_v(hi_m)) ** p)) <= sp:
            break
        hi_m *= 4.0
    for _ in range(60):
        mid = 0.5 * (lo_m + hi_m)
        if float(np.sum((wv * solve_v(mid)) ** p)) > sp:
            lo_m = mid
        else:
            hi_m = mid
        if hi_m - lo_m <= tol * max(1.0, hi_m):
            break
    return np.sign(x) * solve_v(hi_m)


def project_facets(A, x, s, gram=None):
    """Project x onto s * {u : |<a_j, u>| <= 1} by a primal active set.

    The iterate stays feasible throughout: each step moves toward the
    equality-constrained minimizer of the working set and stops at the
    first blocking facet, so early exits still give valid (upper-bound)
    distances.  Returns (u, multipliers) with u = x - A.T @ multipliers
    at convergence.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    q = A @ x
    Q = gram if gram is not None else A @ A.T
    lam = np.zeros(m)
    gx = float(np.max(np.abs(q)))
    if gx <= s:
        return x.copy(), lam
    u = x * (s / gx)
    au = q * (s / gx)
    work: list[int] = []
    signs: list[float] = []
    sol = np.zeros(0)
    for _ in range(3 * m + 60):
        idx = np.array(work, dtype=int)
        sg = np.array(signs)
        if work:
            M = (sg[:, None] * sg[None, :]) * Q[np.ix_(idx, idx)]
            rhs = sg * q[idx] - s
            try:
                sol = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError:
                work.pop()
                signs.pop()
                continue
            u_eq = x - A[idx].T @ (sg * sol)
            au_eq = q - Q[:, idx] @ (sg * sol)
        else:
            sol = np.zeros(0)
            u_eq = x
            au_eq = q
        d = u_eq - u
        if float(d @ d) <= 1e-24 * (1.0 + float(u @ u)):
            if sol.size == 0 or float(np.min(sol)) >= -1e-10:
                break
            drop = int(np.argmin(sol))
            work.pop(drop)
            signs.pop(drop)
            continue
        ad = au_eq - au
        alpha = 1.0
        blocker = -1
        bsign = 1.0
        for j in range(m):
            if j in work:
                continue
            if ad[j] > 1e-14:
                bound = (s - au[j]) / ad[j]
            elif ad[j] < -1e-14:
                bound = (-s - au[j]) / ad[j]
            else:
                continue
            if bound < alpha - 1e-15:
                alpha = max(bound, 0.0)
                blocker = j
                bsign = 1.0 if ad[j] > 0 else -1.0
        u = u + alpha * d
        au = au + alpha * ad
        if blocker >= 0 and len(work) < n + 2:
            work.append(blocker)
            signs.append(bsign)
    if work:
        idx = np.array(work, dtype=int)
        lam[idx] = np.array(signs) * sol
    return u, lam


# ---------------------------------------------------------------------------
# scalarized hull gauge, single point


def golden_min(f, lo, hi, tol=1e-9):
    """Golden-section minimum of a convex f on [lo, hi].

    Returns (s_best, f_best) over all evaluated points, endpoints included.
    """
    best_s, best_f = lo, f(lo)
    f_hi = f(hi)
    if f_hi < best_f:
        best_s, best_f = hi, f_hi
    h = hi - lo
    if h <= tol:
        return best_s, best_f
    s1 = lo + _INVPHI2 * h
    s2 = lo + _INVPHI * h
    f1, f2 = f(s1), f(s2)
    n_iter = int(math.ceil(math.log(tol / h) / math.log(_INVPHI)))
    for _ in range(min(max(n_iter, 1), 200)):
        if f1 <= f2:
            hi, s2, f2 = s2, s1, f1
            h = hi - lo
            s1 = lo + _INVPHI2 * h
            f1 = f(s1)
        else:
            lo, s1, f1 = s1, s2, f2
            h = hi - lo
            s2 = lo + _INVPHI * h
            f2 = f(s2)
        if f1 < best_f:
            best_s, best_f = s1, f1
        if f2 < best_f:
            best_s, best_f = s2, f2
        if h <= tol:
            break
    return best_s, best_f


def hull_value_single(x, t, gauge_x, project_fn, tol=1e-9):
    """Hull gauge of x for inner ball K and Euclidean radius t.

    project_fn(x, s) must project onto s*K.  Returns (value, s_star, u_star).
    """
    nx = float(np.linalg.norm(x))
    if nx == 0.0 or gauge_x == 0.0:
        return 0.0, 0.0, np.zeros_like(np.asarray(x, dtype=float))

    def g(s):
        if s <= 0.0:
            return nx / t
        u = project_fn(x, s)
        return s + float(np.linalg.norm(x - u)) / t

    s_star, value = golden_min(g, 0.0, gauge_x, tol=tol)
    u_star = project_fn(x, s_star) if s_star > 0 else np.zeros_like(np.asarray(x, dtype=float))
    return value, s_star, u_star


# ---------------------------------------------------------------------------
# batch hull gauges for p-norm inner balls


def _segment_values(s_cand, k_cand, C0, C1, C2, t):
    """g at candidate scalarization points using per-segment cumulants."""
    c0 = np.take_along_axis(C0, k_cand, axis=1)
    c1 = np.take_along_axis(C1, k_cand, axis=1)
    c2 = np.take_along_axis(C2, k_cand, axis=1)
    d2 = c2 - 2.0 * s_cand * c1 + s_cand * s_cand * c0
    return s_cand + np.sqrt(np.maximum(d2, 0.0)) / t


def hull_batch_pinf(X, w, t, want_arg=False):
    """Hull gauge for a weighted sup-norm inner ball, vectorized over rows.

    With want_arg, also returns the minimizing split point u in the inner
    ball scaled by the optimal budget.
    """
    X = np.asarray(X, dtype=float)
    a = np.abs(X)
    nb, n = a.shape
    if w is None:
        z = a
        bs = np.ones_like(a)
    else:
        wv = np.asarray(w, dtype=float)
        z = a * wv
        bs = np.broadcast_to(1.0 / (wv * wv), a.shape)
    order = np.argsort(-z, axis=1)
    zs = np.take_along_axis(z, order, axis=1)
    bs = np.take_along_axis(np.ascontiguousarray(bs), order, axis=1)
    C0 = np.cumsum(bs, axis=1)
    C1 = np.cumsum(bs * zs, axis=1)
    C2 = np.cumsum(bs * zs * zs, axis=1)
    t2 = t * t

    # stationary points per active segment: (C1 - s C0)^2 = t^2 (C2 - 2 s C1 + s^2 C0)
    Aq = C0 * (C0 - t2)
    Bq = -2.0 * C1 * (C0 - t2)
    Cq = C1 * C1 - t2 * C2
    disc = Bq * Bq - 4.0 * Aq * Cq
    ok = (disc >= 0.0) & (np.abs(Aq) > 1e-300)
    sq = np.sqrt(np.maximum(disc, 0.0))
    denom = np.where(ok, 2.0 * Aq, 1.0)
    roots = np.stack([(-Bq + sq) / denom, (-Bq - sq) / denom], axis=2)
    seg_lo = np.concatenate([zs[:, 1:], np.zeros((nb, 1))], axis=1)
    in_seg = (roots >= seg_lo[:, :, None] - 1e-15) & (roots <= zs[:, :, None] + 1e-15)
    resid = C1[:, :, None] - roots * C0[:, :, None]
    valid = ok[:, :, None] & in_seg & (resid >= -1e-12)
    # invalid roots collapse onto the segment kink, where the segment
    # cumulants still evaluate g exactly
    roots = np.where(valid, roots, zs[:, :, None])

    k_seg = np.broadcast_to(np.arange(n)[None, :, None], roots.shape)
    cand_s = np.concatenate([roots.reshape(nb, -1), zs, np.zeros((nb, 1))], axis=1)
    cand_k = np.concatenate(
        [
            np.ascontiguousarray(k_seg).reshape(nb, -1),
            np.broadcast_to(np.arange(n)[None, :], zs.shape),
            np.full((nb, 1), n - 1, dtype=np.intp),
        ],
        axis=1,
    ).astype(np.intp)
    cand_s = np.clip(cand_s, 0.0, zs[:, :1])
    vals = _segment_values(cand_s, cand_k, C0, C1, C2, t)
    zero = zs[:, 0] == 0.0
    if not want_arg:
        out = np.min(vals, axis=1)
        out[zero] = 0.0
        return out
    idx = np.argmin(vals, axis=1)
    out = vals[np.arange(nb), idx]
    out[zero] = 0.0
    s_star = cand_s[np.arange(nb), idx]
    cap = s_star[:, None] / (wv if w is not None else 1.0)
    u = np.clip(X, -cap, cap)
    u[zero] = 0.0
    return out, u


def hull_batch_p1(X, w, t, want_arg=False):
    """Hull gauge for a weighted 1-norm inner ball, vectorized over rows.

    The scalarization variable is the soft-threshold level mu; on the
    segment where the top k coordinates (ordered by |x_i| / w_i) remain
    active the objective is S1_k - mu W2_k + sqrt(mu^2 W2_k + T2_k) / t.
    With want_arg, also returns the minimizing split point u.
    """
    a = np.abs(np.asarray(X, dtype=float))
    nb, n = a.shape
    wv = np.asarray(w, dtype=float) if w is not None else np.ones(n)
    wb = np.broadcast_to(wv, a.shape)
    z = a / wb
    order = np.argsort(-z, axis=1)
    zs = np.take_along_axis(z, order, axis=1)
    wa = np.take_along_axis(wb * a, order, axis=1)
    w2 = np.take_along_axis(np.broadcast_to(wv * wv, a.shape).copy(), order, axis=1)
    a2s = np.take_along_axis(a * a, order, axis=1)
    S1 = np.cumsum(wa, axis=1)
    W2 = np.cumsum(w2, axis=1)
    tot = np.sum(a2s, axis=1, keepdims=True)
    T2 = tot - np.cumsum(a2s, axis=1)

    t2 = t * t
    denom = 1.0 - t2 * W2
    ok = denom > 1e-300
    mu_root = np.where(ok, t * np.sqrt(np.maximum(T2, 0.0) / np.where(ok, denom, 1.0)), -1.0)
    seg_lo = np.concatenate([zs[:, 1:], np.zeros((nb, 1))], axis=1)
    valid = ok & (mu_root >= seg_lo - 1e-15) & (mu_root <= zs + 1e-15)
    # invalid roots collapse onto the segment kink, a valid evaluation point
    mu_root = np.where(valid, mu_root, zs)

    def g_at(mu, k):
        s1 = np.take_along_axis(S1, k, axis=1)
        ww = np.take_along_axis(W2, k, axis=1)
        tt = np.take_along_axis(T2, k, axis=1)
        val = s1 - mu * ww + np.sqrt(np.maximum(mu * mu * ww + tt, 0.0)) / t
        return val

    ks = np.broadcast_to(np.arange(n)[None, :], (nb, n)).astype(np.intp)
    cand_mu = np.concatenate([mu_root, zs, np.zeros((nb, 1))], axis=1)
    cand_k = np.concatenate([ks, ks, np.full((nb, 1), n - 1, dtype=np.intp)], axis=1)
    vals = g_at(cand_mu, cand_k)
    # u = 0 endpoint: give up the inner ball entirely (mu beyond every threshold)
    vals = np.concatenate([vals, np.sqrt(tot) / t], axis=1)
    cand_mu = np.concatenate([cand_mu, zs[:, :1] * (1.0 + 1e-12)], axis=1)
    zero = tot[:, 0] == 0.0
    if not want_arg:
        out = np.min(vals, axis=1)
        out[zero] = 0.0
        return out
    idx = np.argmin(vals, axis=1)
    out = vals[np.arange(nb), idx]
    out[zero] = 0.0
    mu_star = cand_mu[np.arange(nb), idx]
    u = np.sign(np.asarray(X, dtype=float)) * np.maximum(a - mu_star[:, None] * wb, 0.0)
    u[zero] = 0.0
    return out, u


def hull_batch_p2(X, w, t, want_arg=False):
    """Hull gauge for a uniformly weighted Euclidean inner ball."""
    X = np.asarray(X, dtype=float)
    nx = np.linalg.norm(X, axis=1)
    scale = min(w, 1.0 / t)
    vals = scale * nx
    if not want_arg:
        return vals
    u = X.copy() if w <= 1.0 / t else np.zeros_like(X)
    return vals, u


def hull_batch_pgen(X, p, w, t, n_outer=26, want_arg=False):
    """Hull gauge for a smooth p-norm inner ball with uniform weight w.

    Stationarity couples all coordinates through one scalar c in
    a_i - v_i = c v_i^(p-1); psi(c) = c s^(p-1) - t w r crosses zero at the
    optimum.  A bracketed Newton iteration on log c, warm-starting the
    per-coordinate solves, evaluates a feasible split at every step, so the
    running minimum is always an upper bound that converges to the value.
    With want_arg, also returns the minimizing split point u.
    """
    X = np.asarray(X, dtype=float)
    a = np.abs(X)
    nb, n = a.shape
    pm1 = p - 1.0
    ga = w * np.sum(a**p, axis=1) ** (1.0 / p)
    na = np.linalg.norm(a, axis=1)
    at_gauge = ga <= na / t
    best = np.where(at_gauge, ga, na / t)
    if want_arg:
        u_best = np.where(at_gauge[:, None], X, 0.0)

    q = p / pm1
    # psi signs at the bracket ends decide whether an interior root exists
    psi_lo = np.sum(a**p, axis=1) ** (pm1 / p) - t * w * np.sqrt(np.sum(a ** (2.0 * pm1), axis=1))
    psi_hi = np.sum(a**q, axis=1) ** (1.0 / q) - t * w * na
    need = (psi_lo < 0.0) & (psi_hi > 0.0) & (na > 0.0)
    if not np.any(need):
        return (best, u_best) if want_arg else best

    aa = a[need]
    lcl = np.full(aa.shape[0], math.log(max(t, 1e-6)) - 36.0)
    lch = np.full(aa.shape[0], math.log(max(t, 1e-6)) + 36.0)
    lc = 0.5 * (lcl + lch)
    v = np.minimum(aa, 1.0)
    bloc = best[need]
    vloc = aa * 0.0 if not want_arg else np.where(at_gauge[need][:, None], aa, 0.0)
    newton_safe = p >= 2.0

    for outer in range(n_outer):
        c = np.exp(lc)[:, None]
        if outer == 0:
            v = np.minimum(aa, (aa / np.maximum(c, 1e-300)) ** (1.0 / pm1))
            inner = 30
        else:
            inner = 4
        if newton_safe:
            for _ in range(inner):
                vp2 = v ** (p - 2.0)
                f = v + c * vp2 * v - aa
                fp = 1.0 + c * pm1 * vp2
                v = np.maximum(v - f / fp, 0.0)
        else:
            lo_v = np.zeros_like(aa)
            hi_v = np.minimum(aa, (aa / np.maximum(c, 1e-300)) ** (1.0 / pm1))
            vv = hi_v.copy()
            for _ in range(40):
                vs = np.maximum(vv, 1e-300)
                f = vv + c * vs**pm1 - aa
                lo_v = np.where(f < 0, vv, lo_v)
                hi_v = np.where(f > 0, vv, hi_v)
                fp = 1.0 + c * pm1 * vs ** (p - 2.0)
                vn = vv - f / fp
                bad = ~np.isfinite(vn) | (vn <= lo_v) | (vn >= hi_v)
                vv = np.where(bad, 0.5 * (lo_v + hi_v), vn)
            v = vv
        vp1 = v**pm1
        sv = np.sum(v * vp1, axis=1)
        s = np.maximum(sv, 1e-300) ** (1.0 / p)
        r = np.sqrt(np.sum((aa - v) ** 2, axis=1))
        val = w * s + r / t
        if want_arg:
            better = val < bloc
            vloc = np.where(better[:, None], v, vloc)
            bloc = np.where(better, val, bloc)
        else:
            bloc = np.minimum(bloc, val)
        cflat = np.exp(lc)
        sp1 = sv / np.maximum(s, 1e-300)
        psi = cflat * sp1 - t * w * r
        lcl = np.where(psi < 0.0, lc, lcl)
        lch = np.where(psi < 0.0, lch, lc)
        # Newton step on log c, clipped into the live bracket
        fp_flat = 1.0 + cflat[:, None] * pm1 * np.where(v > 0, v, 1.0) ** (p - 2.0)
        Sv = -np.sum(vp1 * vp1 / fp_flat, axis=1)
        dpsi = sp1 + pm1 * cflat * Sv / np.maximum(s, 1e-300) + t * w * cflat * Sv / np.maximum(r, 1e-300)
        step_ok = np.abs(dpsi * cflat) > 1e-300
        lc_new = np.where(step_ok, lc - psi / np.where(step_ok, dpsi * cflat, 1.0), 0.5 * (lcl + lch))
        inside = (lc_new > lcl) & (lc_new < lch)
        lc = np.where(inside, lc_new, 0.5 * (lcl + lch))

    best[need] = bloc
    if not want_arg:
        return best
    u_best[need] = np.sign(X[need]) * vloc
    return best, u_best
