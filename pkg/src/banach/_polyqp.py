"""Hull-gauge kernels for facet polytopes.

For one sample x the hull gauge is min over s of phi_t(s) = s + d(s)/t,
where d(s) = |x - P_{sK}(x)| is convex and non-increasing in s.  Every
projection also yields the envelope derivative d'(s) = -<x-u, u>/(s d), so
a safeguarded tangent-intersection iteration on d'(s) = -t brackets the
minimizer with a certified value gap from crossing tangents; because d is
piecewise smooth in s (active sets change at breakpoints) the iteration
usually lands on the exact stationary point after a handful of solves.

All t values of a grid share one evaluation table per sample (phi_t differs
only through the 1/t factor), and a final sweep over the shared table makes
the reported values exactly monotone in t sample by sample, which the
monotonicity checks downstream rely on.

The projection is a primal active-set solve whose iterate stays feasible,
so every evaluation is a valid upper bound even when the working set or the
iteration count is capped, and there is no cycling at degenerate vertices.
The iterate lives purely in multiplier space: with the facet Gram matrix Q
precomputed, constraint values, distances and the envelope derivative all
come from Q rows and the working-set system, so no O(n) work appears inside
the iteration and the per-sample inner products A x arrive from one BLAS
call upstream.  The working-set system matrix depends on the set alone, not
on s, so one Cholesky factor persists across evaluations of a sample and is
border-extended when a constraint joins.  Atoms dropped from the working
set can still carry weight in the iterate; they stay dormant until the next
full step rebuilds the weights, or are re-activated if they block again.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_BLOCK = 128


@njit(cache=True)
def _chol_refactor(Q, S, sgS, k, L):
    """Cholesky of the working-set Gram matrix.  Returns the first row
    index whose pivot collapses (numerically dependent), or -1 on success."""
    for i in range(k):
        for j in range(i + 1):
            acc = sgS[i] * sgS[j] * Q[S[i], S[j]]
            for p in range(j):
                acc -= L[i, p] * L[j, p]
            if j == i:
                if acc <= 1e-12:
                    return i
                L[i, i] = np.sqrt(acc)
            else:
                L[i, j] = acc / L[j, j]
    return -1


@njit(cache=True)
def _chol_border(Q, S, sgS, k, L):
    """Extend the factor by the row for atom S[k].  False if dependent."""
    for i in range(k):
        acc = sgS[k] * sgS[i] * Q[S[k], S[i]]
        for p in range(i):
            acc -= L[k, p] * L[i, p]
        L[k, i] = acc / L[i, i]
    acc = Q[S[k], S[k]]
    for p in range(k):
        acc -= L[k, p] * L[k, p]
    if acc <= 1e-12:
        return False
    L[k, k] = np.sqrt(acc)
    return True


@njit(cache=True)
def _chol_solve(L, k, rhs, sol):
    for i in range(k):
        acc = rhs[i]
        for p in range(i):
            acc -= L[i, p] * sol[p]
        sol[i] = acc / L[i, i]
    for i in range(k - 1, -1, -1):
        acc = sol[i]
        for p in range(i + 1, k):
            acc -= L[p, i] * sol[p]
        sol[i] = acc / L[i, i]


@njit(cache=True)
def _eval_d(Q, q, nx2, s, s_prev, rho, au, S, sgS, coef, k, ns, L, inw, rhs,
            sol, tmp, maxit):
    """Distance from x to s*K and its s-derivative, warm-starting from s_prev.

    The iterate is rho * x - sum_a coef[a] * sgS[a] * a_{S[a]} (the scalar
    rho makes the cold start u = 0 representable); S[:k] is the working set
    (active, factor L matches it), S[k:ns] carries dormant atoms that still
    hold weight.  au tracks the constraint values of the iterate and nx2 is
    |x|^2.  Returns (d, dp, k, ns, rho).
    """
    m = Q.shape[0]
    kcap = L.shape[0]
    scap = S.shape[0]
    if s_prev > 0.0:
        c = s / s_prev
        rho *= c
        for a in range(ns):
            coef[a] *= c
        for j in range(m):
            au[j] *= c
    else:
        for a in range(ns):
            inw[S[a]] = False
        k = 0
        ns = 0
        rho = 0.0
        for j in range(m):
            au[j] = 0.0
    converged = False
    for _ in range(maxit):
        for a in range(k):
            rhs[a] = sgS[a] * q[S[a]] - s
        _chol_solve(L, k, rhs, sol)
        # constraint values at the working-set minimizer, streamed from
        # contiguous Gram rows
        for j in range(m):
            tmp[j] = q[j]
        for a in range(k):
            w = sol[a] * sgS[a]
            if w != 0.0:
                row = Q[S[a]]
                for j in range(m):
                    tmp[j] -= w * row[j]
        alpha = 1.0
        blocker = -1
        bsign = 1.0
        for j in range(m):
            if inw[j]:
                continue
            ad = tmp[j] - au[j]
            if ad > 1e-14:
                bound = (s - au[j]) / ad
            elif ad < -1e-14:
                bound = (-s - au[j]) / ad
            else:
                continue
            if bound < alpha - 1e-15:
                alpha = bound if bound > 0.0 else 0.0
                blocker = j
                bsign = 1.0 if ad > 0.0 else -1.0
        if blocker < 0:
            # full step onto the minimizer; dormant weight clears
            for j in range(m):
                au[j] = tmp[j]
            for a in range(k):
                coef[a] = sol[a]
            rho = 1.0
            ns = k
            ndrop = 0
            a = 0
            while a < k:
                if coef[a] < -1e-10:
                    # out of the working set, weight kept dormant
                    wi = S[a]
                    ws = sgS[a]
                    wc = coef[a]
                    for b in range(a, k - 1):
                        S[b] = S[b + 1]
                        sgS[b] = sgS[b + 1]
                        coef[b] = coef[b + 1]
                    S[k - 1] = wi
                    sgS[k - 1] = ws
                    coef[k - 1] = wc
                    inw[wi] = False
                    k -= 1
                    ndrop += 1
                else:
                    a += 1
            if ndrop == 0:
                converged = True
                break
            while True:
                bad = _chol_refactor(Q, S, sgS, k, L)
                if bad < 0:
                    break
                wi = S[bad]
                ws = sgS[bad]
                wc = coef[bad]
                for b in range(bad, ns - 1):
                    S[b] = S[b + 1]
                    sgS[b] = sgS[b + 1]
                    coef[b] = coef[b + 1]
                S[ns - 1] = wi
                sgS[ns - 1] = ws
                coef[ns - 1] = wc
                inw[wi] = False
                k -= 1
            continue
        # partial step toward the minimizer, then admit the blocker
        for j in range(m):
            au[j] += alpha * (tmp[j] - au[j])
        rho += alpha * (1.0 - rho)
        for a in range(k):
            coef[a] += alpha * (sol[a] - coef[a])
        for a in range(k, ns):
            coef[a] *= 1.0 - alpha
        if k >= kcap:
            break
        pos = -1
        for a in range(k, ns):
            if S[a] == blocker:
                pos = a
                break
        if pos >= 0:
            if pos != k:
                S[pos] = S[k]
                ti_ = sgS[pos]
                sgS[pos] = sgS[k]
                ci_ = coef[pos]
                coef[pos] = coef[k]
                S[k] = blocker
                sgS[k] = ti_
                coef[k] = ci_
            if sgS[k] != bsign:
                sgS[k] = bsign
                coef[k] = -coef[k]
        else:
            if ns >= scap:
                break
            for a in range(ns, k, -1):
                S[a] = S[a - 1]
                sgS[a] = sgS[a - 1]
                coef[a] = coef[a - 1]
            ns += 1
            S[k] = blocker
            sgS[k] = bsign
            coef[k] = 0.0
        if not _chol_border(Q, S, sgS, k, L):
            # dependent with the working set: put it back among the dormant
            wi = S[k]
            ws = sgS[k]
            wc = coef[k]
            for a in range(k, ns - 1):
                S[a] = S[a + 1]
                sgS[a] = sgS[a + 1]
                coef[a] = coef[a + 1]
            S[ns - 1] = wi
            sgS[ns - 1] = ws
            coef[ns - 1] = wc
            break
        inw[blocker] = True
        k += 1
    if converged:
        d2 = 0.0
        xq = 0.0
        for a in range(k):
            d2 += sol[a] * rhs[a]
            xq += sol[a] * sgS[a] * q[S[a]]
    else:
        # x - u = (1 - rho) x + sum coef sg a
        w0 = 1.0 - rho
        d2 = w0 * w0 * nx2
        xq = w0 * nx2
        for a in range(ns):
            wa = coef[a] * sgS[a]
            xq += wa * q[S[a]]
            acc = 2.0 * w0 * q[S[a]]
            for b in range(ns):
                acc += coef[b] * sgS[b] * Q[S[a], S[b]]
            d2 += wa * acc
    if d2 < 0.0:
        d2 = 0.0
    d = np.sqrt(d2)
    xu = xq - d2
    if d > 1e-300 and s > 0.0:
        dp = -xu / (s * d)
        if dp > 0.0:
            dp = 0.0
    else:
        dp = 0.0
    return d, dp, k, ns, rho


@njit(cache=True)
def _curve_solve_t(Q, q, gx, nx, t, se, de, dpe, ne, rho, au, S, sgS, coef,
                   k, ns, L, inw, rhs, sol, tmp, s_prev, rel_tol, budget, maxit):
    """Minimize phi_t over s, reusing and extending the shared curve table.

    Rows of (se, de, dpe) are prior evaluations of d; row 0 is the exact
    endpoint (0, |x|) whose derivative is unknown (dpe nan), row 1 the exact
    endpoint (gauge, 0).  Returns (value, argmin s, ne, k, ns, rho, s_prev).
    """
    a = 0.0
    da = nx
    dpa = np.nan
    b = gx
    db = 0.0
    dpb = 0.0
    U = gx
    sU = gx
    if nx / t < U:
        U = nx / t
        sU = 0.0
    for e in range(ne):
        val = se[e] + de[e] / t
        if val < U:
            U = val
            sU = se[e]
        dpv = dpe[e]
        if not np.isnan(dpv):
            if dpv < -t:
                if se[e] >= a:
                    a = se[e]
                    da = de[e]
                    dpa = dpv
            else:
                if se[e] <= b:
                    b = se[e]
                    db = de[e]
                    dpb = dpv
    evals = 0
    while evals < budget:
        if b - a <= 1e-12 * gx:
            break
        # tangents of d at the bracket ends under-estimate d by convexity;
        # their crossing bounds min phi from below inside [a, b]
        if not np.isnan(dpa):
            denom = dpa - dpb
            if denom < -1e-300:
                sx = (db - da + dpa * a - dpb * b) / denom
                if sx < a:
                    sx = a
                if sx > b:
                    sx = b
                la = sx + (da + dpa * (sx - a)) / t
                lb = sx + (db + dpb * (sx - b)) / t
                L_ = la if la > lb else lb
            else:
                sx = 0.5 * (a + b)
                la = b + (da + dpa * (b - a)) / t
                lb = a + (db + dpb * (a - b)) / t
                L_ = la if la > lb else lb
        else:
            L_ = a + (db + dpb * (a - b)) / t
            sx = 0.5 * (a + b)
        if U - L_ <= rel_tol * U + 1e-14:
            break
        snew = sx
        wsafe = 0.05 * (b - a)
        if snew < a + wsafe:
            snew = a + wsafe
        if snew > b - wsafe:
            snew = b - wsafe
        d, dp, k, ns, rho = _eval_d(Q, q, nx * nx, snew, s_prev, rho, au, S,
                                    sgS, coef, k, ns, L, inw, rhs, sol, tmp,
                                    maxit)
        s_prev = snew
        evals += 1
        if ne < se.shape[0]:
            se[ne] = snew
            de[ne] = d
            dpe[ne] = dp
            ne += 1
        val = snew + d / t
        if val < U:
            U = val
            sU = snew
        if dp < -t:
            a = snew
            da = d
            dpa = dp
        else:
            b = snew
            db = d
            dpb = dp
    return U, sU, ne, k, ns, rho, s_prev


@njit(cache=True, parallel=True)
def facet_hull_values(Q, QX, NX, ts, rel_tol, kcap, budget, maxit):
    """Hull gauge at every t in ts for every sample (one curve per sample).

    QX rows hold the facet inner products A x of each sample (from one BLAS
    product upstream), NX the Euclidean norms |x|.
    """
    nb = QX.shape[0]
    m = Q.shape[0]
    nt = ts.shape[0]
    out = np.empty((nb, nt))
    tabcap = 2 + budget * nt
    scap = kcap + 16
    nblk = (nb + _BLOCK - 1) // _BLOCK
    for blk in prange(nblk):
        S = np.empty(scap, dtype=np.int64)
        sgS = np.empty(scap)
        coef = np.zeros(scap)
        L = np.empty((kcap, kcap))
        rhs = np.empty(kcap)
        sol = np.empty(kcap)
        tmp = np.empty(m)
        au = np.zeros(m)
        inw = np.zeros(m, dtype=np.bool_)
        se = np.empty(tabcap)
        de = np.empty(tabcap)
        dpe = np.empty(tabcap)
        k = 0
        ns = 0
        rho = 0.0
        i0 = blk * _BLOCK
        i1 = min(nb, i0 + _BLOCK)
        for i in range(i0, i1):
            q = QX[i]
            nx = NX[i]
            gx = 0.0
            for j in range(m):
                aq = abs(q[j])
                if aq > gx:
                    gx = aq
            if gx <= 0.0:
                for ti in range(nt):
                    out[i, ti] = 0.0
                continue
            se[0] = 0.0
            de[0] = nx
            dpe[0] = np.nan
            se[1] = gx
            de[1] = 0.0
            dpe[1] = 0.0
            ne = 2
            s_prev = -1.0
            for ti in range(nt):
                _U, _sU, ne, k, ns, rho, s_prev = _curve_solve_t(
                    Q, q, gx, nx, ts[ti], se, de, dpe, ne, rho, au, S, sgS,
                    coef, k, ns, L, inw, rhs, sol, tmp, s_prev, rel_tol,
                    budget, maxit)
            # one sweep over the shared table keeps values exactly monotone
            # in t (and t*value monotone the other way) for every sample
            for ti in range(nt):
                t = ts[ti]
                U = gx
                for e in range(ne):
                    val = se[e] + de[e] / t
                    if val < U:
                        U = val
                out[i, ti] = U
            for a in range(ns):
                inw[S[a]] = False
            k = 0
            ns = 0
            rho = 0.0
            for j in range(m):
                au[j] = 0.0
    return out


@njit(cache=True, parallel=True)
def facet_hull_argmin(A, Q, QX, X, NX, t, rel_tol, kcap, budget, maxit):
    """Hull gauge plus the optimal split point of each sample at a single t.

    Returns (values, s at the optimum, body-side split points U); the
    residual x - U[i] scaled by 1/(t*d) is the ball-side dual direction.
    """
    nb = QX.shape[0]
    m, n = A.shape
    out = np.empty(nb)
    sopt = np.empty(nb)
    Uopt = np.empty((nb, n))
    tabcap = 2 + budget
    scap = kcap + 16
    nblk = (nb + _BLOCK - 1) // _BLOCK
    for blk in prange(nblk):
        S = np.empty(scap, dtype=np.int64)
        sgS = np.empty(scap)
        coef = np.zeros(scap)
        L = np.empty((kcap, kcap))
        rhs = np.empty(kcap)
        sol = np.empty(kcap)
        tmp = np.empty(m)
        au = np.zeros(m)
        inw = np.zeros(m, dtype=np.bool_)
        se = np.empty(tabcap)
        de = np.empty(tabcap)
        dpe = np.empty(tabcap)
        k = 0
        ns = 0
        rho = 0.0
        i0 = blk * _BLOCK
        i1 = min(nb, i0 + _BLOCK)
        for i in range(i0, i1):
            q = QX[i]
            x = X[i]
            nx = NX[i]
            gx = 0.0
            for j in range(m):
                aq = abs(q[j])
                if aq > gx:
                    gx = aq
            if gx <= 0.0:
                out[i] = 0.0
                sopt[i] = 0.0
                for l in range(n):
                    Uopt[i, l] = 0.0
                continue
            se[0] = 0.0
            de[0] = nx
            dpe[0] = np.nan
            se[1] = gx
            de[1] = 0.0
            dpe[1] = 0.0
            ne = 2
            s_prev = -1.0
            U, sU, ne, k, ns, rho, s_prev = _curve_solve_t(
                Q, q, gx, nx, t, se, de, dpe, ne, rho, au, S, sgS, coef, k,
                ns, L, inw, rhs, sol, tmp, s_prev, rel_tol, budget, maxit)
            # the value converges quadratically in s but the residual
            # certificate only linearly, so polish the stationarity
            # d'(s) = -t by a bracketed secant before materializing u
            if 0.0 < sU < gx:
                a = 0.0
                dpa = np.nan
                b = gx
                dpb = 0.0
                for e in range(ne):
                    dpv = dpe[e]
                    if not np.isnan(dpv):
                        if dpv < -t:
                            if se[e] >= a:
                                a = se[e]
                                dpa = dpv
                        else:
                            if se[e] <= b:
                                b = se[e]
                                dpb = dpv
                if not np.isnan(dpa):
                    for _ in range(10):
                        if abs(dpb + t) <= 1e-11 * t or abs(dpa + t) <= 1e-11 * t:
                            break
                        if b - a <= 1e-14 * gx:
                            break
                        denom = dpb - dpa
                        if denom > 1e-300:
                            snew = a + (-t - dpa) * (b - a) / denom
                        else:
                            snew = 0.5 * (a + b)
                        wsafe = 0.01 * (b - a)
                        if snew < a + wsafe:
                            snew = a + wsafe
                        if snew > b - wsafe:
                            snew = b - wsafe
                        d, dp, k, ns, rho = _eval_d(Q, q, nx * nx, snew,
                                                    s_prev, rho, au, S, sgS,
                                                    coef, k, ns, L, inw, rhs,
                                                    sol, tmp, maxit)
                        s_prev = snew
                        val = snew + d / t
                        if val < U:
                            U = val
                            sU = snew
                        if dp < -t:
                            a = snew
                            dpa = dp
                        else:
                            b = snew
                            dpb = dp
                    if abs(dpa + t) < abs(dpb + t):
                        sU = a
                    else:
                        sU = b
            out[i] = U
            sopt[i] = sU
            if sU <= 0.0:
                for l in range(n):
                    Uopt[i, l] = 0.0
            elif sU >= gx:
                for l in range(n):
                    Uopt[i, l] = x[l]
            else:
                _d, _dp, k, ns, rho = _eval_d(Q, q, nx * nx, sU, s_prev, rho,
                                              au, S, sgS, coef, k, ns, L, inw,
                                              rhs, sol, tmp, maxit)
                s_prev = sU
                for l in range(n):
                    acc = rho * x[l]
                    for a_ in range(ns):
                        acc -= coef[a_] * sgS[a_] * A[S[a_], l]
                    Uopt[i, l] = acc
            for a_ in range(ns):
                inw[S[a_]] = False
            k = 0
            ns = 0
            rho = 0.0
            for j in range(m):
                au[j] = 0.0
    return out, sopt, Uopt
