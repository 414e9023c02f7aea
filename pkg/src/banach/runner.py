"""Experiment execution: grid expansion, deterministic cells, file output.

A run expands the config into cells (one per dimension x seed), executes
them - concurrently if asked - and writes one CSV row per inner grid
point, in grid order regardless of worker count.  Every number in a row
derives from the cell's seed through counter-based substreams, so the
CSV is byte-stable across thread counts and reruns.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from ._rng import chunk_generator
from .arrange import (block_decomposition, kashin_experiment, linfty_refute,
                      loc_hilbert_check, random_basis_experiment, sparsity)
from .bodies import PNormBody
from .config import ExperimentConfig
from .errors import DomainError
from .reporting import csv_columns, write_csv, write_json_summary
from .ripjl import (cotype_gap_check, gaussian_rip, general_rip,
                    hilbertian_basis, jl_sparse)
from .sphere import (_subseed, d_u_estimate, estimate_stats, lemma1_ratio,
                     order_stats_experiment, sample_orthogonal, schsch_compare,
                     small_ball)
from .svgplot import write_plot


class RunFailure(Exception):
    """Numerical failure inside a cell; partial output was flushed."""

    def __init__(self, message, csv_path=None):
        super().__init__(message)
        self.csv_path = csv_path


def _default_rip_m(n: int, k: int, eps: float) -> int:
    return int(math.ceil(4.0 * eps ** -2 * k * math.log(math.e * n / k)))


# --- one function per experiment; each returns rows in inner-grid order ---


def _run_stats(cfg, n, seed):
    body, contacts = cfg.body_for(n)
    st = estimate_stats(body, cfg.samples, rng=seed, contacts=contacts,
                        restarts=cfg.constants["restarts"])
    return [{"mean": st.mean_M, "median": st.median, "b": st.b_max,
             "q10": st.quantiles[0.1], "q25": st.quantiles[0.25],
             "q75": st.quantiles[0.75], "q90": st.quantiles[0.9],
             "stderr_mean": st.stderr_mean, "k_dvoretzky": st.k_dvoretzky,
             "pass": None}]


def _run_lemma1(cfg, n, seed):
    body, contacts = cfg.body_for(n)
    ts = [t for t in cfg.grid["t"] if 1.0 <= t <= math.sqrt(n) + 1e-12]
    if not ts:
        return []
    table = lemma1_ratio(body, ts, cfg.samples, rng=seed,
                         c_prime=cfg.constants["c_prime"], contacts=contacts)
    return [{"t": r.t, "m_t": r.m_t, "m_t_stderr": r.m_t_stderr, "b_t": r.b_t,
             "b_certified": r.b_certified, "ratio": r.ratio,
             "bound_term": r.bound_term, "c_term": r.c_term,
             "skipped": r.skipped, "fitted_c": table.fitted_c, "pass": None}
            for r in table.rows]


def _run_smallball(cfg, n, seed):
    body, _ = cfg.body_for(n)
    consts = (cfg.constants["smallball_C"], cfg.constants["smallball_c1"],
              cfg.constants["smallball_c2"])
    rows = []
    for t in cfg.grid["t"]:
        rep = small_ball(body, t, cfg.samples, rng=seed, constants=consts)
        rows.append({"t": rep.t, "estimate": rep.estimate,
                     "wilson_low": rep.wilson_low, "wilson_high": rep.wilson_high,
                     "upper95": rep.upper95, "bound": rep.bound,
                     "censored": rep.censored,
                     "pass": rep.estimate <= rep.bound})
    return rows


def _run_du(cfg, n, seed):
    body, _ = cfg.body_for(n)
    rows = []
    for u in cfg.grid["t"]:
        est = d_u_estimate(body, u, cfg.samples, rng=seed)
        rows.append({"u": u, "d_u": float(est), "censored": est.censored,
                     "lower95": est.lower95, "pass": None})
    return rows


def _run_schsch(cfg, n, seed):
    body, _ = cfg.body_for(n)
    cmp = schsch_compare(body, cfg.grid["t"], cfg.samples, rng=seed)
    rows = []
    for j, t in enumerate(cmp.t_grid):
        sb, sl = float(cmp.stderr_body[j]), float(cmp.stderr_linf[j])
        cb, cl = float(cmp.cdf_body[j]), float(cmp.cdf_linf[j])
        rows.append({"t": float(t), "cdf_body": cb, "cdf_linf": cl,
                     "stderr_body": sb, "stderr_linf": sl,
                     "pass": cb <= cl + 2.0 * (sb + sl)})
    return rows


def _run_orderstats(cfg, n, seed):
    res = order_stats_experiment(n, cfg.constants["s"], cfg.samples, rng=seed,
                                 c_window=cfg.constants["c_window"],
                                 c_prime=cfg.constants["orderstats_c_prime"])
    return [{"s": cfg.constants["s"], "frequency": float(res),
             "threshold": res.threshold, "mean_count": res.mean_count,
             "window_lo": res.window[0], "window_hi": res.window[1],
             "pass": float(res) >= 0.5}]


def _run_basis(cfg, n, seed):
    body, _ = cfg.body_for(n)
    supports = [tuple(range(k)) for k in cfg.grid["k"]]
    rows = random_basis_experiment(body, supports, cfg.samples, rng=seed,
                                   restarts=cfg.constants["restarts"])
    return [{"k": len(r.support), "lo": r.lo, "hi": r.hi, "ratio": r.ratio,
             "d_raw": r.d_raw, "t": r.t, "m_t": r.m_t, "pass": None}
            for r in rows]


def _run_kashin(cfg, n, seed):
    row = kashin_experiment(n, 1, rng=seed, n_samples=cfg.samples,
                            restarts=cfg.constants["restarts"])[0]
    worst = row.worst
    return [{"ratio_first": row.ratio_first, "ratio_second": row.ratio_second,
             "worst": worst, "pass": worst <= cfg.constants["kashin_limit"]}]


def _run_blocks(cfg, n, seed):
    body, _ = cfg.body_for(n)
    rows = []
    for k in cfg.grid.get("k", (None,)):
        for eps in cfg.grid["eps"]:
            rep = block_decomposition(body, eps, rng=seed, k=k,
                                      n_samples=cfg.samples,
                                      restarts=cfg.constants["restarts"])
            rows.append({"k": rep.k, "eps": eps, "m_sharp": rep.m_sharp,
                         "max_deviation": rep.max_deviation,
                         "max_b_scaled": rep.max_b_scaled,
                         "n_blocks": rep.n_blocks,
                         "pass": rep.max_deviation <= eps and
                                 rep.max_b_scaled <= cfg.constants["blocks_b_limit"]})
    return rows


def _run_lochilbert(cfg, n, seed):
    body, _ = cfg.body_for(n)
    basis = sample_orthogonal(n, _subseed(seed, 0)).matrix
    rows = []
    for i, k in enumerate(cfg.grid["k"]):
        for j, eps in enumerate(cfg.grid["eps"]):
            rep = loc_hilbert_check(body, basis, k, eps,
                                    n_samples=max(100, cfg.samples // 8),
                                    rng=_subseed(seed, 1 + i * 97 + j),
                                    support_cap=cfg.constants["support_cap"])
            rows.append({"k": k, "eps": eps, "violation": rep.violation,
                         "lo": rep.lo, "hi": rep.hi,
                         "witness": ";".join(str(s) for s in rep.witness_support),
                         "checked": rep.checked, "partial": rep.partial,
                         "pass": rep.violation == 0.0})
    return rows


def _refute_matrix(cfg, n, seed):
    family = cfg.constants["refute_family"]
    if family == "haar":
        return sample_orthogonal(n, seed).matrix
    if family == "permutation":
        gen = chunk_generator(seed, 0)
        P = np.eye(n)[gen.permutation(n)]
        signs = np.where(gen.random(n) < 0.5, -1.0, 1.0)
        noise = gen.standard_normal((n, n)) / math.sqrt(n)
        return P * signs + cfg.constants["refute_noise"] * noise
    raise DomainError(f"unknown refute family {family!r}")


def _run_refute(cfg, n, seed):
    T = _refute_matrix(cfg, n, seed)
    rows = []
    for eps in cfg.grid["eps"]:
        try:
            x = linfty_refute(T, eps)
            ratio = float(np.max(np.abs(T @ x))) / float(np.linalg.norm(x))
            rows.append({"eps": eps, "family": cfg.constants["refute_family"],
                         "witness_nnz": sparsity(x), "ratio_observed": ratio,
                         "side": "hi" if ratio > 1.0 else "lo",
                         "pass": abs(ratio - 1.0) > eps})
        except DomainError:
            rows.append({"eps": eps, "family": cfg.constants["refute_family"],
                         "witness_nnz": 0, "ratio_observed": math.nan,
                         "side": "", "pass": False})
    return rows


def _run_rip(cfg, n, seed):
    rows = []
    for k in cfg.grid["k"]:
        for eps in cfg.grid["eps"]:
            m = cfg.constants["rip_m"] or _default_rip_m(n, k, eps)
            rep = gaussian_rip(n, m, k, eps, rng=seed,
                               support_cap=cfg.constants["support_cap"])
            rows.append({"k": k, "eps": eps, "m": m,
                         "tested_supports": rep.tested_supports,
                         "worst_lo": rep.worst_lo, "worst_hi": rep.worst_hi,
                         "partial": rep.partial, "reason": rep.reason,
                         "pass": rep.passed})
    return rows


def _run_generalrip(cfg, n, seed):
    body, _ = cfg.body_for(n)
    rows = []
    for k in cfg.grid["k"]:
        hb = hilbertian_basis(body, k, rng=_subseed(seed, 0),
                              n_samples=max(100, cfg.samples // 4),
                              support_cap=min(64, cfg.constants["support_cap"]))
        for eps in cfg.grid["eps"]:
            m = cfg.constants["rip_m"] or 2 * n
            rep = general_rip(body, hb.matrix, PNormBody(2, m), np.eye(m),
                              k, eps, rng=seed,
                              n_samples=max(100, cfg.samples // 4),
                              restarts=max(cfg.constants["restarts"], 2),
                              support_cap=min(64, cfg.constants["support_cap"]))
            rows.append({"k": k, "eps": eps, "m": m,
                         "tested_supports": rep.tested_supports,
                         "worst_lo": rep.worst_lo, "worst_hi": rep.worst_hi,
                         "partial": rep.partial, "basis_lo": hb.lo,
                         "basis_hi": hb.hi, "basis_scale": hb.scale,
                         "pass": rep.passed})
    return rows


def _run_jl(cfg, n, seed):
    body, _ = cfg.body_for(n)
    size = cfg.constants["omega_size"]
    rows = []
    for i, k in enumerate(cfg.grid["k"]):
        gen = chunk_generator(seed, 1 + i)
        omega = np.zeros((size, n))
        for r in range(size):
            idx = gen.choice(n, size=min(k, n), replace=False)
            omega[r, idx] = gen.standard_normal(len(idx))
        if cfg.constants["jl_basis"] == "haar":
            basis = hilbertian_basis(body, k, rng=_subseed(seed, 101 + i),
                                     n_samples=max(100, cfg.samples // 4),
                                     support_cap=32).matrix
        else:
            basis = np.eye(n)
        for eps in cfg.grid["eps"]:
            rep = jl_sparse(body, basis, omega, eps, rng=seed,
                            C=cfg.constants["C_jl"], k=k)
            rows.append({"k": k, "eps": eps, "m": rep.m, "max_err": rep.max_err,
                         "pairs": rep.pairs, "pass": rep.max_err <= eps})
    return rows


def _run_cotype(cfg, n, seed):
    body, _ = cfg.body_for(n)
    rep = cotype_gap_check(body, cfg.constants["cotype_q"],
                           cfg.constants["cotype_beta"],
                           n_samples=cfg.samples, rng=seed)
    return [{"m_estimate": rep.m_estimate, "bound": rep.bound,
             "fitted_c": rep.fitted_c, "stderr": rep.stderr, "q": rep.q,
             "beta": rep.beta, "pass": rep.fitted_c > 0.0}]


@dataclass(frozen=True)
class ExperimentSpec:
    params: tuple
    metrics: tuple
    cell: callable
    plot: tuple  # (x column, y column, logx, logy)


SPECS = {
    "stats": ExperimentSpec((), ("mean", "median", "b", "q10", "q25", "q75",
                                 "q90", "stderr_mean", "k_dvoretzky"),
                            _run_stats, ("n", "mean", True, False)),
    "lemma1": ExperimentSpec(("t",), ("m_t", "m_t_stderr", "b_t", "b_certified",
                                      "ratio", "bound_term", "c_term", "skipped",
                                      "fitted_c"),
                             _run_lemma1, ("t", "ratio", True, True)),
    "smallball": ExperimentSpec(("t",), ("estimate", "wilson_low", "wilson_high",
                                         "upper95", "bound", "censored"),
                                _run_smallball, ("t", "estimate", False, True)),
    "du": ExperimentSpec(("u",), ("d_u", "censored", "lower95"),
                         _run_du, ("u", "d_u", False, False)),
    "schsch": ExperimentSpec(("t",), ("cdf_body", "cdf_linf", "stderr_body",
                                      "stderr_linf"),
                             _run_schsch, ("t", "cdf_body", False, False)),
    "orderstats": ExperimentSpec((), ("s", "frequency", "threshold",
                                      "mean_count", "window_lo", "window_hi"),
                                 _run_orderstats, ("n", "frequency", True, False)),
    "basis": ExperimentSpec(("k",), ("lo", "hi", "ratio", "d_raw", "t", "m_t"),
                            _run_basis, ("k", "ratio", False, False)),
    "kashin": ExperimentSpec((), ("ratio_first", "ratio_second", "worst"),
                             _run_kashin, ("n", "worst", True, False)),
    "blocks": ExperimentSpec(("k", "eps"), ("m_sharp", "max_deviation",
                                            "max_b_scaled", "n_blocks"),
                             _run_blocks, ("k", "max_deviation", False, False)),
    "lochilbert": ExperimentSpec(("k", "eps"), ("violation", "lo", "hi",
                                                "witness", "checked", "partial"),
                                 _run_lochilbert, ("k", "violation", False, False)),
    "refute": ExperimentSpec(("eps",), ("family", "witness_nnz",
                                        "ratio_observed", "side"),
                             _run_refute, ("eps", "ratio_observed", False, False)),
    "rip": ExperimentSpec(("k", "eps"), ("m", "tested_supports", "worst_lo",
                                         "worst_hi", "partial", "reason"),
                          _run_rip, ("k", "worst_hi", False, False)),
    "generalrip": ExperimentSpec(("k", "eps"), ("m", "tested_supports",
                                                "worst_lo", "worst_hi", "partial",
                                                "basis_lo", "basis_hi",
                                                "basis_scale"),
                                 _run_generalrip, ("k", "worst_hi", False, False)),
    "jl": ExperimentSpec(("k", "eps"), ("m", "max_err", "pairs"),
                         _run_jl, ("eps", "max_err", False, False)),
    "cotype": ExperimentSpec((), ("m_estimate", "bound", "fitted_c", "stderr",
                                  "q", "beta"),
                             _run_cotype, ("n", "fitted_c", True, False)),
}


@dataclass(frozen=True)
class RunResult:
    columns: tuple
    rows: tuple
    csv_path: str
    json_path: str
    svg_paths: tuple
    wall_ms: float


def _body_label(cfg: ExperimentConfig, n: int) -> str:
    if cfg.body_spec is None:
        return ""
    spec = dict(cfg.body_spec)
    if spec.get("kind") == "pnorm":
        spec["dim"] = int(n)
    label = json.dumps(spec, sort_keys=True, separators=(",", ":"))
    return label + "+john" if cfg.john else label


def _finish_rows(cfg, spec, n, seed, raw_rows):
    done = []
    for raw in raw_rows:
        row = {"experiment": cfg.experiment, "body": _body_label(cfg, n),
               "n": n, "seed": seed, "version": __version__,
               "config_hash": cfg.config_hash}
        for col in spec.params + spec.metrics + ("pass",):
            row[col] = raw.get(col)
        done.append(row)
    return done


def run(cfg: ExperimentConfig, out_dir=None, plot: bool = False,
        threads: int = 1, seed_override=None) -> RunResult:
    """Execute the config and write CSV, JSON summary, optional SVG.

    Cells (one per n x seed) may run on several threads; results are
    assembled and written in grid order, so the CSV bytes do not depend
    on the worker count.  A numerical failure flushes the rows finished
    so far plus one failure marker row, then raises RunFailure.
    """
    spec = SPECS[cfg.experiment]
    seeds = (int(seed_override),) if seed_override is not None else cfg.seeds
    columns = csv_columns(spec.params, spec.metrics)
    out = Path(out_dir if out_dir is not None else cfg.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    prefix = cfg.output["prefix"]
    csv_path = out / f"{prefix}.csv"
    json_path = out / f"{prefix}.json"

    cells = [(n, seed) for n in cfg.grid["n"] for seed in seeds]

    def exec_cell(cell):
        n, seed = cell
        t0 = time.perf_counter()
        raw = spec.cell(cfg, n, seed)
        wall = (time.perf_counter() - t0) * 1000.0
        return _finish_rows(cfg, spec, n, seed, raw), wall

    t_start = time.perf_counter()
    rows = []
    walls = []
    failure = None

    def consume(runs):
        nonlocal failure
        done = 0
        try:
            for cell_rows, wall in runs:
                n, seed = cells[done]
                rows.extend(cell_rows)
                walls.append({"n": n, "seed": seed, "wall_ms": wall})
                done += 1
        except Exception as e:
            n, seed = cells[done]
            failure = f"cell n={n} seed={seed}: {e}"
            rows.append({"experiment": cfg.experiment,
                         "body": _body_label(cfg, n), "n": n, "seed": seed,
                         "version": __version__,
                         "config_hash": cfg.config_hash})

    if threads <= 1:
        consume(map(exec_cell, cells))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            consume(pool.map(exec_cell, cells))

    write_csv(csv_path, columns, rows)
    total_ms = (time.perf_counter() - t_start) * 1000.0

    voted = [r for r in rows if r.get("pass") is not None]
    fitted = {}
    for key in ("c_term", "fitted_c"):
        vals = [r[key] for r in rows
                if isinstance(r.get(key), float) and math.isfinite(r[key])
                and not r.get("skipped", False)]
        if vals:
            fitted[key] = min(vals)
    summary = {
        "config": {
            "experiment": cfg.experiment, "body": cfg.body_spec,
            "grid": {k: list(v) for k, v in cfg.grid.items()},
            "seeds": list(seeds), "samples": cfg.samples,
            "constants": cfg.constants, "john": cfg.john,
        },
        "config_hash": cfg.config_hash,
        "version": __version__,
        "rows": len(rows),
        "pass_rate": (sum(1 for r in voted if r["pass"]) / len(voted)
                      if voted else None),
        "fitted": fitted,
        "wall_ms_total": total_ms,
        "cells": walls,
        "error": failure,
    }
    write_json_summary(json_path, summary)

    svg_paths = []
    if plot and failure is None:
        xcol, ycol, logx, logy = spec.plot
        series = {}
        for r in rows:
            x, y = r.get(xcol), r.get(ycol)
            if not (isinstance(x, (int, float)) and isinstance(y, (int, float))):
                continue
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            label = f"n={r['n']} seed={r['seed']}"
            series.setdefault(label, ([], []))
            series[label][0].append(float(x))
            series[label][1].append(float(y))
        if series:
            svg = out / f"{prefix}_{ycol}.svg"
            write_plot(svg, [(lbl, xs, ys) for lbl, (xs, ys) in series.items()],
                       title=cfg.experiment, xlabel=xcol, ylabel=ycol,
                       logx=logx, logy=logy)
            svg_paths.append(str(svg))

    if failure is not None:
        raise RunFailure(failure, str(csv_path))
    return RunResult(columns, tuple(rows), str(csv_path), str(json_path),
                     tuple(svg_paths), total_ms)
