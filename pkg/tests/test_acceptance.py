"""Acceptance criteria 1-12, each reported as a single PASS/FAIL line.

Tolerances follow the criteria exactly; nothing is loosened to make a
criterion pass.  Monte Carlo criteria use fixed seeds.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from rcmodel import cli
from rcmodel import dynamics as dyn
from rcmodel import exact
from rcmodel import lattice as lat
from rcmodel import verify as vf
from rcmodel.events import C_H
from rcmodel.exact import BoundaryCondition, RCParams

SQ = lat.square_box(1, 1)
G21 = lat.square_box(2, 1)
PATH2 = lat.build_region(lat.SQUARE, 0, 2, 0, 0.5)
PC2 = math.sqrt(2) / (1 + math.sqrt(2))


def report(k, ok, detail):
    line = f"CRITERION {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


def suite_summary(rows):
    bad = vf.failures(rows)
    return bad, f"{len(rows)} rows, {len(bad)} failures"


# 1 --------------------------------------------------------------------------------


def test_criterion_01_normalization_and_bernoulli_reduction():
    t0 = time.perf_counter()
    worst_norm = worst_bern = 0.0
    for region in vf.builtin_regions():
        m = region.n_edges
        bits = exact.index_bits(0, 1 << m, m).astype(bool)
        opened = bits.sum(axis=1)
        for bc_name in vf.GRID_BC:
            bc = BoundaryCondition.named(region, bc_name)
            eng = exact.engine(region, bc)
            masks = [eng.indicator(e) for e in vf.event_family(region)]
            for p, q in vf.default_grid():
                params = RCParams(q=q, p=p)
                z = eng.partition_function(params)
                worst_norm = max(worst_norm, abs(eng.total(params) / z - 1.0))
                if q == 1.0:
                    bern = p**opened * (1 - p) ** (m - opened)
                    for mask in masks:
                        worst_bern = max(worst_bern, abs(eng.probability(mask, params) - bern[mask].sum()))
        # independent normalization through per-configuration weights
        for bc_name in vf.GRID_BC:
            bc = BoundaryCondition.named(region, bc_name)
            params = RCParams(q=2.0, p=0.3)
            z = exact.partition_function(region, params, bc)
            total = math.fsum(exact.weight(c, region, params, bc) for c in bits) / z
            worst_norm = max(worst_norm, abs(total - 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst_norm < 1e-12 and worst_bern < 1e-12 and elapsed < 10
    report(1, ok, f"max |sum phi - 1| = {worst_norm:.2e}, max |phi - Bernoulli| = {worst_bern:.2e}, "
                  f"{elapsed:.1f} s")


# 2 --------------------------------------------------------------------------------


def test_criterion_02_fkg_and_orderings():
    t0 = time.perf_counter()
    rows = vf.run_suite("fkg") + vf.run_suite("orderings")
    elapsed = time.perf_counter() - t0
    bad, text = suite_summary(rows)
    report(2, not bad and elapsed < 120, f"{text}, {elapsed:.1f} s")


# 3 --------------------------------------------------------------------------------


def test_criterion_03_duality():
    rows = vf.run_suite("duality")
    bad, text = suite_summary(rows)
    dual = max(r.lhs for r in rows if r.check == "duality")
    selfdual = max(abs(r.margin) for r in rows if r.check == "self-dual")
    ok = not bad and dual <= 1e-12 and selfdual <= 1e-14
    report(3, ok, f"{text}, max configuration gap {dual:.2e}, max |p* - p| at sqrt(q)/(1+sqrt(q)) {selfdual:.2e}")


# 4 --------------------------------------------------------------------------------


def test_criterion_04_hamming_integrated_form():
    rows = vf.run_suite("hamming")
    bad, text = suite_summary(rows)
    tight = min(r.margin for r in rows)
    report(4, not bad, f"{text}, smallest margin {tight:.3e}")


# 5 --------------------------------------------------------------------------------


def test_criterion_05_sharp_threshold_ratio():
    rows = vf.run_suite("sharp-threshold")
    points = [r for r in rows if r.check == "sharp-threshold"]
    mins = [r.lhs for r in rows if r.check == "sharp-threshold-min" and not math.isnan(r.lhs)]
    ok = bool(points) and all(r.lhs > 0 for r in points) and not vf.failures(rows)
    report(5, ok, f"{len(points)} admissible points, all ratios > 0: {ok}, minimum ratio {min(mins):.4g}")


# 6 --------------------------------------------------------------------------------


def test_criterion_06_edwards_sokal():
    t0 = time.perf_counter()
    rows = vf.run_suite("es")
    elapsed = time.perf_counter() - t0
    bad, text = suite_summary(rows)
    varied = [r for r in rows if "varied" in r.note]
    qs = {int(r.q) for r in rows}
    gap = max(-r.margin for r in rows)
    ok = not bad and varied and qs == {2, 3} and gap <= 1e-10 and elapsed < 60
    report(6, ok, f"{text} ({len(varied)} with non-constant J), max gap {gap:.2e}, {elapsed:.1f} s")


# 7 --------------------------------------------------------------------------------


def _detailed_balance_gap(region, params, bc):
    graph = dyn.WiredGraph.build(region, bc)
    m = region.n_edges
    worst = 0.0
    for cfg in exact.index_bits(0, 1 << m, m).astype(bool):
        for e in range(m):
            if cfg[e]:
                continue
            up = dyn.open_probability(cfg, region, e, params, bc, graph)
            opened = cfg.copy()
            opened[e] = True
            down = 1.0 - dyn.open_probability(opened, region, e, params, bc, graph)
            gap = abs(exact.weight(cfg, region, params, bc) * up - exact.weight(opened, region, params, bc) * down)
            worst = max(worst, gap / exact.partition_function(region, params, bc))
    return worst


def test_criterion_07_sampler_correctness():
    t0 = time.perf_counter()
    db = 0.0
    for region in vf.builtin_regions():
        for bc_name in vf.GRID_BC:
            bc = BoundaryCondition.named(region, bc_name)
            for q in (1.5, 2.0, 4.0):
                db = max(db, _detailed_balance_gap(region, RCParams(q=q, p=0.3), bc))
    tvs = {}
    seed = 0
    for region, name in ((SQ, "sq1x1"), (G21, "sq2x1")):
        for q in (1.0, 2.0):
            for p in (0.3, 0.5, 0.7):
                params = RCParams(q=q, p=p)
                law = exact.engine(region, BoundaryCondition.free(region)).distribution(params)
                for algo in ("heatbath", "auto"):
                    seed += 1
                    chain = dyn.make_chain(region, params, None, seed, algo)
                    chain.sweep(100)
                    n = 1_000_000
                    hist = np.bincount(chain.sweep(n, record=True), minlength=1 << region.n_edges) / n
                    tvs[(name, q, p, type(chain).__name__)] = 0.5 * np.abs(hist - law).sum()
    elapsed = time.perf_counter() - t0
    worst = max(tvs, key=tvs.get)
    ok = db < 1e-12 and max(tvs.values()) < 0.01 and elapsed < 300
    report(7, ok, f"detailed balance max gap {db:.2e}; max TV {tvs[worst]:.4f} at {worst}; "
                  f"{len(tvs)} TV checks, {elapsed:.0f} s")


# 8 --------------------------------------------------------------------------------


def _conditioned(region, params, pivot, state):
    eng = exact.engine(region, BoundaryCondition.free(region))
    law = eng.distribution(params)
    mask = eng.edge_state(pivot) == bool(state)
    out = np.where(mask, law, 0.0)
    return out / out.sum()


def test_criterion_08_coupling_chain():
    t0 = time.perf_counter()
    params = RCParams(q=2.0, p=0.5)
    parts, ok = [], True
    for region, name in ((PATH2, "two-edge path"), (SQ, "unit square")):
        run = dyn.coupling_chain_run(region, params, None, 0, t_max=math.inf, seed=11, max_events=1_000_000)
        mp, mo = run.marginals()
        tv_pi = 0.5 * np.abs(mp - _conditioned(region, params, 0, 0)).sum()
        tv_om = 0.5 * np.abs(mo - _conditioned(region, params, 0, 1)).sum()
        viol = sum(run.violations.values())
        ok &= run.n_events >= 1_000_000 and viol == 0 and max(tv_pi, tv_om) < 0.02
        parts.append(f"{name}: {run.n_events} events, violations {run.violations}, "
                     f"TV pi {tv_pi:.4f} omega {tv_om:.4f}")
    elapsed = time.perf_counter() - t0
    report(8, ok and elapsed < 300, "; ".join(parts) + f"; {elapsed:.0f} s")


# 9 --------------------------------------------------------------------------------


def test_criterion_09_self_dual_crossing():
    t0 = time.perf_counter()
    parts, ok = [], True
    for n in (8, 16, 32):
        region = lat.build_region(lat.SQUARE, 0, n + 1, 0, n)
        mean, se = dyn.estimate(C_H, region, RCParams(q=1.0, p=0.5), None, replicas=8, sweeps=2500, burn_in=0,
                                seed=100 + n)
        ok &= abs(mean - 0.5) <= 3 * se
        parts.append(f"n={n}: {mean:.4f} +- {se:.4f}")
    elapsed = time.perf_counter() - t0
    report(9, ok and elapsed < 600, "; ".join(parts) + f" (20000 samples each), {elapsed:.0f} s")


# 10 -------------------------------------------------------------------------------


def test_criterion_10_exponential_decay():
    t0 = time.perf_counter()
    ns = tuple(range(4, 25, 2))
    with pytest.warns(UserWarning):
        f1 = cli.decay_fit(cli.ExperimentConfig(q=1.0, ns=ns, replicas=8, seed=1), 0.3, samples=4_000_000)
    with pytest.warns(UserWarning):
        f2 = cli.decay_fit(cli.ExperimentConfig(q=2.0, ns=ns, replicas=4, burn_in=200, seed=2), 0.45, samples=4000)
    elapsed = time.perf_counter() - t0
    ok = (f1.decaying and f1.c > 0 and f1.r2 > 0.99 and f2.decaying and f2.c > 0 and f2.r2 > 0.98
          and elapsed < 900)
    report(10, ok, f"q=1 p=0.3: c={f1.c:.3f}+-{f1.c_stderr:.3f} R2={f1.r2:.4f} ({int(f1.used.sum())} sizes); "
                   f"q=2 p=0.45: c={f2.c:.3f}+-{f2.c_stderr:.3f} R2={f2.r2:.4f} ({int(f2.used.sum())} sizes); "
                   f"{elapsed:.0f} s")


# 11 -------------------------------------------------------------------------------


def test_criterion_11_threshold_window():
    t0 = time.perf_counter()
    parts, ok = [], True
    for q, rng in ((1.0, (0.3, 0.8)), (2.0, (0.4, 0.85))):
        cfg = cli.ExperimentConfig(q=q, ns=(8, 16), replicas=8, sweeps=2000, burn_in=200, seed=1).validate()
        w8, w16 = cli.threshold_window(cfg, *rng)
        ok &= w16.width < w8.width
        text = (f"q={q:g}: n=8 [{w8.p_lo:.3f},{w8.p_hi:.3f}] n=16 [{w16.p_lo:.3f},{w16.p_hi:.3f}] "
                f"width {w8.width:.3f} -> {w16.width:.3f}")
        if q == 2.0:
            ok &= all(abs(w.centre - PC2) <= 0.03 for w in (w8, w16))
            text += f", centres {w8.centre:.4f} {w16.centre:.4f} vs {PC2:.4f}+-0.03"
        parts.append(text)
    elapsed = time.perf_counter() - t0
    report(11, ok and elapsed < 1200, "; ".join(parts) + f"; {elapsed:.0f} s")


# 12 -------------------------------------------------------------------------------


def test_criterion_12_covering_inequality():
    t0 = time.perf_counter()
    rows = []
    seed = 0
    for n, N in ((4, 16), (8, 32)):
        for q in (1.0, 2.0):
            for p in (0.4, 0.5, 0.6):
                seed += 10
                rows += vf.check_covering(n, N, q, p, samples=4000, seed=seed, burn_in=200, replicas=8)
    elapsed = time.perf_counter() - t0
    bad = vf.failures(rows)
    slack = min(r.margin + r.tol for r in rows)
    report(12, not bad and len(rows) == 12 and elapsed < 600,
           f"{len(rows)} points, {len(bad)} failures, smallest margin+3sigma {slack:.3e}, {elapsed:.0f} s")
