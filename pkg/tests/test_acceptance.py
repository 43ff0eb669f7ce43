"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from casimir_wn import algebra
from casimir_wn.bogoliubov import coefficients
from casimir_wn.cli import random_disk, sweep, RunConfig
from casimir_wn.model import CavityParams
from casimir_wn.pipeline import compare_records, run_exact
from casimir_wn.weinorman import assemble_M, integrate
from casimir_wn import oracle

from conftest import ACCEPTANCE_LINES, BASE, BASE_TIMES

SQRT_HALF = 1 / math.sqrt(2)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def row1_reference(alpha):
    """Row 1 of M written out term by term, independently of assemble_M."""
    a1, a2, a3, a4, a5, a6, a7 = alpha[:7]
    return np.array([
        1, 0, 0,
        -a3,
        a3 * a4**2 - 2 * a1 * a4,
        a3 * a5 * a4**2 + a3 * a4 - 2 * a1 * a5 * a4 - 2 * a1,
        -a3 * a5 * a4**2 - a3 * a4 + 2 * a1 * a5 * a4,
        np.exp(-2 * a6) * (4 * a1**2 - 4 * a3 * a4 * a1 + a3**2 * a4**2),
        np.exp(-2 * a7) * (a3**2 + a4**2 * a5**2 * a3**2 + 2 * a4 * a5 * a3**2
                           - 4 * a1 * a4 * a5**2 * a3 - 4 * a1 * a5 * a3 + 4 * a1**2 * a5**2),
        np.exp(-(a6 + a7)) * (2 * a3 * a1 - 4 * a5 * a1**2 - a3**2 * a4
                              - a3**2 * a4**2 * a5 + 4 * a3 * a4 * a5 * a1),
        0,
    ], dtype=complex)


def test_criterion_01_algebra_closure():
    t0 = time.perf_counter()
    closure = algebra.verify_closure()
    numeric = algebra.verify_closure_numeric(12, 4)
    elapsed = time.perf_counter() - t0
    ok = (closure.pairs_checked == 121 and closure.pairs_closed == 121 and closure.ok
          and closure.jacobi_residual == 0 and numeric.max_deviation <= 1e-10
          and elapsed < 5)
    report(1, ok, f"closed {closure.pairs_closed}/121, jacobi {closure.jacobi_residual}, "
                  f"numeric {numeric.max_deviation:.2e}, {elapsed:.1f}s")


def test_criterion_02_m_matrix():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_oracle = 0.0
    for _ in range(100):
        alpha = random_disk(rng, 0.3)
        dev = np.abs(assemble_M(alpha) - algebra.adjoint_chain_fock(alpha).matrix).max()
        worst_oracle = max(worst_oracle, dev)
    worst_row1 = 0.0
    for _ in range(20):
        alpha = random_disk(rng, 0.3)
        worst_row1 = max(worst_row1, np.abs(assemble_M(alpha)[0] - row1_reference(alpha)).max())
    elapsed = time.perf_counter() - t0
    ok = worst_oracle <= 1e-9 and worst_row1 <= 1e-12 and elapsed < 30
    report(2, ok, f"oracle {worst_oracle:.2e}, row 1 {worst_row1:.2e}, {elapsed:.1f}s")


def test_criterion_03_emergent_unitarity():
    t0 = time.perf_counter()
    run = run_exact(BASE, BASE_TIMES, rtol=1e-10, atol=1e-12)
    elapsed = time.perf_counter() - t0
    unit = max(r.unitarity_residual for r in run.rows)
    ccr = max(r.ccr_residual for r in run.rows)
    ok = len(run.rows) == 2001 and unit <= 1e-8 and ccr <= 1e-8 and elapsed < 60
    report(3, ok, f"unitarity {unit:.2e}, ccr {ccr:.2e}, {elapsed:.1f}s")


def test_criterion_04_invariant(base_run):
    dev = np.max(np.abs(base_run.column("invariant") - 0.5))
    report(4, dev <= 1e-6, f"max |D - 1/2| = {dev:.2e}")


def test_criterion_05_vacuum_baseline(base_run):
    r = base_run.records[0]
    var_dev = max(abs(x - SQRT_HALF) for x in (r.dQ1, r.dP1, r.dQ2, r.dP2))
    ok = (r.t == 0.0 and r.n1 == 0.0 and r.n2 == 0.0 and var_dev <= 1e-12
          and abs(r.invariant - 0.5) <= 1e-12)
    report(5, ok, f"n=({r.n1}, {r.n2}), variance dev {var_dev:.1e}, "
                  f"invariant dev {abs(r.invariant - 0.5):.1e}")


def test_criterion_06_heisenberg_bound(base_run):
    p1, p2 = base_run.column("prod1"), base_run.column("prod2")
    lower = min(p1.min(), p2.min())
    ok = lower >= 0.5 - 1e-9 and abs(p1.min() - 0.5) <= 1e-3 and abs(p2.min() - 0.5) <= 1e-3
    report(6, ok, f"min prod1 {p1.min():.12f}, min prod2 {p2.min():.12f}")


def test_criterion_07_photon_growth(base_run):
    t = base_run.column("t")
    n1, n2 = base_run.column("n1"), base_run.column("n2")
    late = t > 1
    ok = 30 <= n1[-1] <= 300 and n2[-1] < 10 and bool(np.all(n1[late] > n2[late]))
    report(7, ok, f"n1(20)={n1[-1]:.2f}, n2(20)={n2[-1]:.4f}, "
                  f"n1>n2 for t>1: {bool(np.all(n1[late] > n2[late]))}")


def test_criterion_08_mandel(base_run):
    t = base_run.column("t")
    i = int(np.argmin(np.abs(t - 0.1)))
    q1, q2 = base_run.column("mandel_q1"), base_run.column("mandel_q2")
    ok = (1.8 <= q1[i] <= 2.2 and 1.8 <= q2[i] <= 2.2 and q1[-1] > 10 and 0.5 <= q2[-1] <= 2)
    report(8, ok, f"Q(0.1)=({q1[i]:.3f}, {q2[i]:.3f}), Q(20)=({q1[-1]:.2f}, {q2[-1]:.3f})")


def test_criterion_09_oracle_equivalence(base_run):
    t0 = time.perf_counter()
    ref = oracle.evolve(BASE, BASE_TIMES, cutoff=40, stop_leakage=oracle.LEAKAGE_LIMIT)
    mask = ref.valid_mask(oracle.LEAKAGE_LIMIT)
    n = int(mask.sum())
    ref_records = oracle.measure_run(ref)[:n]
    cmp = compare_records(base_run.records[:n], ref_records)
    elapsed = time.perf_counter() - t0
    worst = max(cmp.max_rel_dev.items(), key=lambda kv: kv[1])
    ok = cmp.ok and cmp.window_end >= 6 and elapsed < 600
    report(9, ok, f"window [0, {cmp.window_end:.2f}], {n} samples, worst rel "
                  f"{worst[0]}={worst[1]:.2e}, failures {cmp.failures or 'none'}, {elapsed:.0f}s")


def test_criterion_10_static_cavity():
    run = run_exact(CavityParams(q0=0.0), BASE_TIMES)
    dev = 0.0
    for r in run.records:
        dev = max(dev, abs(r.n1), abs(r.n2), abs(r.invariant - 0.5),
                  *(abs(x - SQRT_HALF) for x in (r.dQ1, r.dP1, r.dQ2, r.dP2)))
    report(10, dev <= 1e-10, f"max deviation from vacuum values {dev:.1e}")


def test_criterion_11_resonance_selectivity():
    rows = sweep(RunConfig(), "omega_d", [math.pi, 2 * math.pi, 4 * math.pi])
    n1 = [r.get("n1_end", float("nan")) for r in rows]
    ok = all(not r["error"] for r in rows) and int(np.argmax(n1)) == 1
    report(11, ok, "n1(20) at omega_d = pi, 2pi, 4pi: " + ", ".join(f"{x:.4g}" for x in n1))


def test_criterion_12_convergence(base_run):
    traj = integrate(BASE, 0.0, 20.0, [0.0, 20.0], rtol=5e-11, atol=5e-13)
    T = coefficients(traj.states[-1])
    n1_half = abs(T[0, 1]) ** 2 + abs(T[0, 3]) ** 2
    n1 = base_run.records[-1].n1
    rel = abs(n1_half - n1) / n1
    report(12, rel < 1e-3, f"n1(20) {n1:.10f} vs {n1_half:.10f}, rel change {rel:.1e}")
