"""End-to-end runs: exponents -> transfer matrices -> observables, and comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .bogoliubov import coefficients
from .model import CavityParams
from .observables import ObservableRecord, PipelineRow, evaluate
from .weinorman import AlphaTrajectory, integrate

COMPARE_FIELDS = (
    "n1", "n2", "dQ1", "dP1", "dQ2", "dP2", "prod1", "prod2",
    "mandel_q1", "mandel_q2", "invariant", "mean_Q1", "mean_P1", "mean_Q2", "mean_P2",
)
REL_TOL = 1e-2
ABS_TOL = 1e-6


@dataclass
class ExactRun:
    trajectory: AlphaTrajectory
    rows: list[PipelineRow]

    @property
    def records(self) -> list[ObservableRecord]:
        return [r.record for r in self.rows]

    def column(self, name: str) -> np.ndarray:
        return np.array([
            np.nan if (v := getattr(r, name)) is None else v for r in self.records
        ])


def run_exact(p: CavityParams, times, rtol: float = 1e-10, atol: float = 1e-12) -> ExactRun:
    times = np.asarray(times, dtype=float)
    traj = integrate(p, float(times[0]), float(times[-1]), times, rtol=rtol, atol=atol)
    return ExactRun(traj, evaluate(traj.times, coefficients(traj.states)))


@dataclass
class Comparison:
    window_end: float
    n_samples: int
    max_rel_dev: dict = field(default_factory=dict)
    max_abs_dev: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.n_samples > 0 and not self.failures

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "window_end": self.window_end,
            "n_samples": self.n_samples,
            "rel_tol": REL_TOL,
            "abs_tol": ABS_TOL,
            "max_rel_dev": self.max_rel_dev,
            "max_abs_dev": self.max_abs_dev,
            "failures": self.failures,
        }


def compare_records(exact: list[ObservableRecord], reference: list[ObservableRecord],
                    rel_tol: float = REL_TOL, abs_tol: float = ABS_TOL) -> Comparison:
    """Field-wise agreement: each value must match within rel_tol or abs_tol.

    Relative deviation is reported only where |reference| exceeds abs_tol.
    """
    n = min(len(exact), len(reference))
    cmp = Comparison(window_end=reference[n - 1].t if n else math.nan, n_samples=n)
    for name in COMPARE_FIELDS:
        worst_rel = 0.0
        worst_abs = 0.0
        bad = 0
        for a, b in zip(exact[:n], reference[:n]):
            x, y = getattr(a, name), getattr(b, name)
            if x is None or y is None:
                # null only below the photon-number threshold on either side
                continue
            d = abs(x - y)
            worst_abs = max(worst_abs, d)
            if abs(y) > abs_tol:
                worst_rel = max(worst_rel, d / abs(y))
            if d > abs_tol and d > rel_tol * abs(y):
                bad += 1
        cmp.max_rel_dev[name] = worst_rel
        cmp.max_abs_dev[name] = worst_abs
        if bad:
            cmp.failures[name] = bad
    return cmp


def run_compare(p: CavityParams, times, cutoff: int = oracle.DEFAULT_CUTOFF,
                rtol: float = 1e-10, atol: float = 1e-12,
                leakage_limit: float = oracle.LEAKAGE_LIMIT):
    """Run both pipelines over the leakage-gated window."""
    ref = oracle.evolve(p, times, cutoff, stop_leakage=leakage_limit)
    mask = ref.valid_mask(leakage_limit)
    ref_records = oracle.measure_run(ref)
    n_valid = int(mask.sum())
    exact = run_exact(p, np.asarray(times)[:max(n_valid, 2)], rtol, atol)
    cmp = compare_records(exact.records[:n_valid], ref_records[:n_valid])
    return cmp, ref, ref_records, exact
