"""Dormand-Prince 5(4) integrator for complex ODE systems.

Local extrapolation (the 5th order solution is propagated), PI step-size
control, FSAL, and Hairer's continuous extension for output between steps.
A right-hand side may raise one of ``retry_on``; the step is then halved and
retried, up to ``max_retries`` consecutive times.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import IntegrationFailure

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B = np.array(A[6] + [0.0])
# difference between 5th and embedded 4th order weights
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense output
D = np.array([
    -12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
    -10690763975 / 1880347072, 701980252875 / 199316789632,
    -1453857185 / 822651844, 69997945 / 29380423,
])

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0
# PI controller exponents (Gustafsson-style, order 5)
K_I = 0.7 / 5
K_P = 0.4 / 5


@dataclass
class StepRecord:
    t: float
    h: float
    error: float


@dataclass
class OdeResult:
    t: np.ndarray
    y: np.ndarray
    steps: list = field(default_factory=list)
    n_rejected: int = 0
    n_fev: int = 0


class DormandPrince:
    def __init__(
        self,
        fun: Callable[[float, np.ndarray], np.ndarray],
        rtol: float = 1e-10,
        atol: float = 1e-12,
        h_min: float = 1e-12,
        max_retries: int = 40,
        retry_on: tuple = (),
        on_step: Callable[[StepRecord, np.ndarray], None] | None = None,
    ):
        if rtol <= 0 or atol <= 0:
            raise ValueError("tolerances must be positive")
        self.fun = fun
        self.rtol = rtol
        self.atol = atol
        self.h_min = h_min
        self.max_retries = max_retries
        self.retry_on = retry_on
        self.on_step = on_step
        self.n_fev = 0

    def _f(self, t, y):
        self.n_fev += 1
        return self.fun(t, y)

    def _initial_step(self, t0, y0, f0, direction_span):
        scale = self.atol + self.rtol * np.abs(y0)
        d0 = np.max(np.abs(y0) / scale)
        d1 = np.max(np.abs(f0) / scale)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, direction_span)
        y1 = y0 + h0 * f0
        f1 = self._f(t0 + h0, y1)
        d2 = np.max(np.abs(f1 - f0) / scale) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1 / 5)
        return min(100 * h0, h1, direction_span)

    def _stages(self, t, y, h, k1):
        k = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * kj for a, kj in zip(A[i], k) if a != 0.0)
            k.append(self._f(t + C[i] * h, yi))
        return k

    def solve(self, t0: float, y0, t_eval) -> OdeResult:
        y = np.array(y0, dtype=complex)
        t_eval = np.asarray(t_eval, dtype=float)
        t_end = float(t_eval[-1])
        out = np.empty((len(t_eval), y.size), dtype=complex)
        res = OdeResult(t=t_eval.copy(), y=out)
        self.n_fev = 0

        i_out = 0
        while i_out < len(t_eval) and t_eval[i_out] <= t0:
            out[i_out] = y
            i_out += 1
        if i_out == len(t_eval):
            res.n_fev = self.n_fev
            return res

        t = float(t0)
        f = self._f(t, y)
        h = self._initial_step(t, y, f, t_end - t)
        err_prev = 1e-4
        retries = 0

        while t < t_end:
            if h < self.h_min:
                raise IntegrationFailure("step size underflow", t, y.copy())
            h = min(h, t_end - t)
            try:
                k = self._stages(t, y, h, f)
            except self.retry_on:
                retries += 1
                if retries > self.max_retries:
                    raise
                h *= 0.5
                res.n_rejected += 1
                continue

            y_new = y + h * sum(b * kj for b, kj in zip(B, k) if b != 0.0)
            err_vec = h * sum(e * kj for e, kj in zip(E, k) if e != 0.0)
            scale = self.atol + self.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale))

            if not np.isfinite(err):
                retries += 1
                if retries > self.max_retries:
                    raise IntegrationFailure("non-finite local error", t, y.copy())
                h *= 0.5
                res.n_rejected += 1
                continue

            if err > 1.0:
                h *= max(FAC_MIN, SAFETY * err ** (-1 / 5))
                res.n_rejected += 1
                continue

            retries = 0
            t_new = t + h
            if t_end - t_new < 1e-14 * max(1.0, abs(t_end)):
                t_new = t_end
            # dense output for every requested point inside (t, t_new]
            if i_out < len(t_eval) and t_eval[i_out] <= t_new:
                ydiff = y_new - y
                bspl = h * k[0] - ydiff
                r4 = ydiff - h * k[6] - bspl
                r5 = h * sum(d * kj for d, kj in zip(D, k) if d != 0.0)
                while i_out < len(t_eval) and t_eval[i_out] <= t_new:
                    theta = (t_eval[i_out] - t) / h
                    th1 = 1.0 - theta
                    out[i_out] = y + theta * (ydiff + th1 * (bspl + theta * (r4 + th1 * r5)))
                    i_out += 1
                if t_new == t_end:
                    out[-1] = y_new

            rec = StepRecord(t_new, h, err)
            res.steps.append(rec)
            if self.on_step is not None:
                self.on_step(rec, y_new)

            err = max(err, 1e-10)
            fac = SAFETY * err ** (-K_I) * err_prev ** K_P
            err_prev = err
            t, y, f = t_new, y_new, k[6]
            h *= min(FAC_MAX, max(FAC_MIN, fac))

        res.n_fev = self.n_fev
        return res
