"""Vacuum expectation values computed from the transfer matrix.

Every quantity here assumes the initial state |0,0>, for which
<b_k b_l> is 1 for (a1, a1^dag) and (a2, a2^dag) and zero otherwise.
Indices below are zero-based: ``T[0, 1]`` is t_12.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .bogoliubov import ccr_residual, unitarity_residual
from .errors import ConsistencyError

# Imaginary residue allowed in quantities that must be real, relative to the
# magnitude of their summands.  It tracks the accumulated non-unitarity of T,
# which reaches ~1e-8 on resonant runs at rtol=1e-10.
IMAG_TOL = 1e-6
MANDEL_THRESHOLD = 1e-10


@dataclass
class ObservableRecord:
    t: float
    n1: float
    n2: float
    dQ1: float
    dP1: float
    dQ2: float
    dP2: float
    prod1: float
    prod2: float
    mandel_q1: float | None
    mandel_q2: float | None
    invariant: float
    mean_Q1: float = 0.0
    mean_P1: float = 0.0
    mean_Q2: float = 0.0
    mean_P2: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def _real(z: complex, what: str, scale: float = 1.0) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, scale):
        raise ConsistencyError(f"{what} has imaginary part {z.imag:.3g}")
    return float(z.real)


def photon_numbers(T) -> tuple[float, float]:
    n1 = abs(T[0, 1]) ** 2 + abs(T[0, 3]) ** 2
    n2 = abs(T[2, 1]) ** 2 + abs(T[2, 3]) ** 2
    return float(n1), float(n2)


def quadrature_variances(T) -> tuple[float, float, float, float]:
    """(dQ1, dP1, dQ2, dP2): standard deviations of the field quadratures."""
    t = T
    pairs = (
        ((t[0, 0] + t[1, 0]) * (t[0, 1] + t[1, 1]), (t[0, 2] + t[1, 2]) * (t[0, 3] + t[1, 3])),
        ((t[0, 0] - t[1, 0]) * (t[1, 1] - t[0, 1]), (t[0, 2] - t[1, 2]) * (t[1, 3] - t[0, 3])),
        ((t[2, 0] + t[3, 0]) * (t[2, 1] + t[3, 1]), (t[2, 2] + t[3, 2]) * (t[2, 3] + t[3, 3])),
        ((t[2, 0] - t[3, 0]) * (t[3, 1] - t[2, 1]), (t[2, 2] - t[3, 2]) * (t[3, 3] - t[2, 3])),
    )
    # a squeezed variance is a small difference of large products, so the
    # imaginary budget is scaled by the size of the summands
    v = [((x + y) / 2, (abs(x) + abs(y)) / 2) for x, y in pairs]
    out = []
    for name, (z, scale) in zip(("dQ1^2", "dP1^2", "dQ2^2", "dP2^2"), v):
        x = _real(complex(z), name, scale)
        if x < -IMAG_TOL * max(1.0, scale):
            raise ConsistencyError(f"{name} is negative ({x:.3g})")
        out.append(math.sqrt(max(x, 0.0)))
    return tuple(out)


def quadrature_means(T) -> tuple[float, float, float, float]:
    """<Q_j>, <P_j>: every Heisenberg operator is linear in b_k and <0|b_k|0> = 0."""
    vac_means = np.zeros(4)
    a = np.asarray(T) @ vac_means
    q1 = (a[0] + a[1]) / math.sqrt(2)
    p1 = 1j * (a[1] - a[0]) / math.sqrt(2)
    q2 = (a[2] + a[3]) / math.sqrt(2)
    p2 = 1j * (a[3] - a[2]) / math.sqrt(2)
    return tuple(float(np.real(x)) for x in (q1, p1, q2, p2))


def second_moments_n(T) -> tuple[float, float]:
    """<n1^2>, <n2^2> for the vacuum, in the closed forms with t_41/t_43 for mode 2."""
    a = np.abs(T) ** 2
    t = T
    n1sq = ((a[0, 1] + a[0, 3]) ** 2
            + abs(t[0, 0] * t[1, 2] + t[0, 2] * t[1, 0]) ** 2
            + 2 * (a[0, 0] * a[0, 1] + a[0, 3] * a[0, 2]))
    n2sq = ((a[3, 0] + a[3, 2]) ** 2
            + abs(t[2, 0] * t[3, 2] + t[2, 2] * t[3, 0]) ** 2
            + 2 * (a[3, 0] * a[3, 1] + a[3, 2] * a[2, 2]))
    return float(n1sq), float(n2sq)


def mandel_q(T) -> tuple[float | None, float | None]:
    """Mandel Q per mode; None where <n> < 1e-10 (0/0 at the vacuum)."""
    n = photon_numbers(T)
    n_sq = second_moments_n(T)
    return tuple(
        None if nj < MANDEL_THRESHOLD else (sq - nj * nj) / nj
        for nj, sq in zip(n, n_sq)
    )


def invariant_terms(T) -> dict:
    t = T
    return {
        "sigma_N1": t[0, 1] * t[1, 0] + t[0, 3] * t[1, 2],
        "sigma_a1": t[0, 0] * t[0, 1] + t[0, 2] * t[0, 3],
        "sigma_N2": t[2, 1] * t[3, 0] + t[2, 3] * t[3, 2],
        "sigma_a2": t[2, 0] * t[2, 1] + t[2, 2] * t[2, 3],
        "a1d_a2": (t[1, 1] * t[2, 0] + t[1, 0] * t[2, 1] + t[1, 3] * t[2, 2] + t[1, 2] * t[2, 3]) / 2,
        "a2d_a1": (t[0, 1] * t[3, 0] + t[0, 0] * t[3, 1] + t[0, 3] * t[3, 2] + t[0, 2] * t[3, 3]) / 2,
        "a1_a2": (t[0, 1] * t[2, 0] + t[0, 0] * t[2, 1] + t[0, 3] * t[2, 2] + t[0, 2] * t[2, 3]) / 2,
    }


def invariant_from_moments(sN1, sa1, sN2, sa2, a1d_a2, a2d_a1, a1_a2) -> complex:
    """Two-mode quadratic invariant in terms of centred second moments."""
    return ((sN1 + 0.5) ** 2 - abs(sa1) ** 2
            + (sN2 + 0.5) ** 2 - abs(sa2) ** 2
            + 2 * (a1d_a2 * a2d_a1 - abs(a1_a2) ** 2))


def universal_invariant(T) -> float:
    m = invariant_terms(T)
    d = invariant_from_moments(**{
        "sN1": m["sigma_N1"], "sa1": m["sigma_a1"], "sN2": m["sigma_N2"],
        "sa2": m["sigma_a2"], "a1d_a2": m["a1d_a2"], "a2d_a1": m["a2d_a1"],
        "a1_a2": m["a1_a2"],
    })
    scale = max(abs(m["sigma_N1"]), abs(m["sigma_N2"]), 1.0) ** 2
    return _real(complex(d), "invariant", scale)


def record(t: float, T) -> ObservableRecord:
    n1, n2 = photon_numbers(T)
    dq1, dp1, dq2, dp2 = quadrature_variances(T)
    q1, q2 = mandel_q(T)
    mq1, mp1, mq2, mp2 = quadrature_means(T)
    return ObservableRecord(
        t=float(t), n1=n1, n2=n2, dQ1=dq1, dP1=dp1, dQ2=dq2, dP2=dp2,
        prod1=dq1 * dp1, prod2=dq2 * dp2, mandel_q1=q1, mandel_q2=q2,
        invariant=universal_invariant(T),
        mean_Q1=mq1, mean_P1=mp1, mean_Q2=mq2, mean_P2=mp2,
    )


@dataclass
class PipelineRow:
    record: ObservableRecord
    unitarity_residual: float
    ccr_residual: float
    transfer: np.ndarray


def evaluate(times, transfer_matrices) -> list[PipelineRow]:
    return [
        PipelineRow(record(t, T), unitarity_residual(T), ccr_residual(T), T)
        for t, T in zip(times, transfer_matrices)
    ]
