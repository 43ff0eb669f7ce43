"""Heisenberg-picture transfer matrix from the Wei-Norman exponents.

Rows are (a1(t), a1^dag(t), a2(t), a2^dag(t)) and columns the coefficients
of (a1, a1^dag, a2, a2^dag), so ``T[0, 1]`` is t_12 and so on.  The entries
come from U^-1 b U evaluated in closed form.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgument

# t_ij = t_kl^*  pairs (zero-based) that hold when U is unitary
CONJUGATE_PAIRS = (
    ((0, 0), (1, 1)), ((0, 1), (1, 0)), ((0, 2), (1, 3)), ((0, 3), (1, 2)),
    ((2, 0), (3, 1)), ((2, 1), (3, 0)), ((2, 2), (3, 3)), ((2, 3), (3, 2)),
)


def coefficients(alpha) -> np.ndarray:
    """4x4 transfer matrix for a single exponent vector alpha_1..alpha_11."""
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape[-1] != 11:
        raise InvalidArgument("alpha must have 11 components")
    if not np.all(np.isfinite(alpha)):
        raise InvalidArgument("alpha has non-finite components")
    a1, a2, a3, a4, a5, a6, a7, a8, a9, a10 = (alpha[..., i] for i in range(10))
    ep6, em6 = np.exp(a6), np.exp(-a6)
    ep7, em7 = np.exp(a7), np.exp(-a7)
    q45 = 1 + a4 * a5
    s1 = 2 * a1 - a3 * a4
    s2 = a3 - 2 * a1 * a5 + a3 * a4 * a5
    s3 = a3 - 2 * a2 * a4
    s4 = 2 * a2 - a3 * a5 + 2 * a2 * a4 * a5

    t = np.empty(alpha.shape[:-1] + (4, 4), dtype=complex)
    t[..., 0, 0] = ep6 * q45 - 2 * em6 * s1 * a8 - em7 * s2 * a10
    t[..., 0, 1] = em6 * s1
    # The alpha_3 coefficient in the alpha_9 term is 2; the mirror entry t_33
    # has the same -2 e^{-alpha_7} (...) alpha_9 structure.
    t[..., 0, 2] = ep7 * a4 - 2 * em7 * s2 * a9 - em6 * s1 * a10
    t[..., 0, 3] = em7 * s2
    t[..., 1, 0] = -2 * a8 * em6 + a5 * a10 * em7
    t[..., 1, 1] = em6
    t[..., 1, 2] = 2 * em7 * a5 * a9 - em6 * a10
    t[..., 1, 3] = -em7 * a5
    t[..., 2, 0] = ep6 * a5 - 2 * em6 * s3 * a8 - em7 * s4 * a10
    t[..., 2, 1] = em6 * s3
    t[..., 2, 2] = ep7 - 2 * em7 * s4 * a9 - em6 * s3 * a10
    t[..., 2, 3] = em7 * s4
    t[..., 3, 0] = 2 * em6 * a4 * a8 - em7 * q45 * a10
    t[..., 3, 1] = -em6 * a4
    t[..., 3, 2] = -2 * em7 * q45 * a9 + em6 * a4 * a10
    t[..., 3, 3] = em7 * q45
    return t


def unitarity_residual(T) -> float:
    """Max |t_ij - t_kl^*| over the eight conjugate-pairing relations."""
    T = np.asarray(T)
    return float(max(
        np.abs(T[..., i, j] - np.conj(T[..., k, l])).max()
        for (i, j), (k, l) in CONJUGATE_PAIRS
    ))


def ccr_bilinears(T) -> np.ndarray:
    """[a1(t), a1^dag(t)], [a2(t), a2^dag(t)], [a1(t), a2(t)], [a1(t), a2^dag(t)].

    For x = sum x_k b_k and y = sum y_k b_k with b = (a1, a1^dag, a2, a2^dag),
    [x, y] = (x_1 y_2 - x_2 y_1) + (x_3 y_4 - x_4 y_3).
    """
    T = np.asarray(T)

    def br(x, y):
        return (x[..., 0] * y[..., 1] - x[..., 1] * y[..., 0]
                + x[..., 2] * y[..., 3] - x[..., 3] * y[..., 2])

    r1, r2, r3, r4 = (T[..., i, :] for i in range(4))
    return np.stack([br(r1, r2), br(r3, r4), br(r1, r3), br(r1, r4)], axis=-1)


CCR_TARGETS = np.array([1.0, 1.0, 0.0, 0.0])


def ccr_residual(T) -> float:
    return float(np.abs(ccr_bilinears(T) - CCR_TARGETS).max())
