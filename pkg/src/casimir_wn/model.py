"""Cavity parameterization: mirror trajectory, mode frequencies, couplings.

Natural units with hbar = c = 1.  With L = 1 the fundamental frequency is pi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

#: q0 / L above which the weak-perturbation picture is questionable
WEAK_PERTURBATION_LIMIT = 0.2


def coupling_mu(j: int, k: int) -> float:
    """Intermode coupling mu_{j,k} = (-1)^(j+k) kj/(j^2-k^2) sqrt(k/j)."""
    if j not in (1, 2) or k not in (1, 2):
        raise InvalidArgument(f"mode indices must be 1 or 2, got ({j}, {k})")
    if j == k:
        raise InvalidArgument("mu_{j,k} is singular for j == k")
    return (-1) ** (j + k) * (k * j / (j * j - k * k)) * math.sqrt(k / j)


# time-independent, so evaluated once
MU_12 = coupling_mu(1, 2)
MU_21 = coupling_mu(2, 1)


@dataclass(frozen=True)
class CavityParams:
    """Mirror trajectory q(t) = L exp[(q0/L) sin(omega_d t + phi)]."""

    L: float = 1.0
    q0: float = 1.0 / 12.0
    phi: float = 0.0
    omega_d: float = 2.0 * math.pi

    def __post_init__(self):
        for name in ("L", "q0", "phi", "omega_d"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgument(f"{name} must be finite")
        if self.L <= 0:
            raise InvalidArgument(f"L must be positive, got {self.L}")
        if self.q0 < 0:
            raise InvalidArgument(f"q0 must be non-negative, got {self.q0}")
        if self.q0 / self.L >= WEAK_PERTURBATION_LIMIT:
            warnings.warn(
                f"q0/L = {self.q0 / self.L:.3g} is outside the weak-perturbation regime",
                stacklevel=3,
            )

    @classmethod
    def from_dict(cls, d: dict) -> "CavityParams":
        unknown = set(d) - {"L", "q0", "phi", "omega_d"}
        if unknown:
            raise InvalidArgument(f"unknown cavity keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})

    def to_dict(self) -> dict:
        return {"L": self.L, "q0": self.q0, "phi": self.phi, "omega_d": self.omega_d}


def trajectory(p: CavityParams, t):
    return p.L * np.exp((p.q0 / p.L) * np.sin(p.omega_d * t + p.phi))


def modulation_rate(p: CavityParams, t):
    """q'(t)/q(t), evaluated analytically."""
    return (p.q0 * p.omega_d / p.L) * np.cos(p.omega_d * t + p.phi)


def mode_frequency(p: CavityParams, k: int, t):
    if k not in (1, 2):
        raise InvalidArgument(f"mode index must be 1 or 2, got {k}")
    return k * math.pi / trajectory(p, t)


def f_vector(p: CavityParams, t: float) -> np.ndarray:
    """Coefficients f_1..f_11 of H(t) = sum_n f_n(t) X_n (zero-based array)."""
    eta = modulation_rate(p, t)
    q = trajectory(p, t)
    f = np.zeros(11, dtype=complex)
    f[0] = f[1] = 0.25j * eta
    f[2] = 0.5j * (MU_12 + MU_21) * eta
    f[3] = -0.5j * (MU_12 - MU_21) * eta
    f[4] = -f[3]
    f[5] = math.pi / q
    f[6] = 2 * math.pi / q
    f[7] = -f[0]
    f[8] = -f[1]
    f[9] = -f[2]
    return f
