"""Wei-Norman factorization ODEs for the eleven-generator algebra.

The propagator is represented as U(t) = prod_j exp(alpha_j(t) X_j).  Inserting
it into i dU/dt = H U gives the linear system M(alpha) alpha' = -i f(t),
where column j of M is the generator expansion of X_j conjugated by the
first j-1 exponential factors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg.lapack import zgecon, zgetrf, zgetrs

from .errors import IntegrationFailure, InvalidArgument, SingularStructureMatrix
from .model import CavityParams, f_vector
from .ode import DormandPrince

log = logging.getLogger(__name__)

#: condition number above which the coupling matrix is treated as singular
COND_LIMIT = 1e12


def assemble_M(alpha) -> np.ndarray:
    """Coupling matrix M(alpha), shape (11, 11), zero-based indices.

    ``M[n-1, j-1]`` is the coefficient of alpha_j' in the equation belonging
    to generator X_n.
    """
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (11,):
        raise InvalidArgument(f"alpha must have 11 components, got shape {alpha.shape}")
    if not np.all(np.isfinite(alpha)):
        raise InvalidArgument("alpha has non-finite components")
    a1, a2, a3, a4, a5, a6, a7 = (complex(x) for x in alpha[:7])
    e6 = np.exp(-2 * a6)
    e7 = np.exp(-2 * a7)
    e67 = np.exp(-a6 - a7)

    # Shorthands for recurring polynomials.
    p45 = a4 * a5
    q45 = 1 + p45

    m = np.zeros((11, 11), dtype=complex)

    # X1 = a1^dag^2
    m[0, 0] = 1
    m[0, 3] = -a3
    m[0, 4] = a3 * a4**2 - 2 * a1 * a4
    m[0, 5] = a3 * a5 * a4**2 + a3 * a4 - 2 * a1 * a5 * a4 - 2 * a1
    m[0, 6] = -a3 * a5 * a4**2 - a3 * a4 + 2 * a1 * a5 * a4
    m[0, 7] = e6 * (4 * a1**2 - 4 * a3 * a4 * a1 + a3**2 * a4**2)
    m[0, 8] = e7 * (
        a3**2 + a4**2 * a5**2 * a3**2 + 2 * a4 * a5 * a3**2
        - 4 * a1 * a4 * a5**2 * a3 - 4 * a1 * a5 * a3 + 4 * a1**2 * a5**2
    )
    m[0, 9] = e67 * (
        -4 * a5 * a1**2 + 2 * a3 * a1 + 4 * a3 * a4 * a5 * a1
        - a3**2 * a4 - a3**2 * a4**2 * a5
    )

    # X2 = a2^dag^2
    m[1, 1] = 1
    m[1, 4] = 2 * a2 * a4 - a3
    m[1, 5] = 2 * a2 * a4 * a5 - a3 * a5
    m[1, 6] = -2 * a4 * a5 * a2 - 2 * a2 + a3 * a5
    m[1, 7] = e6 * (a3**2 - 4 * a2 * a4 * a3 + 4 * a2**2 * a4**2)
    m[1, 8] = e7 * (
        4 * a2**2 + 4 * a4**2 * a5**2 * a2**2 + 8 * a4 * a5 * a2**2
        - 4 * a3 * a4 * a5**2 * a2 - 4 * a3 * a5 * a2 + a3**2 * a5**2
    )
    m[1, 9] = e67 * (
        -4 * a4 * a2**2 - 4 * a4**2 * a5 * a2**2 + 2 * a3 * a2
        + 4 * a3 * a4 * a5 * a2 - a3**2 * a5
    )

    # X3 = a1^dag a2^dag
    m[2, 2] = 1
    m[2, 3] = -2 * a2
    m[2, 4] = 2 * a2 * a4**2 - 2 * a1
    m[2, 5] = 2 * a2 * a5 * a4**2 + 2 * a2 * a4 - a3 - 2 * a1 * a5
    m[2, 6] = -2 * a2 * a5 * a4**2 - 2 * a2 * a4 - a3 + 2 * a1 * a5
    m[2, 7] = e6 * (
        -2 * a4 * a3**2 + 4 * a2 * a4**2 * a3 + 4 * a1 * a3 - 8 * a1 * a2 * a4
    )
    m[2, 8] = e7 * (
        -2 * a4 * a5**2 * a3**2 - 2 * a5 * a3**2 + 4 * a2 * a4**2 * a5**2 * a3
        + 4 * a1 * a5**2 * a3 + 4 * a2 * a3 + 8 * a2 * a4 * a5 * a3
        - 8 * a1 * a2 * a4 * a5**2 - 8 * a1 * a2 * a5
    )
    m[2, 9] = e67 * (
        a3**2 + 2 * a4 * a5 * a3**2 - 4 * a2 * a4 * a3 - 4 * a2 * a4**2 * a5 * a3
        - 4 * a1 * a5 * a3 + 4 * a1 * a2 + 8 * a1 * a2 * a4 * a5
    )

    # X4 = a1^dag a2
    m[3, 3] = 1
    m[3, 4] = -a4**2
    m[3, 5] = -(a5 * a4**2 + a4)
    m[3, 6] = a5 * a4**2 + a4
    m[3, 7] = e6 * (4 * a1 * a4 - 2 * a3 * a4**2)
    m[3, 8] = e7 * (
        -2 * a3 * a4**2 * a5**2 + 4 * a1 * a4 * a5**2 + 4 * a1 * a5
        - 4 * a3 * a4 * a5 - 2 * a3
    )
    m[3, 9] = e67 * (2 * a3 * a5 * a4**2 + 2 * a3 * a4 - 4 * a1 * a5 * a4 - 2 * a1)

    # X5 = a1 a2^dag
    m[4, 4] = 1
    m[4, 5] = a5
    m[4, 6] = -a5
    m[4, 7] = e6 * (4 * a2 * a4 - 2 * a3)
    m[4, 8] = e7 * (-2 * a3 * a5**2 + 4 * a2 * a4 * a5**2 + 4 * a2 * a5)
    m[4, 9] = e67 * (-2 * a2 - 4 * a4 * a5 * a2 + 2 * a3 * a5)

    # X6 = n1
    m[5, 4] = a4
    m[5, 5] = q45
    m[5, 6] = -p45
    m[5, 7] = e6 * (2 * a3 * a4 - 4 * a1)
    m[5, 8] = e7 * (-4 * a1 * a5**2 + 2 * a3 * a4 * a5**2 + 2 * a3 * a5)
    m[5, 9] = e67 * (-a3 - 2 * a4 * a5 * a3 + 4 * a1 * a5)

    # X7 = n2
    m[6, 4] = -a4
    m[6, 5] = -p45
    m[6, 6] = q45
    m[6, 7] = e6 * (2 * a3 * a4 - 4 * a2 * a4**2)
    m[6, 8] = e7 * (
        -4 * a2 * a4**2 * a5**2 + 2 * a3 * a4 * a5**2 + 2 * a3 * a5
        - 8 * a2 * a4 * a5 - 4 * a2
    )
    m[6, 9] = e67 * (4 * a2 * a5 * a4**2 + 4 * a2 * a4 - 2 * a3 * a5 * a4 - a3)

    # X8 = a1^2
    m[7, 7] = e6
    m[7, 8] = e7 * a5**2
    m[7, 9] = -e67 * a5

    # X9 = a2^2
    m[8, 7] = e6 * a4**2
    m[8, 8] = e7 * q45**2
    m[8, 9] = -e67 * (a5 * a4**2 + a4)

    # X10 = a1 a2
    m[9, 7] = -2 * e6 * a4
    m[9, 8] = e7 * (-2 * a4 * a5**2 - 2 * a5)
    m[9, 9] = e67 * (2 * p45 + 1)

    # X11 = identity
    m[10, 7] = e6 * (-2 * a2 * a4**2 + 2 * a3 * a4 - 2 * a1)
    m[10, 8] = e7 * (
        -2 * a2 * a4**2 * a5**2 - 2 * a1 * a5**2 + 2 * a3 * a4 * a5**2
        + 2 * a3 * a5 - 4 * a2 * a4 * a5 - 2 * a2
    )
    m[10, 9] = e67 * (
        2 * a2 * a5 * a4**2 + 2 * a2 * a4 - 2 * a3 * a5 * a4 - a3 + 2 * a1 * a5
    )
    m[10, 10] = 1
    return m


def solve_rates(m: np.ndarray, f: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve M x = -i f by pivoted LU; return (x, 1-norm condition estimate)."""
    lu, piv, info = zgetrf(m)
    if info > 0:
        return np.full(11, np.nan, dtype=complex), np.inf
    rcond, _ = zgecon(lu, np.abs(m).sum(axis=0).max(), norm="1")
    x, _ = zgetrs(lu, piv, -1j * f)
    return x, (np.inf if rcond == 0 else 1.0 / rcond)


def alpha_rhs(t: float, alpha, p: CavityParams) -> np.ndarray:
    """Time derivative of the Wei-Norman exponents."""
    alpha = np.asarray(alpha, dtype=complex)
    m = assemble_M(alpha)
    x, cond = solve_rates(m, f_vector(p, t))
    if not cond <= COND_LIMIT:
        raise SingularStructureMatrix(t, alpha.copy(), cond)
    return x


@dataclass
class AlphaTrajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), 11)
    step_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    step_sizes: np.ndarray = field(default_factory=lambda: np.empty(0))
    step_conditions: np.ndarray = field(default_factory=lambda: np.empty(0))
    n_rejected: int = 0
    n_fev: int = 0

    @property
    def max_condition(self) -> float:
        return float(self.step_conditions.max()) if self.step_conditions.size else 1.0

    def __len__(self):
        return len(self.times)


def integrate(
    p: CavityParams,
    t_start: float,
    t_end: float,
    output_grid=None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> AlphaTrajectory:
    """Integrate the Wei-Norman exponents from alpha(t_start) = 0.

    ``output_grid`` defaults to ``[t_start, t_end]``; its first point must be
    ``t_start``.
    """
    if rtol <= 0 or atol <= 0:
        raise InvalidArgument("tolerances must be positive")
    if t_end < t_start:
        raise InvalidArgument("t_end must not precede t_start")
    if output_grid is None:
        output_grid = [t_start] if t_end == t_start else [t_start, t_end]
    grid = np.asarray(output_grid, dtype=float)
    if grid[0] != t_start or grid[-1] > t_end or np.any(np.diff(grid) <= 0):
        raise InvalidArgument("output grid must start at t_start, increase strictly and end by t_end")
    zero = np.zeros(11, dtype=complex)
    if t_end == t_start:
        return AlphaTrajectory(grid, zero[None, :].copy())

    conds: list[float] = []
    step_conds: list[float] = []

    def rhs(t, y):
        m = assemble_M(y)
        x, cond = solve_rates(m, f_vector(p, t))
        if not cond <= COND_LIMIT:
            raise SingularStructureMatrix(t, y.copy(), cond)
        conds.append(cond)
        return x

    def on_step(rec, y):
        step_conds.append(max(conds) if conds else 1.0)
        conds.clear()

    solver = DormandPrince(rhs, rtol=rtol, atol=atol, retry_on=(SingularStructureMatrix,),
                           on_step=on_step)
    res = solver.solve(t_start, zero, grid if grid[-1] == t_end else np.append(grid, t_end))
    states = res.y[: len(grid)]
    traj = AlphaTrajectory(
        times=grid,
        states=states,
        step_times=np.array([s.t for s in res.steps]),
        step_sizes=np.array([s.h for s in res.steps]),
        step_conditions=np.array(step_conds),
        n_rejected=res.n_rejected,
        n_fev=res.n_fev,
    )
    log.debug("integrated %d steps (%d rejected), max cond %.3g",
              len(res.steps), res.n_rejected, traj.max_condition)
    return traj
