"""Brute-force reference: Schrodinger evolution on a truncated Fock space.

The two-mode effective Hamiltonian is built directly from truncated ladder
operators and propagated from |0,0> with classical fixed-step RK4.  Nothing
here uses the Wei-Norman exponents or the transfer-matrix formulas.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import algebra
from .errors import InvalidArgument, OracleDivergence
from .model import CavityParams, coupling_mu, f_vector, modulation_rate, trajectory
from .observables import MANDEL_THRESHOLD, ObservableRecord, invariant_from_moments

log = logging.getLogger(__name__)

NORM_DRIFT_LIMIT = 1e-4
LEAKAGE_LIMIT = 1e-6
DEFAULT_CUTOFF = 40
STEP_FACTOR = 0.05


def _check_cutoff(cutoff: int) -> None:
    if not isinstance(cutoff, (int, np.integer)) or cutoff < 4:
        raise InvalidArgument(f"oracle cutoff must be an integer >= 4, got {cutoff!r}")


@dataclass
class _Operators:
    cutoff: int
    a1: sp.csr_matrix
    a2: sp.csr_matrix
    n1: np.ndarray
    n2: np.ndarray
    coupling: sp.csr_matrix  # the part of H multiplying q'/q
    outer: np.ndarray  # mask of the two outermost shells


_CACHE: dict[int, _Operators] = {}


def _operators(cutoff: int) -> _Operators:
    if cutoff in _CACHE:
        return _CACHE[cutoff]
    a = sp.diags(np.sqrt(np.arange(1, cutoff, dtype=float)), 1, format="csr")
    eye = sp.identity(cutoff, format="csr")
    a1 = sp.kron(a, eye, format="csr").astype(complex)
    a2 = sp.kron(eye, a, format="csr").astype(complex)
    ad = {1: a1.T.tocsr(), 2: a2.T.tocsr()}
    an = {1: a1, 2: a2}
    # (i/4) sum_k (a_k^dag^2 - a_k^2)
    k_op = sum(0.25j * (ad[k] @ ad[k] - an[k] @ an[k]) for k in (1, 2))
    # (i/2) sum_{j != k} mu_jk (a_k^dag a_j^dag + a_k^dag a_j - a_k a_j^dag - a_k a_j)
    for j, k in ((1, 2), (2, 1)):
        mu = coupling_mu(j, k)
        k_op = k_op + 0.5j * mu * (
            ad[k] @ ad[j] + ad[k] @ an[j] - an[k] @ ad[j] - an[k] @ an[j]
        )
    k_op = sp.csr_matrix(k_op)
    k_op.eliminate_zeros()
    occ = np.arange(cutoff, dtype=float)
    n1 = np.repeat(occ, cutoff)
    n2 = np.tile(occ, cutoff)
    ops = _Operators(cutoff, a1, a2, n1, n2, k_op,
                     (n1 >= cutoff - 2) | (n2 >= cutoff - 2))
    _CACHE[cutoff] = ops
    return ops


def build_hamiltonian(p: CavityParams, t: float, cutoff: int) -> sp.csr_matrix:
    """H_eff(t) from the multimode formula with N = 2."""
    _check_cutoff(cutoff)
    ops = _operators(cutoff)
    q = trajectory(p, t)
    diag = sp.diags((math.pi / q) * ops.n1 + (2 * math.pi / q) * ops.n2)
    return sp.csr_matrix(diag + modulation_rate(p, t) * ops.coupling)


def build_hamiltonian_from_generators(p: CavityParams, t: float, cutoff: int) -> sp.csr_matrix:
    """Same operator assembled as sum_n f_n(t) X_n from the generator matrices."""
    _check_cutoff(cutoff)
    rep = algebra.FockRep.build(cutoff)
    return rep.element(f_vector(p, t))


def hermiticity_residual(h: sp.spmatrix, margin: int = 0) -> float:
    n = int(round(math.sqrt(h.shape[0])))
    mask = algebra.interior_mask(n, margin)
    d = (h - h.conj().T).toarray()[np.ix_(mask, mask)]
    return float(np.abs(d).max()) if d.size else 0.0


def norm_bound(p: CavityParams, cutoff: int) -> float:
    """Row-sum bound on ||H(t)|| valid for every t."""
    ops = _operators(cutoff)
    q_min = p.L * math.exp(-p.q0 / p.L)
    eta_max = p.q0 * abs(p.omega_d) / p.L
    diag = (math.pi / q_min) * (ops.n1 + 2 * ops.n2)
    rows = np.asarray(abs(ops.coupling).sum(axis=1)).ravel()
    return float((diag + eta_max * rows).max())


@dataclass
class OracleDiagnostics:
    norm_drift: float = 0.0
    leakage: float = 0.0
    step_count: int = 0
    dt: float = 0.0
    cutoff: int = 0
    leakage_per_sample: list = field(default_factory=list)
    #: first grid time at which leakage exceeded LEAKAGE_LIMIT, if any
    leakage_flag_time: float | None = None

    @property
    def leakage_flag(self) -> bool:
        return self.leakage_flag_time is not None

    def to_dict(self) -> dict:
        return {
            "norm_drift": self.norm_drift,
            "leakage": self.leakage,
            "step_count": self.step_count,
            "dt": self.dt,
            "cutoff": self.cutoff,
            "leakage_flag_time": self.leakage_flag_time,
        }


@dataclass
class OracleRun:
    times: np.ndarray
    states: np.ndarray  # (len(times), cutoff**2)
    diagnostics: OracleDiagnostics
    cutoff: int

    def valid_mask(self, limit: float = LEAKAGE_LIMIT) -> np.ndarray:
        """Samples taken before leakage first reached ``limit``."""
        leak = np.asarray(self.diagnostics.leakage_per_sample)
        bad = np.nonzero(leak >= limit)[0]
        mask = np.ones(len(self.times), dtype=bool)
        if bad.size:
            mask[bad[0]:] = False
        return mask


def evolve(
    p: CavityParams,
    t_grid,
    cutoff: int = DEFAULT_CUTOFF,
    dt_max: float = 1e-2,
    stop_leakage: float | None = None,
) -> OracleRun:
    """Propagate |0,0> over ``t_grid`` (t_grid[0] is the initial time).

    With ``stop_leakage`` set, propagation ends at the first grid point where
    boundary population reaches that value; later samples are omitted.
    """
    _check_cutoff(cutoff)
    if dt_max <= 0:
        raise InvalidArgument("dt_max must be positive")
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise InvalidArgument("t_grid must be strictly increasing")
    ops = _operators(cutoff)
    dt_target = min(dt_max, STEP_FACTOR / norm_bound(p, cutoff))
    n1w, n2w, kop = ops.n1, ops.n2, ops.coupling

    def deriv(t, psi):
        q = trajectory(p, t)
        hpsi = ((math.pi / q) * (n1w + 2 * n2w)) * psi + modulation_rate(p, t) * (kop @ psi)
        return -1j * hpsi

    psi = np.zeros(cutoff * cutoff, dtype=complex)
    psi[0] = 1.0
    diag = OracleDiagnostics(dt=dt_target, cutoff=cutoff)
    states = [psi.copy()]

    def check(t, psi):
        norm = float(np.linalg.norm(psi))
        drift = abs(norm - 1.0)
        diag.norm_drift = max(diag.norm_drift, drift)
        if drift > NORM_DRIFT_LIMIT:
            raise OracleDivergence(f"norm drift {drift:.3g} at t={t:.6g}")
        leak = float(np.sum(np.abs(psi[ops.outer]) ** 2))
        diag.leakage = max(diag.leakage, leak)
        diag.leakage_per_sample.append(leak)
        if leak >= LEAKAGE_LIMIT and diag.leakage_flag_time is None:
            diag.leakage_flag_time = float(t)
            log.info("oracle leakage %.3g at t=%.4g (cutoff %d)", leak, t, cutoff)
        return leak

    check(grid[0], psi)
    for i in range(1, len(grid)):
        t0, t1 = grid[i - 1], grid[i]
        n_sub = max(1, math.ceil((t1 - t0) / dt_target - 1e-9))
        h = (t1 - t0) / n_sub
        t = t0
        for _ in range(n_sub):
            k1 = deriv(t, psi)
            k2 = deriv(t + h / 2, psi + (h / 2) * k1)
            k3 = deriv(t + h / 2, psi + (h / 2) * k2)
            k4 = deriv(t + h, psi + h * k3)
            psi = psi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            t = t0 + (_ + 1) * h
        diag.step_count += n_sub
        states.append(psi.copy())
        leak = check(t1, psi)
        if stop_leakage is not None and leak >= stop_leakage:
            break
    return OracleRun(grid[: len(states)], np.array(states), diag, cutoff)


def _expect(psi, op_psi) -> complex:
    return complex(np.vdot(psi, op_psi))


def measure(psi, cutoff: int, t: float = 0.0) -> ObservableRecord:
    """Observables of a Fock state vector, from direct expectation values."""
    _check_cutoff(cutoff)
    ops = _operators(cutoff)
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    a1p, a2p = ops.a1 @ psi, ops.a2 @ psi
    m_a1, m_a2 = _expect(psi, a1p), _expect(psi, a2p)
    m_a1a1 = _expect(psi, ops.a1 @ a1p)
    m_a2a2 = _expect(psi, ops.a2 @ a2p)
    m_a1a2 = _expect(psi, ops.a1 @ a2p)
    m_a1d_a2 = complex(np.vdot(a1p, a2p))  # <a1^dag a2>
    prob = np.abs(psi) ** 2
    n1, n2 = float(prob @ ops.n1), float(prob @ ops.n2)
    n1sq, n2sq = float(prob @ ops.n1**2), float(prob @ ops.n2**2)

    def quad(m_a, m_aa, n):
        # Q = (a + a^dag)/sqrt2, P = i(a^dag - a)/sqrt2
        mq = math.sqrt(2) * m_a.real
        mp = math.sqrt(2) * m_a.imag
        q2 = (m_aa + np.conj(m_aa)).real / 2 + n + 0.5
        p2 = -(m_aa + np.conj(m_aa)).real / 2 + n + 0.5
        return mq, mp, math.sqrt(max(q2 - mq**2, 0.0)), math.sqrt(max(p2 - mp**2, 0.0))

    mq1, mp1, dq1, dp1 = quad(m_a1, m_a1a1, n1)
    mq2, mp2, dq2, dp2 = quad(m_a2, m_a2a2, n2)

    d = invariant_from_moments(
        sN1=n1 - abs(m_a1) ** 2,
        sa1=m_a1a1 - m_a1**2,
        sN2=n2 - abs(m_a2) ** 2,
        sa2=m_a2a2 - m_a2**2,
        a1d_a2=m_a1d_a2 - np.conj(m_a1) * m_a2,
        a2d_a1=np.conj(m_a1d_a2) - np.conj(m_a2) * m_a1,
        a1_a2=m_a1a2 - m_a1 * m_a2,
    )

    def mandel(n, nsq):
        return None if n < MANDEL_THRESHOLD else (nsq - n * n) / n

    return ObservableRecord(
        t=float(t), n1=n1, n2=n2, dQ1=dq1, dP1=dp1, dQ2=dq2, dP2=dp2,
        prod1=dq1 * dp1, prod2=dq2 * dp2,
        mandel_q1=mandel(n1, n1sq), mandel_q2=mandel(n2, n2sq),
        invariant=float(np.real(d)),
        mean_Q1=mq1, mean_P1=mp1, mean_Q2=mq2, mean_P2=mp2,
    )


def measure_run(run: OracleRun) -> list[ObservableRecord]:
    return [measure(psi, run.cutoff, t) for t, psi in zip(run.times, run.states)]
