"""Quadratic two-mode boson algebra with eleven generators.

Generators are numbered 1..11 in the order

    X1 = a1^dag^2,  X2 = a2^dag^2,  X3 = a1^dag a2^dag,  X4 = a1^dag a2,
    X5 = a1 a2^dag, X6 = n1,        X7 = n2,             X8 = a1^2,
    X9 = a2^2,      X10 = a1 a2,    X11 = identity.

An algebra element is a length-11 complex vector of coefficients over this
basis (index 0 holds the X1 coefficient).  Numeric Fock representations use
a per-mode cutoff ``c`` (occupations 0..c-1) with lexicographic ordering,
``index = n1 * c + n2``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument

N_GENERATORS = 11

LABELS = (
    "a1+^2", "a2+^2", "a1+ a2+", "a1+ a2", "a1 a2+",
    "n1", "n2", "a1^2", "a2^2", "a1 a2", "1",
)

# [X_a, X_b] for a < b, as {c: coefficient}.  Transcribed from the
# commutation tables; constant terms live on X11.  Pairs absent here commute.
_TABLE = {
    (1, 5): {3: -2},
    (1, 6): {1: -2},
    (1, 8): {6: -4, 11: -2},
    (1, 10): {4: -2},
    (2, 4): {3: -2},
    (2, 7): {2: -2},
    (2, 9): {7: -4, 11: -2},
    (2, 10): {5: -2},
    (3, 4): {1: -1},
    (3, 5): {2: -1},
    (3, 6): {3: -1},
    (3, 7): {3: -1},
    (3, 8): {5: -2},
    (3, 9): {4: -2},
    (3, 10): {6: -1, 7: -1, 11: -1},
    (4, 5): {6: 1, 7: -1},
    (4, 6): {4: -1},
    (4, 7): {4: 1},
    (4, 8): {10: -2},
    (4, 10): {9: -1},
    (5, 6): {5: 1},
    (5, 7): {5: -1},
    (5, 9): {10: -2},
    (5, 10): {8: -1},
    (6, 8): {8: -2},
    (6, 10): {10: -1},
    (7, 9): {9: -2},
    (7, 10): {10: -1},
}


def _build_structure_constants() -> np.ndarray:
    c = np.zeros((N_GENERATORS,) * 3, dtype=np.int64)
    for (a, b), terms in _TABLE.items():
        for k, v in terms.items():
            c[a - 1, b - 1, k - 1] = v
            c[b - 1, a - 1, k - 1] = -v
    c.setflags(write=False)
    return c


#: ``STRUCTURE_CONSTANTS[a, b, c]`` is the coefficient of X_{c+1} in
#: [X_{a+1}, X_{b+1}] (zero-based indices, integer valued).
STRUCTURE_CONSTANTS = _build_structure_constants()


def _check_index(g: int) -> int:
    if not isinstance(g, (int, np.integer)) or not 1 <= g <= N_GENERATORS:
        raise InvalidArgument(f"generator index must be an integer in 1..11, got {g!r}")
    return int(g)


def commutator(a: int, b: int) -> np.ndarray:
    """Return [X_a, X_b] as an 11-vector of coefficients (1-based indices)."""
    a, b = _check_index(a), _check_index(b)
    return STRUCTURE_CONSTANTS[a - 1, b - 1].astype(complex)


def adjoint_matrices() -> np.ndarray:
    """ad(X_a) for every generator, shape (11, 11, 11).

    ``ad[a] @ y`` gives the coefficients of [X_{a+1}, Y] for an element with
    coefficients ``y``.
    """
    # ad[a][c, b] = C[a, b, c]
    return np.transpose(STRUCTURE_CONSTANTS, (0, 2, 1)).astype(float)


def jacobi_residual() -> int:
    """Largest |[Xa,[Xb,Xc]] + cyclic| coefficient over all triples (exact integers)."""
    C = STRUCTURE_CONSTANTS
    # [Xb, Xc] = sum_d C[b,c,d] Xd ; [Xa, Xd] = sum_e C[a,d,e] Xe
    t = np.einsum("bcd,ade->abce", C, C)
    total = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
    return int(np.abs(total).max())


@dataclass
class ClosureReport:
    pairs_checked: int = 0
    pairs_closed: int = 0
    antisymmetric: bool = True
    jacobi_residual: int = 0
    violations: list = field(default_factory=list)
    structure_constants: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return (
            not self.violations
            and self.antisymmetric
            and self.jacobi_residual == 0
            and self.pairs_closed == self.pairs_checked
        )

    def to_dict(self) -> dict:
        return {
            "pairs_checked": self.pairs_checked,
            "pairs_closed": self.pairs_closed,
            "antisymmetric": self.antisymmetric,
            "jacobi_residual": self.jacobi_residual,
            "violations": self.violations,
            "structure_constants": (
                None if self.structure_constants is None
                else self.structure_constants.tolist()
            ),
        }


def verify_closure() -> ClosureReport:
    """Check every ordered pair against normal-ordered ladder algebra.

    Each commutator is recomputed independently by expanding both generators
    as normal-ordered polynomials in (a1, a1^dag, a2, a2^dag) and
    re-normal-ordering the product difference, then matched to the tabulated
    structure constants.
    """
    report = ClosureReport(structure_constants=STRUCTURE_CONSTANTS.copy())
    for a, b in itertools.product(range(1, N_GENERATORS + 1), repeat=2):
        report.pairs_checked += 1
        symbolic = _normal_ordered_commutator(a, b)
        coeffs = _project_onto_basis(symbolic)
        if coeffs is None:
            report.violations.append({"pair": [a, b], "reason": "outside span"})
            continue
        tab = STRUCTURE_CONSTANTS[a - 1, b - 1]
        if not np.array_equal(coeffs, tab):
            report.violations.append(
                {"pair": [a, b], "reason": "table mismatch",
                 "expected": coeffs.tolist(), "table": tab.tolist()}
            )
            continue
        report.pairs_closed += 1
        if np.any(tab + STRUCTURE_CONSTANTS[b - 1, a - 1]):
            report.antisymmetric = False
    report.jacobi_residual = jacobi_residual()
    return report


# Normal-ordered monomials are keyed by (p1, q1, p2, q2) meaning
# a1^dag^p1 a1^q1 a2^dag^p2 a2^q2.  Modes commute, so each mode is ordered
# independently.
_MONOMIALS = {
    1: (2, 0, 0, 0), 2: (0, 0, 2, 0), 3: (1, 0, 1, 0), 4: (1, 0, 0, 1),
    5: (0, 1, 1, 0), 6: (1, 1, 0, 0), 7: (0, 0, 1, 1), 8: (0, 2, 0, 0),
    9: (0, 0, 0, 2), 10: (0, 1, 0, 1), 11: (0, 0, 0, 0),
}


def _single_mode_product(p1: int, q1: int, p2: int, q2: int) -> dict:
    """Normal-order (a^dag^p1 a^q1)(a^dag^p2 a^q2) for one mode.

    Uses a^q a^dag^p = sum_k C(q,k) C(p,k) k! a^dag^(p-k) a^(q-k).
    """
    from math import comb, factorial

    out = {}
    for k in range(min(q1, p2) + 1):
        coeff = comb(q1, k) * comb(p2, k) * factorial(k)
        key = (p1 + p2 - k, q1 + q2 - k)
        out[key] = out.get(key, 0) + coeff
    return out


def _product(m1: tuple, m2: tuple) -> dict:
    mode1 = _single_mode_product(m1[0], m1[1], m2[0], m2[1])
    mode2 = _single_mode_product(m1[2], m1[3], m2[2], m2[3])
    out = {}
    for (p, q), c1 in mode1.items():
        for (r, s), c2 in mode2.items():
            key = (p, q, r, s)
            out[key] = out.get(key, 0) + c1 * c2
    return out


def _normal_ordered_commutator(a: int, b: int) -> dict:
    ab = _product(_MONOMIALS[a], _MONOMIALS[b])
    ba = _product(_MONOMIALS[b], _MONOMIALS[a])
    out = dict(ab)
    for k, v in ba.items():
        out[k] = out.get(k, 0) - v
    return {k: v for k, v in out.items() if v != 0}


def _project_onto_basis(poly: dict) -> np.ndarray | None:
    lookup = {m: g for g, m in _MONOMIALS.items()}
    coeffs = np.zeros(N_GENERATORS, dtype=np.int64)
    for mono, v in poly.items():
        if mono not in lookup:
            return None
        coeffs[lookup[mono] - 1] = v
    return coeffs


# --- Fock representation -------------------------------------------------------


def _ladder(cutoff: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, cutoff, dtype=float)), 1, format="csr")


def _mode_operators(cutoff: int):
    a = _ladder(cutoff)
    eye = sp.identity(cutoff, format="csr")
    a1 = sp.kron(a, eye, format="csr")
    a2 = sp.kron(eye, a, format="csr")
    return a1, a2


def fock_matrix(g: int, cutoff: int) -> sp.csr_matrix:
    """Matrix of X_g on the truncated two-mode Fock space (dimension cutoff**2).

    Products are formed from ladder operators that are already truncated, so
    e.g. ``a1^2`` maps |n1> to sqrt(n1 (n1 - 1)) |n1 - 2> exactly.
    """
    g = _check_index(g)
    if not isinstance(cutoff, (int, np.integer)) or cutoff < 2:
        raise InvalidArgument(f"cutoff must be an integer >= 2, got {cutoff!r}")
    a1, a2 = _mode_operators(int(cutoff))
    c1, c2 = a1.T.tocsr(), a2.T.tocsr()
    ops = {
        1: c1 @ c1, 2: c2 @ c2, 3: c1 @ c2, 4: c1 @ a2, 5: a1 @ c2,
        6: c1 @ a1, 7: c2 @ a2, 8: a1 @ a1, 9: a2 @ a2, 10: a1 @ a2,
        11: sp.identity(cutoff * cutoff, format="csr"),
    }
    m = ops[g].astype(complex).tocsr()
    m.eliminate_zeros()
    return m


@dataclass(frozen=True)
class FockRep:
    cutoff: int
    matrices: tuple

    @classmethod
    def build(cls, cutoff: int) -> "FockRep":
        return _cached_rep(int(cutoff))

    def __getitem__(self, g: int) -> sp.csr_matrix:
        return self.matrices[_check_index(g) - 1]

    def occupations(self) -> tuple[np.ndarray, np.ndarray]:
        n = np.arange(self.cutoff)
        return np.repeat(n, self.cutoff), np.tile(n, self.cutoff)

    def element(self, coeffs) -> sp.csr_matrix:
        out = sp.csr_matrix((self.cutoff ** 2,) * 2, dtype=complex)
        for c, m in zip(coeffs, self.matrices):
            if c != 0:
                out = out + complex(c) * m
        return out


@functools.lru_cache(maxsize=8)
def _cached_rep(cutoff: int) -> FockRep:
    return FockRep(cutoff, tuple(fock_matrix(g, cutoff) for g in range(1, 12)))


def interior_mask(cutoff: int, margin: int) -> np.ndarray:
    """Boolean mask of basis states with both occupations < cutoff - margin."""
    n = np.arange(cutoff)
    n1, n2 = np.repeat(n, cutoff), np.tile(n, cutoff)
    return (n1 < cutoff - margin) & (n2 < cutoff - margin)


@dataclass
class NumericClosureReport:
    cutoff: int
    margin: int
    max_deviation: float = 0.0
    pairs_checked: int = 0
    worst_pair: tuple | None = None
    failures: list = field(default_factory=list)
    tolerance: float = 1e-10

    @property
    def ok(self) -> bool:
        return not self.failures and self.pairs_checked == N_GENERATORS ** 2

    def to_dict(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "margin": self.margin,
            "max_deviation": self.max_deviation,
            "pairs_checked": self.pairs_checked,
            "worst_pair": self.worst_pair,
            "failures": self.failures,
        }


def verify_closure_numeric(cutoff: int = 12, interior_margin: int = 4,
                           tol: float = 1e-10) -> NumericClosureReport:
    """Compare matrix commutators with the structure constants on the interior block."""
    if interior_margin < 0 or cutoff < interior_margin + 4:
        raise InvalidArgument(
            f"need cutoff >= interior_margin + 4 (got cutoff={cutoff}, margin={interior_margin})"
        )
    rep = FockRep.build(cutoff)
    mask = interior_mask(cutoff, interior_margin)
    report = NumericClosureReport(cutoff, interior_margin, tolerance=tol)
    for a, b in itertools.product(range(1, 12), repeat=2):
        xa, xb = rep[a], rep[b]
        numeric = (xa @ xb - xb @ xa)
        symbolic = rep.element(STRUCTURE_CONSTANTS[a - 1, b - 1])
        diff = (numeric - symbolic).toarray()[np.ix_(mask, mask)]
        dev = float(np.abs(diff).max()) if diff.size else 0.0
        report.pairs_checked += 1
        if dev > report.max_deviation or report.worst_pair is None:
            report.max_deviation = max(dev, report.max_deviation)
            report.worst_pair = (a, b)
        if dev > tol:
            report.failures.append({"pair": [a, b], "deviation": dev})
    return report


# --- adjoint-chain oracle --------------------------------------------------------


def project_fock(mat: np.ndarray, cutoff: int) -> np.ndarray:
    """Read the 11 generator coefficients of a quadratic operator from its matrix.

    Only matrix elements between states with occupations <= 2 are used.
    """
    def el(bra, ket):
        return mat[bra[0] * cutoff + bra[1], ket[0] * cutoff + ket[1]]

    c = np.zeros(11, dtype=complex)
    c[10] = el((0, 0), (0, 0))
    c[5] = el((1, 0), (1, 0)) - c[10]
    c[6] = el((0, 1), (0, 1)) - c[10]
    c[0] = el((2, 0), (0, 0)) / np.sqrt(2)
    c[1] = el((0, 2), (0, 0)) / np.sqrt(2)
    c[2] = el((1, 1), (0, 0))
    c[3] = el((1, 0), (0, 1))
    c[4] = el((0, 1), (1, 0))
    c[7] = el((0, 0), (2, 0)) / np.sqrt(2)
    c[8] = el((0, 0), (0, 2)) / np.sqrt(2)
    c[9] = el((0, 0), (1, 1))
    return c


@dataclass
class AdjointChainResult:
    matrix: np.ndarray
    #: largest interior-block mismatch between a conjugated matrix and the
    #: generator combination read back from it (closure witness)
    projection_residual: float


def adjoint_chain_fock(alpha, cutoff: int = 10, margin: int = 4) -> AdjointChainResult:
    """Numerically evaluate the Wei-Norman coupling matrix on a Fock space.

    Column j holds the generator coefficients of
    prod_{n<j} e^{alpha_n X_n} X_j prod_{n<j} e^{-alpha_n X_n}.  The factors
    are applied one at a time as dense similarity transforms of truncated
    Fock matrices, and the result is read back onto the generator basis
    after every factor.  Raising and lowering generators have triangular
    exponentials, so the low-lying matrix elements used for the read-back
    involve only finite sums and are exact for any cutoff >= 8.
    """
    from scipy.linalg import expm

    alpha = np.asarray(alpha, dtype=complex)
    if cutoff < margin + 4:
        raise InvalidArgument("cutoff too small for the requested margin")
    rep = FockRep.build(cutoff)
    dense = [m.toarray() for m in rep.matrices]
    mask = interior_mask(cutoff, margin)
    fwd = [expm(alpha[n] * dense[n]) for n in range(10)]
    bwd = [expm(-alpha[n] * dense[n]) for n in range(10)]

    m = np.zeros((11, 11), dtype=complex)
    worst = 0.0
    for j in range(11):
        coeffs = np.zeros(11, dtype=complex)
        coeffs[j] = 1.0
        for n in range(j - 1, -1, -1):
            y = np.tensordot(coeffs, dense, axes=1)
            y = fwd[n] @ y @ bwd[n]
            coeffs = project_fock(y, cutoff)
            back = np.tensordot(coeffs, dense, axes=1)
            worst = max(worst, float(np.abs((y - back)[np.ix_(mask, mask)]).max()))
        m[:, j] = coeffs
    return AdjointChainResult(m, worst)
