import numpy as np
import pytest
from hypothesis import given, strategies as st

from casimir_wn import algebra
from casimir_wn.errors import InvalidArgument

gen = st.integers(min_value=1, max_value=11)


def basis(*pairs):
    v = np.zeros(11, dtype=complex)
    for g, c in pairs:
        v[g - 1] = c
    return v


def test_table_examples():
    assert np.array_equal(algebra.commutator(4, 5), basis((6, 1), (7, -1)))
    assert np.array_equal(algebra.commutator(3, 10), basis((6, -1), (7, -1), (11, -1)))
    assert np.array_equal(algebra.commutator(1, 8), basis((6, -4), (11, -2)))
    assert np.array_equal(algebra.commutator(1, 2), np.zeros(11))


@given(gen, gen)
def test_antisymmetry(a, b):
    assert np.array_equal(algebra.commutator(a, b), -algebra.commutator(b, a))


def test_index_range():
    for bad in (0, 12, -1):
        with pytest.raises(InvalidArgument):
            algebra.commutator(bad, 1)


def test_structure_constants_read_only():
    c = algebra.STRUCTURE_CONSTANTS
    assert c.shape == (11, 11, 11)
    with pytest.raises(ValueError):
        c[0, 0, 0] = 1


def test_verify_closure():
    report = algebra.verify_closure()
    assert report.pairs_checked == 121
    assert report.pairs_closed == 121
    assert report.antisymmetric
    assert report.jacobi_residual == 0
    assert report.ok


def test_jacobi_residual_is_exact_zero():
    assert algebra.jacobi_residual() == 0


def test_fock_matrix_number_operator():
    m = algebra.fock_matrix(6, 3).toarray()
    assert np.allclose(m, np.diag([0, 0, 0, 1, 1, 1, 2, 2, 2]))


def test_fock_matrix_raising_pair():
    m = algebra.fock_matrix(1, 3).toarray()
    # |0,n2> -> sqrt(2) |2,n2>; n1 is the major index
    for n2 in range(3):
        assert m[6 + n2, n2] == pytest.approx(np.sqrt(2))
    assert np.count_nonzero(m) == 3


def test_fock_matrix_identity():
    assert np.array_equal(algebra.fock_matrix(11, 2).toarray(), np.eye(4))


def test_fock_matrix_cutoff_too_small():
    with pytest.raises(InvalidArgument):
        algebra.fock_matrix(1, 1)


def test_fock_hermiticity_pairing():
    rep = algebra.FockRep.build(6)
    for g in (6, 7, 11):
        h = rep[g].toarray()
        assert np.allclose(h, h.conj().T)
    for raise_, lower in ((1, 8), (2, 9), (3, 10), (4, 5)):
        assert np.allclose(rep[lower].toarray(), rep[raise_].toarray().conj().T)


def test_numeric_closure():
    report = algebra.verify_closure_numeric(12, 4)
    assert report.ok
    assert report.max_deviation <= 1e-10


def test_numeric_closure_n1_minus_n2_block():
    rep = algebra.FockRep.build(12)
    comm = (rep[4] @ rep[5] - rep[5] @ rep[4]).toarray()
    n1, n2 = rep.occupations()
    mask = algebra.interior_mask(12, 4)
    assert np.allclose(comm[np.ix_(mask, mask)], np.diag((n1 - n2)[mask]), atol=1e-12)


def test_identity_commutes_everywhere():
    rep = algebra.FockRep.build(8)
    for g in range(1, 12):
        comm = rep[11] @ rep[g] - rep[g] @ rep[11]
        assert abs(comm).max() == 0


def test_numeric_closure_cutoff_too_small():
    with pytest.raises(InvalidArgument):
        algebra.verify_closure_numeric(6, 4)


def test_adjoint_chain_at_zero_is_identity():
    res = algebra.adjoint_chain_fock(np.zeros(11))
    assert np.allclose(res.matrix, np.eye(11), atol=1e-14)
