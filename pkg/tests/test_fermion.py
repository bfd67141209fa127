import numpy as np
import pytest
from hypothesis import given, strategies as st

from adaptvqe.fermion import (
    FermionOperator,
    hartree_fock_reference,
    jordan_wigner,
    ladder_matrix,
    number_operator,
    occupation_index,
)
from adaptvqe.pauli import QubitOperator, to_matrix
from adaptvqe.simulator import QuantumState, expectation_exact


def ladder(mode, creation, n):
    return jordan_wigner(FermionOperator.term([(mode, creation)], n))


def test_number_operator_example():
    q = jordan_wigner(FermionOperator.term("0^ 0", 1))
    assert q == QubitOperator.from_dict({"I": 0.5, "Z0": -0.5}, 1)


def test_creation_example_matches_ladder_matrix():
    q = ladder(0, True, 2)
    assert q == QubitOperator.from_dict({"X0": 0.5, "Y0": -0.5j}, 2)
    np.testing.assert_allclose(to_matrix(q), ladder_matrix(0, True, 2), atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_canonical_anticommutation(n):
    a = [to_matrix(ladder(p, False, n)) for p in range(n)]
    ad = [to_matrix(ladder(p, True, n)) for p in range(n)]
    eye = np.eye(1 << n)
    for p in range(n):
        for q in range(n):
            np.testing.assert_allclose(a[p] @ ad[q] + ad[q] @ a[p], eye * (p == q), atol=1e-12)
            np.testing.assert_allclose(a[p] @ a[q] + a[q] @ a[p], 0, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_jw_matches_occupation_basis_ladders(n):
    for p in range(n):
        for d in (True, False):
            np.testing.assert_allclose(to_matrix(ladder(p, d, n)), ladder_matrix(p, d, n), atol=1e-15)


def _random_fermion(rng, n, n_terms):
    terms = []
    for _ in range(n_terms):
        k = int(rng.integers(0, 5))
        word = [(int(rng.integers(n)), bool(rng.integers(2))) for _ in range(k)]
        terms.append((word, complex(rng.normal(), rng.normal())))
    return FermionOperator(terms, n)


@given(st.integers(0, 2**32 - 1), st.floats(-2, 2), st.floats(-2, 2))
def test_jw_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    f, g = _random_fermion(rng, 4, 4), _random_fermion(rng, 4, 4)
    assert jordan_wigner(a * f + b * g).allclose(a * jordan_wigner(f) + b * jordan_wigner(g), atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_jw_matches_ladder_products_and_normal_ordering(seed):
    rng = np.random.default_rng(seed)
    n = 3
    f = _random_fermion(rng, n, 3)
    dense = np.zeros((1 << n, 1 << n), dtype=complex)
    for prod, c in f:
        m = np.eye(1 << n)
        for mode, d in prod:
            m = m @ ladder_matrix(mode, d, n)
        dense += c * m
    np.testing.assert_allclose(to_matrix(jordan_wigner(f)), dense, atol=1e-12)
    reordered = FermionOperator(list(f.normal_ordered().items()), n)
    np.testing.assert_allclose(to_matrix(jordan_wigner(reordered)), dense, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_hermitian_maps_to_hermitian(seed):
    rng = np.random.default_rng(seed)
    f = _random_fermion(rng, 4, 3)
    assert jordan_wigner(f + f.dagger()).is_hermitian()


@pytest.mark.parametrize("n,ne,expected", [(4, 2, [1, 1, 0, 0]), (8, 4, [1, 1, 1, 1, 0, 0, 0, 0]), (2, 0, [0, 0])])
def test_hartree_fock_reference(n, ne, expected):
    np.testing.assert_array_equal(hartree_fock_reference(n, ne), expected)


def test_hartree_fock_overflow():
    with pytest.raises(ValueError):
        hartree_fock_reference(2, 3)


@pytest.mark.parametrize("n,ne", [(4, 2), (6, 3), (8, 4)])
def test_number_operator_on_reference(n, ne):
    occ = hartree_fock_reference(n, ne)
    state = QuantumState.basis(n, occupation_index(occ))
    assert expectation_exact(state, jordan_wigner(number_operator(n))) == ne


def test_mode_bounds_and_dagger():
    with pytest.raises(IndexError):
        FermionOperator.term("4^ 0", 4)
    f = FermionOperator.term("3^ 1", 4, 2j)
    assert f.dagger().terms == [(((1, True), (3, False)), -2j)]
    assert (f - f.dagger()).is_anti_hermitian()
    assert not (f + f.dagger()).is_anti_hermitian()
    assert (f + (-1) * f.dagger()).equals(f - f.dagger())


def test_normal_ordered_anticommutator():
    # a_0 a_0^ = 1 - a_0^ a_0
    no = FermionOperator.term("0 0^", 2).normal_ordered()
    assert no == {(): 1, ((0, True), (0, False)): -1}
