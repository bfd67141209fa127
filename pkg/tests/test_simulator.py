import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from adaptvqe.adapt import build_fermionic_pool, reference_for
from adaptvqe.hamiltonian import build_effective_hamiltonian, exact_ground_energy, load_fixture, qubit_hamiltonian
from adaptvqe.pauli import DimensionError, PauliString, QubitOperator, to_matrix
from adaptvqe.simulator import (
    QuantumState,
    apply_pauli_exponential,
    energy,
    energy_and_gradient,
    expectation_exact,
    expectation_sampled,
    prepare_state,
)

from conftest import pauli_strings, random_operator, random_state


def h2_operator():
    ints, space = load_fixture("h2")
    ham = build_effective_hamiltonian(ints, space)
    return ham, qubit_hamiltonian(ham)[0]


def test_exponential_examples():
    psi = QuantumState.basis(1)
    np.testing.assert_allclose(apply_pauli_exponential(psi, PauliString.from_letters("Y"), 0.0).amplitudes, [1, 0])
    out = apply_pauli_exponential(psi, PauliString.from_letters("Y"), np.pi / 4).amplitudes
    np.testing.assert_allclose(out, [np.cos(np.pi / 4), -np.sin(np.pi / 4)], atol=1e-15)
    rng = np.random.default_rng(0)
    phi = random_state(rng, 3)
    np.testing.assert_allclose(apply_pauli_exponential(phi, PauliString.from_letters("XZY"), 2 * np.pi), phi, atol=1e-14)


def test_dimension_checks():
    with pytest.raises(DimensionError):
        apply_pauli_exponential(QuantumState.basis(2), PauliString.from_letters("XXX"), 0.1)
    with pytest.raises(DimensionError):
        QuantumState(np.ones(3) / np.sqrt(3))
    with pytest.raises(ValueError, match="norm"):
        QuantumState(np.ones(4))


@given(pauli_strings(max_qubits=4), st.floats(-10, 10), st.integers(0, 2**32 - 1))
def test_exponential_matches_expm(p, theta, seed):
    psi = random_state(np.random.default_rng(seed), p.n_qubits)
    np.testing.assert_allclose(
        apply_pauli_exponential(psi, p, theta), expm(1j * theta * to_matrix(p)) @ psi, atol=1e-12
    )


@given(st.lists(pauli_strings(5), min_size=1, max_size=20), st.integers(0, 2**32 - 1))
def test_norm_preservation(paulis, seed):
    rng = np.random.default_rng(seed)
    state = QuantumState(random_state(rng, 5))
    for p in paulis:
        state = apply_pauli_exponential(state, p, rng.uniform(-5, 5))
    np.testing.assert_allclose(state.norm(), 1.0, atol=1e-12)


@given(pauli_strings(4), st.floats(-4, 4), st.integers(0, 2**32 - 1))
def test_energy_periodicity(p, theta, seed):
    rng = np.random.default_rng(seed)
    h = random_operator(rng, 4, 8)
    ref = random_state(rng, 4)
    gen = [QubitOperator({p: 1j}, 4)]
    e0 = energy(h, ref, gen, [theta])
    np.testing.assert_allclose(energy(h, ref, gen, [theta + 2 * np.pi]), e0, atol=1e-12)
    np.testing.assert_allclose(energy(h, ref, gen, [-np.pi]), energy(h, ref, gen, [np.pi]), atol=1e-12)


def test_expectation_examples():
    assert expectation_exact(QuantumState.basis(3), QubitOperator.from_dict({"Z0": 1}, 3)) == 1.0
    ham, q = h2_operator()
    ints, _ = load_fixture("h2")
    hf = QuantumState.from_occupations(reference_for(4, 2))
    slater_condon = ints.e_core + 2 * ints.h[0, 0] + ints.g[0, 0, 0, 0]
    np.testing.assert_allclose(expectation_exact(hf, q), slater_condon, atol=1e-12)
    np.testing.assert_allclose(expectation_exact(hf, q), to_matrix(q)[3, 3].real, atol=1e-12)


def test_benzene_correlation_energy():
    ints, space = load_fixture("benzene")
    q, _ = qubit_hamiltonian(build_effective_hamiltonian(ints, space))
    e_hf = expectation_exact(QuantumState.from_occupations(reference_for(8, 4)), q)
    corr = e_hf - exact_ground_energy(q, 4, 0)
    assert abs(corr - 0.0539) < 1e-4


def test_expectation_rejects_non_hermitian():
    with pytest.raises(ValueError):
        expectation_exact(QuantumState.basis(1), QubitOperator.from_dict({"X0": 1j}, 1))
    with pytest.raises(ValueError):
        expectation_sampled(QuantumState.basis(1), QubitOperator.from_dict({"X0": 1j}, 1), 10)


def test_sampled_trivial_cases():
    est = expectation_sampled(QuantumState.basis(2), QubitOperator.scalar(-1.5, 2), 100, 0)
    assert est.value == -1.5 and est.std_error == 0.0
    z = QubitOperator.from_dict({"I": 0.25, "Z0": 0.5, "Z0 Z1": -0.3}, 2)
    est = expectation_sampled(QuantumState.basis(2), z, 100, 0)
    np.testing.assert_allclose(est.value, 0.45, atol=1e-15)
    assert est.std_error == 0.0 and est.n_terms_measured == 2
    with pytest.raises(ValueError):
        expectation_sampled(QuantumState.basis(2), z, 1, 0)


def test_sampled_reproducible():
    _, q = h2_operator()
    psi = random_state(np.random.default_rng(5), 4)
    assert expectation_sampled(psi, q, 100, 42) == expectation_sampled(psi, q, 100, 42)
    assert expectation_sampled(psi, q, 100, 42) != expectation_sampled(psi, q, 100, 43)


def test_sampled_coverage_at_hf():
    _, q = h2_operator()
    hf = QuantumState.from_occupations(reference_for(4, 2))
    # HF is an eigenstate of every Z term; rotate slightly so sampling is non-trivial
    gen = [QubitOperator.from_dict({"X0 X1 X2 Y3": 1j}, 4)]
    psi = prepare_state(hf, gen, [0.2])
    exact = expectation_exact(psi, q)
    hits = 0
    for seed in range(1000):
        est = expectation_sampled(psi, q, 500, seed)
        hits += abs(est.value - exact) <= 4 * est.std_error
    assert hits >= 990


def test_sampled_unbiased():
    rng = np.random.default_rng(9)
    h = random_operator(rng, 3, 6)
    psi = random_state(rng, 3)
    exact = expectation_exact(psi, h)
    gen = np.random.default_rng(123)
    ests = [expectation_sampled(psi, h, 50, gen) for _ in range(10_000)]
    values = np.array([e.value for e in ests])
    se = np.sqrt(np.mean([e.std_error**2 for e in ests]) / len(ests))
    assert abs(values.mean() - exact) < 5 * se


@given(st.integers(0, 2**32 - 1))
def test_adjoint_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    h = random_operator(rng, 4, 10)
    pool = build_fermionic_pool(2, 2)
    gens = [pool[int(i)].qubit_generator for i in rng.integers(len(pool), size=3)]
    gens.append(QubitOperator({PauliString(4, int(rng.integers(1, 16)), int(rng.integers(16))): 1j}, 4))
    ref = QuantumState.from_occupations(reference_for(4, 2))
    th = rng.uniform(-1, 1, size=len(gens))
    _, g = energy_and_gradient(h, ref, gens, th)
    step = 1e-5
    fd = [(energy(h, ref, gens, th + step * e) - energy(h, ref, gens, th - step * e)) / (2 * step) for e in np.eye(len(th))]
    np.testing.assert_allclose(g, fd, atol=1e-7)


def test_operator_order_newest_last():
    a = QubitOperator.from_dict({"X0": 1j}, 1)
    b = QubitOperator.from_dict({"Z0": 1j}, 1)
    psi = prepare_state(QuantumState.basis(1), [a, b], [0.3, 0.5])
    expected = expm(0.5j * to_matrix(PauliString.from_letters("Z"))) @ expm(0.3j * to_matrix(PauliString.from_letters("X"))) @ [1, 0]
    np.testing.assert_allclose(psi, expected, atol=1e-14)
