import json

import numpy as np
import pytest

from adaptvqe.adapt import (
    AdaptConfig,
    Ansatz,
    PoolOperator,
    adapt_run,
    build_fermionic_pool,
    build_qubit_pool,
    filter_pool_by_symmetry,
    irrep_product,
    pool_gradients,
    reference_for,
    uccsd_singlet_generator,
)
from adaptvqe.fermion import FermionOperator
from adaptvqe.hamiltonian import build_effective_hamiltonian, exact_ground_energy, load_fixture, qubit_hamiltonian
from adaptvqe.pauli import PauliString, to_matrix
from adaptvqe.simulator import QuantumState, energy, expectation_exact


def fixture(name, threshold=None):
    ints, space = load_fixture(name)
    ham = build_effective_hamiltonian(ints, space)
    q, _ = qubit_hamiltonian(ham, threshold)
    return ham, q


@pytest.fixture(scope="module")
def h4():
    ham, q = fixture("h4")
    return ham, q, exact_ground_energy(q, 4, 0)


def test_pool_sizes():
    assert len(build_fermionic_pool(2, 2)) == 2
    assert [op.label[0] for op in build_fermionic_pool(2, 2)] == ["S", "D"]
    assert len(build_fermionic_pool(4, 4)) == 14
    assert build_fermionic_pool(2, 4) == []
    assert len(uccsd_singlet_generator(4, 4)) == 64
    assert len(build_fermionic_pool(4, 4, "uccsd")) == 32
    with pytest.raises(ValueError):
        build_fermionic_pool(4, 4, "bogus")


@pytest.mark.parametrize("variant", ["singlet_sd", "uccsd"])
def test_generators_are_anti_hermitian(variant):
    for op in build_fermionic_pool(4, 4, variant):
        assert op.generator.is_anti_hermitian()
        assert op.qubit_generator.is_anti_hermitian()
        m = to_matrix(op.qubit_generator)
        np.testing.assert_allclose(m.conj().T, -m, atol=1e-14)


def test_singlet_operators_conserve_number_and_spin():
    ref = QuantumState.from_occupations(reference_for(8, 4))
    for op in build_fermionic_pool(4, 4):
        m = to_matrix(op.qubit_generator)
        out = m @ ref.amplitudes
        idx = np.flatnonzero(np.abs(out) > 1e-12)
        bits = (idx[:, None] >> np.arange(8)) & 1
        assert np.all(bits.sum(axis=1) == 4)
        assert np.all(bits[:, 0::2].sum(axis=1) == bits[:, 1::2].sum(axis=1))


def test_symmetry_filter_benzene():
    ham, _ = fixture("benzene")
    pool = build_fermionic_pool(4, 4)
    kept = filter_pool_by_symmetry(pool, ham.orbsym)
    assert len(kept) == 6
    assert all(op.irrep == 0 for op in kept)
    assert all(op.irrep is None for op in pool)


def test_symmetry_filter_examples():
    pool = build_fermionic_pool(3, 2)
    assert len(filter_pool_by_symmetry(pool, (1, 1, 1))) == len(pool)
    kept = filter_pool_by_symmetry(build_fermionic_pool(2, 2), (1, 2))
    assert [op.label[0] for op in kept] == ["D"]
    assert irrep_product([2, 3]) == 3 and irrep_product([5, 5]) == 0
    with pytest.raises(ValueError):
        filter_pool_by_symmetry(pool, (1, 9, 1))


def test_qubit_pool_examples():
    gen = FermionOperator([(((1, True), (0, False)), 1.0), (((0, True), (1, False)), -1.0)], 2)
    single = PoolOperator("fermionic", gen, "t")
    qp = build_qubit_pool([single])
    assert sorted(op.label for op in qp) == ["X0 Y1", "Y0 X1"]
    assert len(build_qubit_pool([single, single])) == 2
    ham, _ = fixture("benzene")
    qpool = build_qubit_pool(filter_pool_by_symmetry(build_fermionic_pool(4, 4), ham.orbsym))
    assert len(qpool) > 6
    stripped = build_qubit_pool(build_fermionic_pool(4, 4), strip_z_chains=True)
    assert all(p.generator.z & ~p.generator.x == 0 for p in stripped)


def test_gradients_vanish_at_eigenstate():
    _, q = fixture("h2")
    w, v = np.linalg.eigh(to_matrix(q))
    grads = pool_gradients(v[:, 0], q, build_fermionic_pool(2, 2))
    np.testing.assert_allclose(grads, 0, atol=1e-12)


def test_h2_double_excitation_dominates():
    _, q = fixture("h2")
    pool = build_fermionic_pool(2, 2)
    grads = np.abs(pool_gradients(QuantumState.from_occupations(reference_for(4, 2)), q, pool))
    k = int(np.argmax(grads))
    assert pool[k].label.startswith("D") and grads[k] > grads[1 - k] + 1e-6


def test_gradients_match_finite_differences():
    _, q = fixture("h4")
    pool = build_qubit_pool(build_fermionic_pool(4, 4))[:20]
    rng = np.random.default_rng(0)
    psi = rng.normal(size=256) + 1j * rng.normal(size=256)
    psi /= np.linalg.norm(psi)
    grads = pool_gradients(psi, q, pool)
    h = 1e-5
    for op, g in zip(pool, grads):
        gen = [op.qubit_generator]
        fd = (energy(q, psi, gen, [h]) - energy(q, psi, gen, [-h])) / (2 * h)
        assert abs(g - fd) < 1e-7


def test_sampled_gradients_are_reproducible_and_close():
    _, q = fixture("h2")
    pool = build_fermionic_pool(2, 2)
    ref = QuantumState.from_occupations(reference_for(4, 2))
    a = pool_gradients(ref, q, pool, shots=4000, rng=7)
    np.testing.assert_array_equal(a, pool_gradients(ref, q, pool, shots=4000, rng=7))
    np.testing.assert_allclose(a, pool_gradients(ref, q, pool), atol=0.05)


def test_h2_converges_fast():
    _, q = fixture("h2")
    res = adapt_run(q, build_fermionic_pool(2, 2), reference_for(4, 2), AdaptConfig(eps_grad=1e-6))
    assert len(res.trace) <= 2
    assert abs(res.energy - exact_ground_energy(q, 2, 0)) < 1e-8


def test_empty_pool():
    _, q = fixture("h2")
    res = adapt_run(q, [], reference_for(4, 2))
    assert res.trace == [] and res.stop_reason == "empty pool"
    assert res.energy == expectation_exact(QuantumState.from_occupations(reference_for(4, 2)), q)


def test_benzene_fermionic_chemical_accuracy():
    ham, q = fixture("benzene")
    pool = filter_pool_by_symmetry(build_fermionic_pool(4, 4), ham.orbsym)
    res = adapt_run(q, pool, reference_for(8, 4), AdaptConfig(eps_grad=1e-5))
    err = [r.energy - exact_ground_energy(q, 4, 0) for r in res.trace]
    assert len(err) >= 6 and err[5] < 1.6e-3


def _check_trace(res, q):
    tr = res.trace
    assert [r.iteration for r in tr] == list(range(1, len(tr) + 1))
    for a, b in zip(tr, tr[1:]):
        assert b.energy <= a.energy + 1e-10
        assert b.cumulative_evals == a.cumulative_evals + b.n_evals
    for r in tr:
        assert r.max_gradient >= max(abs(g) for g in r.gradients) - 1e-15
        assert abs(r.gradients[r.selected]) == r.max_gradient
        assert np.all(np.isfinite(r.thetas))


def test_h4_fermionic_vs_qubit(h4):
    ham, q, e_fci = h4
    ref = reference_for(8, 4)
    cfg = AdaptConfig(eps_grad=1e-5, max_iter=40)
    fer = adapt_run(q, build_fermionic_pool(4, 4), ref, cfg)
    qub = adapt_run(q, build_qubit_pool(build_fermionic_pool(4, 4)), ref, cfg)
    _check_trace(fer, q)
    _check_trace(qub, q)
    assert abs(fer.energy - e_fci) < 1e-6
    assert abs(qub.energy - fer.energy) < 1e-6
    assert len(fer.trace) <= len(qub.trace)


def test_reselect_flag():
    _, q = fixture("h2")
    pool = build_fermionic_pool(2, 2)
    res = adapt_run(q, pool, reference_for(4, 2), AdaptConfig(eps_grad=0, eps_energy=0, max_iter=4, allow_reselect=False))
    assert len({r.selected for r in res.trace}) == len(res.trace)


def test_sampled_backend_deterministic(h4):
    _, q, _ = h4
    pool = build_qubit_pool(build_fermionic_pool(4, 4))
    cfg = AdaptConfig(backend="sampled", optimizer="mod_cobyla", max_iter=3, shots=200)
    a = adapt_run(q, pool, reference_for(8, 4), cfg, seed=5)
    b = adapt_run(q, pool, reference_for(8, 4), cfg, seed=5)
    assert a.trace_jsonl() == b.trace_jsonl()
    assert all(r.std_error > 0 for r in a.trace)
    assert all(r.effective_tol >= cfg.opt.tol for r in a.trace)


def test_noisy_backend_runs():
    _, q = fixture("h2")
    from adaptvqe.noise import NoiseModel

    cfg = AdaptConfig(backend="noisy", optimizer="cobyla", max_iter=1, shots=500, noise=NoiseModel(alpha=100))
    res = adapt_run(q, build_qubit_pool(build_fermionic_pool(2, 2)), reference_for(4, 2), cfg, seed=1)
    assert len(res.trace) == 1 and res.trace[0].depth > 0


def test_config_validation():
    with pytest.raises(ValueError):
        AdaptConfig(backend="sampled")
    with pytest.raises(ValueError):
        AdaptConfig(backend="quantum")
    with pytest.raises(ValueError):
        AdaptConfig(optimizer="adam")


def test_optimizer_failure_keeps_partial_trace(monkeypatch):
    import adaptvqe.adapt as ad

    _, q = fixture("h4")
    real = ad._optimize
    calls = []

    def flaky(*args):
        calls.append(1)
        if len(calls) == 3:
            raise FloatingPointError("objective returned nan")
        return real(*args)

    monkeypatch.setattr(ad, "_optimize", flaky)
    res = adapt_run(q, build_fermionic_pool(4, 4), reference_for(8, 4), AdaptConfig(eps_grad=0, eps_energy=0))
    assert res.stop_reason == "optimizer failure"
    assert "iteration 3" in res.error and "nan" in res.error
    assert len(res.trace) == 2 and len(res.ansatz.operators) == 2


def test_dimension_mismatch():
    _, q = fixture("h2")
    with pytest.raises(ValueError):
        adapt_run(q, build_fermionic_pool(4, 4), reference_for(4, 2))


def test_ansatz_json_round_trip():
    ham, q = fixture("benzene")
    pool = filter_pool_by_symmetry(build_fermionic_pool(4, 4), ham.orbsym)
    res = adapt_run(q, pool, reference_for(8, 4), AdaptConfig(max_iter=3))
    back = Ansatz.from_json(res.ansatz.to_json())
    np.testing.assert_allclose(back.state(), res.ansatz.state(), atol=1e-14)
    qres = adapt_run(q, build_qubit_pool(pool), reference_for(8, 4), AdaptConfig(max_iter=3))
    back = Ansatz.from_json(qres.ansatz.to_json())
    assert back.to_json() == qres.ansatz.to_json()
    steps = json.loads(back.to_json())["steps"]
    assert all("pauli" in s and "theta" in s for s in steps)
