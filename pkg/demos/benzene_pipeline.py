"""Benzene 4-in-4: integrals -> compressed qubit Hamiltonian -> ADAPT-VQE -> circuit depth."""

from adaptvqe.adapt import AdaptConfig, adapt_run, build_fermionic_pool, build_qubit_pool, filter_pool_by_symmetry, reference_for
from adaptvqe.circuits import optimize_orientations
from adaptvqe.hamiltonian import build_effective_hamiltonian, exact_ground_energy, load_fixture, qubit_hamiltonian

ints, space = load_fixture("benzene")
ham = build_effective_hamiltonian(ints, space)
full, _ = qubit_hamiltonian(ham)
q, report = qubit_hamiltonian(ham, 1e-2)
e_full, e_comp = exact_ground_energy(full, 4, 0), exact_ground_energy(q, 4, 0)
print(f"fermionic terms {len(ham.fermion)} -> {report.kept}, qubit terms {len(full)} -> {len(q)}")
print(f"exact energies: full {e_full:.8f}, compressed {e_comp:.8f}, shift {1e3 * (e_comp - e_full):.3f} mHa")

pool = filter_pool_by_symmetry(build_fermionic_pool(4, 4), ham.orbsym)
print(f"symmetry-allowed operators: {[op.label for op in pool]}")
for kind, p in (("fermionic", pool), ("qubit", build_qubit_pool(pool))):
    res = adapt_run(q, p, reference_for(8, 4), AdaptConfig(eps_grad=1e-5))
    print(f"\n{kind} ADAPT ({res.stop_reason})")
    for r in res.trace:
        print(f"  it {r.iteration:2d}  {r.label:<22s} |g|={r.max_gradient:.2e}  "
              f"err={1e3 * (r.energy - e_comp):8.4f} mHa  cnots={r.cnot_count}")
    opt = optimize_orientations(res.ansatz.layers(), 8, res.ansatz.reference)
    print(f"  depth standard {opt.standard.depth()}, reverse {opt.reverse.depth()}, optimized {opt.circuit.depth()}"
          f" (CNOTs {opt.standard.cnot_count()} / {opt.reverse.cnot_count()} / {opt.circuit.cnot_count()})")
