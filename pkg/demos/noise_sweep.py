"""Energy error of benzene qubit-ADAPT prefixes versus the coherence scale alpha."""

import numpy as np

from adaptvqe.adapt import AdaptConfig, adapt_run, build_fermionic_pool, build_qubit_pool, filter_pool_by_symmetry, reference_for
from adaptvqe.cli import noise_sweep
from adaptvqe.hamiltonian import build_effective_hamiltonian, load_fixture, qubit_hamiltonian

ham = build_effective_hamiltonian(*load_fixture("benzene"))
q, _ = qubit_hamiltonian(ham, 1e-2)
pool = build_qubit_pool(filter_pool_by_symmetry(build_fermionic_pool(4, 4), ham.orbsym))
ans = adapt_run(q, pool, reference_for(8, 4), AdaptConfig(max_iter=8, eps_grad=1e-8, eps_energy=0.0)).ansatz
alphas = np.geomspace(1, 1e4, 8)
sizes = [1, 3, 5, 8]
rows, cross = noise_sweep(ans, q, alphas, sizes)
print("alpha     " + "".join(f"{s:>10d} ops" for s in sizes))
for k, a in enumerate(alphas):
    print(f"{a:9.1f} " + "".join(f"{1e3 * rows[i * len(alphas) + k][2]:11.3f}mHa" for i in range(len(sizes))))
print("alpha* (1 mHa): " + ", ".join(f"{s} ops -> {cross[s]:.1f}" for s in sizes))
