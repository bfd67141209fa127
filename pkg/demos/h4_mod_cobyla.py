"""Shot-noisy qubit-ADAPT on linear H4: standard COBYLA versus Mod-COBYLA."""

import sys

import numpy as np

from adaptvqe.adapt import AdaptConfig, adapt_run, build_fermionic_pool, build_qubit_pool, reference_for
from adaptvqe.hamiltonian import build_effective_hamiltonian, exact_ground_energy, load_fixture, qubit_hamiltonian

replicates = int(sys.argv[1]) if len(sys.argv) > 1 else 5
q, _ = qubit_hamiltonian(build_effective_hamiltonian(*load_fixture("h4")))
e_exact = exact_ground_energy(q, 4, 0)
pool = build_qubit_pool(build_fermionic_pool(4, 4))
for opt in ("cobyla", "mod_cobyla"):
    evals, errs = [], []
    for r in range(replicates):
        cfg = AdaptConfig(backend="sampled", optimizer=opt, shots=1000, max_iter=30, eps_grad=0.0, eps_energy=0.0)
        res = adapt_run(q, pool, reference_for(8, 4), cfg, seed=1000 + r)
        evals.append(res.trace[-1].cumulative_evals)
        errs.append(res.exact_energy(q) - e_exact)
    print(f"{opt:<11s} evaluations {np.mean(evals):7.1f} +- {np.std(evals, ddof=1):5.1f}   "
          f"final exact error {1e3 * np.mean(errs):6.2f} +- {1e3 * np.std(errs, ddof=1):5.2f} mHa")
