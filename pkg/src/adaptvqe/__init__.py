"""Adaptive variational eigensolver toolkit: Hamiltonians, pools, simulators, circuits."""

from .pauli import PauliString, QubitOperator, commutator, to_matrix
from .fermion import FermionOperator, jordan_wigner, hartree_fock_reference
from .hamiltonian import (
    ActiveSpace,
    MolecularIntegrals,
    build_effective_hamiltonian,
    compress,
    exact_ground_energy,
    load_fixture,
    parse_fcidump,
    qubit_hamiltonian,
    term_count,
    write_fcidump,
)
from .simulator import QuantumState, EnergyEstimate, expectation_exact, expectation_sampled
from .adapt import (
    AdaptConfig,
    Ansatz,
    adapt_run,
    build_fermionic_pool,
    build_qubit_pool,
    filter_pool_by_symmetry,
    pool_gradients,
)
from .optimize import OptimizerConfig, cobyla_minimize, mod_cobyla, prescan_last_parameter
from .noise import NoiseModel, measure_energy_noisy
from .circuits import Circuit, Gate, depth_report, optimize_orientations, staircase_compile
from .planner import CalibrationSnapshot, job_split, layout_quality, select_layout

__version__ = "0.1.0"
