"""Operator pools and the adaptive ansatz-growth loop.

Fermionic pools hold spin-singlet adapted single and double excitations
``T - T^`` from occupied to virtual spatial orbitals of a closed-shell
reference.  Qubit pools hold the distinct Pauli strings of their
Jordan-Wigner images, each used as the generator ``iP``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .circuits import layers_circuit
from .fermion import FermionOperator, hartree_fock_reference, jordan_wigner
from .noise import NoiseModel, measure_energy_noisy
from .optimize import OptimizerConfig, OptResult, cobyla_minimize, mod_cobyla
from .pauli import PauliString, QubitOperator, commutator
from .simulator import (
    QuantumState,
    _rng,
    _table,
    compiled,
    energy_and_gradient,
    expectation_sampled,
    generator_terms,
    prepare_state,
    sample_terms,
)


@dataclass
class PoolOperator:
    kind: str  # "fermionic" or "qubit"
    generator: FermionOperator | PauliString
    label: str
    orbitals: tuple[int, ...] = ()  # spatial orbitals acted on (with multiplicity)
    spin_adapted: bool = True
    irrep: int | None = None
    _qubit: QubitOperator | None = field(default=None, repr=False)

    @property
    def qubit_generator(self) -> QubitOperator:
        """Anti-Hermitian qubit image ``A`` (``iP`` for qubit-kind operators)."""
        if self._qubit is None:
            if self.kind == "qubit":
                self._qubit = QubitOperator({self.generator: 1j}, self.generator.n_qubits)
            else:
                self._qubit = jordan_wigner(self.generator)
        return self._qubit

    @property
    def n_qubits(self) -> int:
        return self.qubit_generator.n_qubits

    def to_dict(self) -> dict:
        if self.kind == "qubit":
            return {"kind": "qubit", "pauli": str(self.generator), "label": self.label}
        terms = [
            {"word": " ".join(f"{m}{'^' if d else ''}" for m, d in p), "re": c.real, "im": c.imag}
            for p, c in self.generator
        ]
        return {"kind": "fermionic", "label": self.label, "orbitals": list(self.orbitals), "terms": terms}

    @classmethod
    def from_dict(cls, d: dict, n_qubits: int) -> "PoolOperator":
        if d["kind"] == "qubit":
            return cls("qubit", PauliString.from_label(d["pauli"], n_qubits), d.get("label", d["pauli"]))
        terms = [(_parse_word(t["word"]), complex(t["re"], t["im"])) for t in d["terms"]]
        return cls("fermionic", FermionOperator(terms, n_qubits), d["label"], tuple(d.get("orbitals", ())))


def _parse_word(word: str):
    return [(int(t.rstrip("^")), t.endswith("^")) for t in word.split()]


def _anti_hermitian_normalized(t: FermionOperator) -> FermionOperator | None:
    a = (t - t.dagger()).normal_ordered()
    if not a:
        return None
    norm = np.sqrt(sum(abs(c) ** 2 for c in a.values()))
    return FermionOperator([(p, c / norm) for p, c in a.items()], t.n_modes)


def _word(n, *ops):
    return FermionOperator([(ops, 1.0)], n)


def singlet_sd_pool(n_spatial: int, n_electrons: int) -> list[PoolOperator]:
    """Spin-singlet adapted singles and doubles from a closed-shell reference."""
    if n_electrons % 2:
        raise ValueError("singlet pool requires an even electron count")
    n_occ = n_electrons // 2
    if n_occ > n_spatial:
        raise ValueError("more occupied orbitals than spatial orbitals")
    n = 2 * n_spatial
    occ, vir = range(n_occ), range(n_occ, n_spatial)
    pool = []
    for i in occ:
        for a in vir:
            t = (1 / np.sqrt(2)) * (
                _word(n, (2 * a, True), (2 * i, False)) + _word(n, (2 * a + 1, True), (2 * i + 1, False))
            )
            gen = _anti_hermitian_normalized(t)
            if gen is not None:
                pool.append(PoolOperator("fermionic", gen, f"S {i}->{a}", (i, a)))
    for i, j in itertools.combinations_with_replacement(occ, 2):
        for a, b in itertools.combinations_with_replacement(vir, 2):
            ia, ib, ja, jb = 2 * i, 2 * i + 1, 2 * j, 2 * j + 1
            aa, ab, ba, bb = 2 * a, 2 * a + 1, 2 * b, 2 * b + 1
            c2, c1 = 2 / np.sqrt(12), 1 / np.sqrt(12)
            # two singlet couplings of the (ij) -> (ab) double excitation
            t_a = (
                c2 * _word(n, (aa, True), (ba, True), (ja, False), (ia, False))
                + c2 * _word(n, (ab, True), (bb, True), (jb, False), (ib, False))
                + c1 * _word(n, (aa, True), (bb, True), (jb, False), (ia, False))
                + c1 * _word(n, (ab, True), (ba, True), (ja, False), (ib, False))
                + c1 * _word(n, (aa, True), (bb, True), (ja, False), (ib, False))
                + c1 * _word(n, (ab, True), (ba, True), (jb, False), (ia, False))
            )
            t_b = (
                0.5 * _word(n, (aa, True), (bb, True), (jb, False), (ia, False))
                + 0.5 * _word(n, (ab, True), (ba, True), (ja, False), (ib, False))
                - 0.5 * _word(n, (aa, True), (bb, True), (ja, False), (ib, False))
                - 0.5 * _word(n, (ab, True), (ba, True), (jb, False), (ia, False))
            )
            for tag, t in (("A", t_a), ("B", t_b)):
                gen = _anti_hermitian_normalized(t)
                if gen is not None:
                    pool.append(PoolOperator("fermionic", gen, f"D{tag} {i},{j}->{a},{b}", (i, j, a, b)))
    return pool


def uccsd_singlet_generator(n_spatial: int, n_electrons: int, amplitude: float = 1.0) -> FermionOperator:
    """Raw singlet UCCSD generator with every amplitude set to ``amplitude``.

    Terms are listed without merging; ``T`` and ``-T^`` of each excitation
    are separate entries.
    """
    n_occ = int(np.ceil(n_electrons / 2))
    n_vir = n_spatial - n_occ
    n = 2 * n_spatial
    terms = []
    spin = (lambda p: 2 * p, lambda p: 2 * p + 1)
    for p, q in itertools.product(range(n_vir), range(n_occ)):
        v, o = n_occ + p, q
        for s in range(2):
            this, other = spin[s], spin[1 - s]
            terms.append((((this(v), True), (this(o), False)), amplitude))
            terms.append((((this(o), True), (this(v), False)), -amplitude))
            terms.append(
                (((this(v), True), (this(o), False), (other(v), True), (other(o), False)), amplitude)
            )
            terms.append(
                (((other(o), True), (other(v), False), (this(o), True), (this(v), False)), -amplitude)
            )
    pairs = list(itertools.product(range(n_vir), range(n_occ)))
    for (p, q), (r, s) in itertools.combinations(pairs, 2):
        v1, o1, v2, o2 = n_occ + p, q, n_occ + r, s
        for sa, sb in itertools.product(range(2), repeat=2):
            va, oa, vb, ob = spin[sa](v1), spin[sa](o1), spin[sb](v2), spin[sb](o2)
            if va == vb or oa == ob:
                continue
            terms.append((((va, True), (oa, False), (vb, True), (ob, False)), amplitude))
            terms.append((((ob, True), (vb, False), (oa, True), (va, False)), -amplitude))
    return FermionOperator(terms, n)


def uccsd_pool(n_spatial: int, n_electrons: int) -> list[PoolOperator]:
    """One anti-Hermitian operator per ``(T, -T^)`` pair of the singlet UCCSD generator."""
    gen = uccsd_singlet_generator(n_spatial, n_electrons)
    raw = gen.terms
    pool = []
    for k in range(0, len(raw), 2):
        (w, c), (w2, c2) = raw[k], raw[k + 1]
        op = FermionOperator([(w, c), (w2, c2)], gen.n_modes)
        orbs = tuple(m // 2 for m, _ in w)
        label = "U " + " ".join(f"{m}{'^' if d else ''}" for m, d in w)
        pool.append(PoolOperator("fermionic", op, label, orbs, spin_adapted=False))
    return pool


def build_fermionic_pool(n_spatial: int, n_electrons: int, variant: str = "singlet_sd") -> list[PoolOperator]:
    if variant == "singlet_sd":
        return singlet_sd_pool(n_spatial, n_electrons)
    if variant == "uccsd":
        return uccsd_pool(n_spatial, n_electrons)
    raise ValueError(f"unknown pool variant {variant!r}")


def irrep_product(labels: Sequence[int]) -> int:
    """XOR product of 1-based Abelian irrep labels; 0 is totally symmetric."""
    out = 0
    for lab in labels:
        if not 1 <= int(lab) <= 8:
            raise ValueError(f"irrep label {lab} outside 1..8")
        out ^= int(lab) - 1
    return out


def filter_pool_by_symmetry(
    pool: Sequence[PoolOperator], orbsym: Sequence[int], target: int = 0, spin_adapted_only: bool = False
) -> list[PoolOperator]:
    """Keep operators whose orbital irrep product equals ``target`` (0 = totally symmetric)."""
    out = []
    for op in pool:
        labs = [orbsym[i] for i in op.orbitals]
        prod = irrep_product(labs)
        if prod != target:
            continue
        if spin_adapted_only and not op.spin_adapted:
            continue
        out.append(replace(op, irrep=prod))
    return out


def build_qubit_pool(pool: Sequence[PoolOperator], strip_z_chains: bool = False) -> list[PoolOperator]:
    strings = set()
    for op in pool:
        for p, _ in generator_terms(op.qubit_generator):
            if strip_z_chains:
                p = PauliString(p.n_qubits, p.x, p.z & p.x)
            strings.add(p)
    return [PoolOperator("qubit", p, str(p)) for p in sorted(strings, key=lambda s: s.sort_key())]


# -------------------------------------------------------------- gradients


def _commutator_op(hamiltonian: QubitOperator, op: PoolOperator) -> QubitOperator:
    key = ("comm", id(hamiltonian))
    cache = op.qubit_generator._cache
    if key not in cache:
        cache[key] = commutator(hamiltonian, op.qubit_generator).real()
    return cache[key]


def pool_gradients(state, hamiltonian: QubitOperator, pool: Sequence[PoolOperator], shots: int | None = None, rng=None):
    """``<psi|[H, A_k]|psi>`` for every pool member (sampled when ``shots`` is given)."""
    psi = state.amplitudes if isinstance(state, QuantumState) else np.asarray(state)
    if shots is None:
        h_psi = compiled(hamiltonian).apply(psi)
        return np.array(
            [2.0 * np.vdot(h_psi, compiled(op.qubit_generator).apply(psi)).real for op in pool]
        )
    rng = _rng(rng)
    out = []
    for op in pool:
        comm = _commutator_op(hamiltonian, op)
        if len(comm) == 0:
            out.append(0.0)
            continue
        table = _table(comm)
        value, _ = sample_terms(table.values(psi), table.coeffs.real, shots, rng)
        out.append(value)
    return np.array(out)


# ------------------------------------------------------------- ADAPT loop


@dataclass
class AdaptConfig:
    backend: str = "exact"  # exact | sampled | noisy
    optimizer: str = "bfgs"  # bfgs | cobyla | mod_cobyla
    eps_grad: float = 1e-3
    eps_energy: float = 1e-6
    max_iter: int = 30
    shots: int = 1000
    gradient_shots: int | None = None
    allow_reselect: bool = True
    opt: OptimizerConfig = field(default_factory=OptimizerConfig)
    noise: NoiseModel | None = None

    def __post_init__(self):
        if self.backend not in ("exact", "sampled", "noisy"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.optimizer not in ("bfgs", "cobyla", "mod_cobyla"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.optimizer == "bfgs" and self.backend != "exact":
            raise ValueError("bfgs needs exact gradients; use cobyla or mod_cobyla")

    def to_dict(self):
        d = {k: getattr(self, k) for k in
             ("backend", "optimizer", "eps_grad", "eps_energy", "max_iter", "shots", "gradient_shots", "allow_reselect")}
        d["opt"] = self.opt.__dict__.copy()
        d["noise"] = None if self.noise is None else json.loads(self.noise.to_json())
        return d


@dataclass
class Ansatz:
    reference: np.ndarray
    operators: list[PoolOperator] = field(default_factory=list)
    thetas: list[float] = field(default_factory=list)

    @property
    def n_qubits(self) -> int:
        return len(self.reference)

    def generators(self) -> list[QubitOperator]:
        return [op.qubit_generator for op in self.operators]

    def state(self, thetas=None) -> np.ndarray:
        thetas = self.thetas if thetas is None else thetas
        ref = QuantumState.from_occupations(self.reference)
        return prepare_state(ref, self.generators(), thetas)

    def layers(self, thetas=None) -> list[tuple[PauliString, float]]:
        """Pauli-exponential layers ``exp(i theta c_j P_j)`` in application order."""
        thetas = self.thetas if thetas is None else thetas
        return [(p, th * c) for g, th in zip(self.generators(), thetas) for p, c in generator_terms(g)]

    def circuit(self, thetas=None, orientation="standard"):
        return layers_circuit(self.n_qubits, self.layers(thetas), orientation, reference=self.reference)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_qubits": self.n_qubits,
                "reference": [int(b) for b in self.reference],
                "steps": [dict(op.to_dict(), theta=float(t)) for op, t in zip(self.operators, self.thetas)],
            },
            sort_keys=True,
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "Ansatz":
        d = json.loads(text)
        n = d["n_qubits"]
        ops = [PoolOperator.from_dict(s, n) for s in d["steps"]]
        return cls(np.array(d["reference"], dtype=np.int8), ops, [float(s["theta"]) for s in d["steps"]])


@dataclass
class IterationRecord:
    iteration: int
    selected: int
    label: str
    gradients: list[float]
    max_gradient: float
    energy: float
    std_error: float
    n_evals: int
    cumulative_evals: int
    depth: int
    cnot_count: int
    effective_tol: float
    converged: bool
    thetas: list[float]

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class AdaptResult:
    ansatz: Ansatz
    trace: list[IterationRecord]
    reference_energy: float
    stop_reason: str
    error: str | None = None

    @property
    def energy(self) -> float:
        return self.trace[-1].energy if self.trace else self.reference_energy

    def exact_energy(self, hamiltonian: QubitOperator) -> float:
        e, _ = energy_and_gradient(hamiltonian, QuantumState.from_occupations(self.ansatz.reference),
                                   self.ansatz.generators(), self.ansatz.thetas)
        return e

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in self.trace)


def _energy_function(hamiltonian, ansatz_ops, reference, cfg: AdaptConfig, rng):
    ref = QuantumState.from_occupations(reference)
    gens = [op.qubit_generator for op in ansatz_ops]
    if cfg.backend == "exact":
        return lambda th: (energy_and_gradient(hamiltonian, ref, gens, th)[0], 0.0)
    if cfg.backend == "sampled":
        def f(th):
            est = expectation_sampled(prepare_state(ref, gens, th), hamiltonian, cfg.shots, rng)
            return est.value, est.std_error
        return f
    model = cfg.noise or NoiseModel()
    tmp = Ansatz(np.asarray(reference), list(ansatz_ops))

    def g(th):
        est = measure_energy_noisy(tmp.circuit(th), hamiltonian, model, cfg.shots, rng)
        return est.value, est.std_error
    return g


def _optimize(hamiltonian, ansatz: Ansatz, thetas0, cfg: AdaptConfig, rng) -> OptResult:
    if cfg.optimizer == "bfgs":
        ref = QuantumState.from_occupations(ansatz.reference)
        gens = ansatz.generators()
        count = [0]

        def fg(th):
            count[0] += 1
            return energy_and_gradient(hamiltonian, ref, gens, th)

        res = minimize(fg, thetas0, jac=True, method="BFGS", options={"gtol": 1e-9, "maxiter": 10000})
        return OptResult(np.asarray(res.x), float(res.fun), count[0], 0.0, bool(res.success))
    f = _energy_function(hamiltonian, ansatz.operators, ansatz.reference, cfg, rng)
    if cfg.optimizer == "cobyla":
        return cobyla_minimize(f, thetas0, cfg.opt)
    return mod_cobyla(f, thetas0, cfg.opt)


def adapt_run(
    hamiltonian: QubitOperator,
    pool: Sequence[PoolOperator],
    reference: Sequence[int],
    config: AdaptConfig | None = None,
    seed=None,
    callback: Callable[[IterationRecord], None] | None = None,
) -> AdaptResult:
    """Grow an ansatz from ``reference`` by repeatedly adding the steepest pool operator.

    Stops when the largest gradient magnitude drops below ``eps_grad``, the
    energy gain falls below ``eps_energy``, or ``max_iter`` is reached.
    """
    cfg = config or AdaptConfig()
    rng = _rng(seed)
    reference = np.asarray(reference, dtype=np.int8)
    if len(reference) != hamiltonian.n_qubits:
        raise ValueError("reference and Hamiltonian qubit counts differ")
    for op in pool:
        if op.n_qubits != hamiltonian.n_qubits:
            raise ValueError(f"pool operator {op.label} acts on {op.n_qubits} qubits")
    ansatz = Ansatz(reference)
    ref_state = QuantumState.from_occupations(reference)
    e_ref = energy_and_gradient(hamiltonian, ref_state, [], [])[0]
    trace: list[IterationRecord] = []
    if not pool:
        return AdaptResult(ansatz, trace, e_ref, "empty pool")
    grad_shots = cfg.gradient_shots or cfg.shots
    e_prev = e_ref
    cumulative = 0
    stop = "iteration cap"
    used: set[int] = set()
    for it in range(1, cfg.max_iter + 1):
        psi = ansatz.state()
        grads = pool_gradients(psi, hamiltonian, pool, None if cfg.backend == "exact" else grad_shots, rng)
        mags = np.abs(grads)
        if not cfg.allow_reselect and used:
            mags[list(used)] = -1.0
        k = int(np.argmax(mags))
        if mags[k] < cfg.eps_grad:
            stop = "gradient threshold"
            break
        ansatz.operators.append(pool[k])
        used.add(k)
        try:
            res = _optimize(hamiltonian, ansatz, np.array(ansatz.thetas + [0.0]), cfg, rng)
        except Exception as exc:  # keep the partial trace
            ansatz.operators.pop()
            return AdaptResult(ansatz, trace, e_ref, "optimizer failure", f"iteration {it}: {exc}")
        ansatz.thetas = [float(t) for t in res.x]
        cumulative += res.n_evals
        circ = ansatz.circuit()
        rec = IterationRecord(
            iteration=it,
            selected=k,
            label=pool[k].label,
            gradients=[float(g) for g in grads],
            max_gradient=float(mags[k]),
            energy=res.fun,
            std_error=res.std_error,
            n_evals=res.n_evals,
            cumulative_evals=cumulative,
            depth=circ.depth(),
            cnot_count=circ.cnot_count(),
            effective_tol=res.effective_tol,
            converged=res.converged,
            thetas=list(ansatz.thetas),
        )
        trace.append(rec)
        if callback:
            callback(rec)
        if abs(e_prev - res.fun) < cfg.eps_energy:
            stop = "energy threshold"
            break
        e_prev = res.fun
    return AdaptResult(ansatz, trace, e_ref, stop)


def reference_for(n_qubits: int, n_electrons: int) -> np.ndarray:
    return hartree_fock_reference(n_qubits, n_electrons)
