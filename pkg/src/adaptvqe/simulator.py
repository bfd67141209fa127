"""Statevector simulation of Pauli-exponential ansatze.

A generator ``A`` is an anti-Hermitian qubit operator ``A = i sum_j c_j P_j``
with real ``c_j``.  Its exponential ``exp(theta A)`` is realized as one
first-order product ``prod_j exp(i theta c_j P_j)`` over the terms in
canonical order.  Ansatz layers act in the order they were added, so the
newest generator is applied last.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pauli import DimensionError, PauliString, QubitOperator, _parity


class QuantumState:
    """Normalized ``2**n`` amplitude vector; qubit 0 is the least significant bit."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, amplitudes, n_qubits: int | None = None):
        amps = np.asarray(amplitudes, dtype=complex)
        n = int(np.log2(amps.size)) if n_qubits is None else n_qubits
        if amps.shape != (1 << n,):
            raise DimensionError(f"{amps.shape} amplitudes do not describe {n} qubits")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-10:
            raise ValueError(f"state norm {np.linalg.norm(amps):.12g} is not 1")
        self.n_qubits = n
        self.amplitudes = amps

    @classmethod
    def basis(cls, n_qubits: int, index: int = 0) -> "QuantumState":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps, n_qubits)

    @classmethod
    def from_occupations(cls, occ: Sequence[int]) -> "QuantumState":
        return cls.basis(len(occ), int(sum(int(b) << i for i, b in enumerate(occ))))

    def copy(self) -> "QuantumState":
        return QuantumState(self.amplitudes.copy(), self.n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)


def _amps(state, n_qubits=None) -> np.ndarray:
    psi = state.amplitudes if isinstance(state, QuantumState) else np.asarray(state)
    if n_qubits is not None and psi.shape != (1 << n_qubits,):
        raise DimensionError(f"state of length {psi.shape[0]} vs {n_qubits}-qubit operator")
    return psi


def _index(n: int) -> np.ndarray:
    return np.arange(1 << n)


def pauli_apply(psi: np.ndarray, p: PauliString) -> np.ndarray:
    # P|b> = i^ny (-1)^{|b & z|} |b ^ x>
    idx = _index(p.n_qubits)
    phased = (1j) ** p.n_y * (1 - 2 * _parity(idx & p.z)) * psi
    return phased[idx ^ p.x]


def apply_pauli_exponential(state, p: PauliString, theta: float):
    """``exp(i theta P)`` applied as ``cos(theta) psi + i sin(theta) P psi``."""
    psi = _amps(state, p.n_qubits)
    out = np.cos(theta) * psi + 1j * np.sin(theta) * pauli_apply(psi, p)
    return QuantumState(out, p.n_qubits) if isinstance(state, QuantumState) else out


# ------------------------------------------------------------ compiled forms


class CompiledOperator:
    """Qubit operator regrouped by X mask for fast products and expectations.

    For each distinct X mask ``x`` the diagonal ``d_x[b] = sum_j c_j i^ny_j
    (-1)^{|b & z_j|}`` is stored, so ``(O psi)[b ^ x] += d_x[b] psi[b]``.
    """

    def __init__(self, op: QubitOperator):
        n = op.n_qubits
        idx = _index(n)
        self.n_qubits = n
        self.op = op
        groups: dict[int, list] = {}
        for p, c in op.items():
            groups.setdefault(p.x, []).append((p, c))
        self.xs = np.array(sorted(groups), dtype=np.int64)
        self.diag = np.zeros((len(self.xs), 1 << n), dtype=complex)
        self.term_x = []
        self.term_signs = []
        self.term_phase = []
        self.term_coeff = []
        for k, x in enumerate(self.xs):
            terms = groups[int(x)]
            signs = np.array([1 - 2 * _parity(idx & p.z) for p, _ in terms], dtype=float)
            phase = np.array([(1j) ** p.n_y for p, _ in terms])
            coeff = np.array([c for _, c in terms])
            self.diag[k] = (coeff * phase) @ signs
            self.term_x.append(int(x))
            self.term_signs.append(signs)
            self.term_phase.append(phase)
            self.term_coeff.append(coeff)
        self._idx = idx

    def apply(self, psi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(psi, dtype=complex)
        for x, d in zip(self.xs, self.diag):
            out[self._idx ^ x] += d * psi
        return out

    def expectation(self, psi: np.ndarray) -> complex:
        total = 0j
        for x, d in zip(self.xs, self.diag):
            total += np.vdot(psi[self._idx ^ x], d * psi)
        return total

    def term_expectations(self) -> "TermTable":
        return TermTable(self)


class TermTable:
    """Per-term expectations ``<P_j>`` in a fixed order (X-mask groups)."""

    def __init__(self, comp: CompiledOperator):
        self.comp = comp
        self.paulis = []
        self.coeffs = []
        groups: dict[int, list] = {}
        for p, c in comp.op.items():
            groups.setdefault(p.x, []).append((p, c))
        for x in comp.term_x:
            for p, c in groups[x]:
                self.paulis.append(p)
                self.coeffs.append(c)
        self.coeffs = np.array(self.coeffs)

    def values(self, psi: np.ndarray) -> np.ndarray:
        comp = self.comp
        out = []
        for x, signs, phase in zip(comp.term_x, comp.term_signs, comp.term_phase):
            w = np.conj(psi[comp._idx ^ x]) * psi
            out.append((phase * (signs @ w)).real)
        return np.concatenate(out) if out else np.zeros(0)


def compiled(op: QubitOperator) -> CompiledOperator:
    comp = op._cache.get("compiled")
    if comp is None:
        comp = op._cache["compiled"] = CompiledOperator(op)
    return comp


def apply_operator(op: QubitOperator, state) -> np.ndarray:
    return compiled(op).apply(_amps(state, op.n_qubits))


def _require_hermitian(op: QubitOperator):
    if not op.is_hermitian(1e-10):
        raise ValueError("expectation requires a Hermitian operator")


def expectation_exact(state, op: QubitOperator) -> float:
    """``<psi|O|psi>`` for Hermitian ``O``."""
    _require_hermitian(op)
    val = compiled(op).expectation(_amps(state, op.n_qubits))
    if abs(val.imag) > 1e-10:
        raise ArithmeticError(f"imaginary expectation residue {val.imag:.3e}")
    return float(val.real)


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    std_error: float
    shots_per_term: int
    n_terms_measured: int


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_terms(means: np.ndarray, coeffs: np.ndarray, shots: int, rng) -> tuple[float, float]:
    """Shot-sample terms with exact means ``<P_j>``; returns ``(value, std_error)``."""
    if shots < 2:
        raise ValueError("shots_per_term must be at least 2")
    p = np.clip((1.0 + means) / 2.0, 0.0, 1.0)
    k = rng.binomial(shots, p)
    m = 2.0 * k / shots - 1.0
    # unbiased variance of +-1 outcomes with sample mean m
    var = shots / (shots - 1) * (1.0 - m * m)
    value = float(np.dot(coeffs, m))
    err = float(np.sqrt(np.dot(coeffs**2, var) / shots))
    return value, err


def expectation_sampled(state, op: QubitOperator, shots_per_term: int, rng_seed=None) -> EnergyEstimate:
    """Per-term binomial sampling of a Hermitian operator.

    The identity term is added exactly.  ``rng_seed`` may be an int or a
    ``numpy.random.Generator`` (consumed in place).
    """
    _require_hermitian(op)
    if shots_per_term < 2:
        raise ValueError("shots_per_term must be at least 2")
    psi = _amps(state, op.n_qubits)
    const = op.constant.real
    rest = op - QubitOperator.scalar(const, op.n_qubits) if const else op
    if len(rest) == 0:
        return EnergyEstimate(float(const), 0.0, shots_per_term, 0)
    table = _table(rest)
    means = table.values(psi)
    value, err = sample_terms(means, table.coeffs.real, shots_per_term, _rng(rng_seed))
    return EnergyEstimate(value + float(const), err, shots_per_term, len(means))


def _table(op: QubitOperator) -> TermTable:
    t = op._cache.get("table")
    if t is None:
        t = op._cache["table"] = compiled(op).term_expectations()
    return t


# ----------------------------------------------------------------- ansatz


def generator_terms(gen: QubitOperator) -> list[tuple[PauliString, float]]:
    """``[(P_j, c_j)]`` with ``gen = i sum_j c_j P_j``; requires anti-Hermitian ``gen``."""
    if not gen.is_anti_hermitian(1e-12):
        raise ValueError("generator must be anti-Hermitian")
    return [(p, float((c / 1j).real)) for p, c in gen.items() if not p.is_identity()]


class _Layer:
    """Precomputed elementary exponentials of one generator."""

    __slots__ = ("perm", "phased", "coeff")

    def __init__(self, gen: QubitOperator):
        idx = _index(gen.n_qubits)
        terms = generator_terms(gen)
        self.perm = [idx ^ p.x for p, _ in terms]
        self.phased = [(1j) ** p.n_y * (1 - 2 * _parity(idx & p.z)) for p, _ in terms]
        self.coeff = [c for _, c in terms]


def _layers(gens: Sequence[QubitOperator]) -> list[_Layer]:
    out = []
    for g in gens:
        lay = g._cache.get("layer")
        if lay is None:
            lay = g._cache["layer"] = _Layer(g)
        out.append(lay)
    return out


def prepare_state(reference, generators: Sequence[QubitOperator], thetas: Sequence[float]) -> np.ndarray:
    """``prod_k exp(theta_k A_k) |ref>``, oldest generator applied first."""
    if len(generators) != len(thetas):
        raise ValueError("one parameter per generator required")
    psi = np.array(_amps(reference), dtype=complex)
    for lay, th in zip(_layers(generators), thetas):
        for perm, ph, c in zip(lay.perm, lay.phased, lay.coeff):
            a = th * c
            psi = np.cos(a) * psi + 1j * np.sin(a) * (ph * psi)[perm]
    return psi


def energy(hamiltonian: QubitOperator, reference, generators, thetas) -> float:
    return expectation_exact(prepare_state(reference, generators, thetas), hamiltonian)


def energy_and_gradient(hamiltonian: QubitOperator, reference, generators, thetas):
    """Exact energy and its full parameter gradient (adjoint sweep)."""
    comp = compiled(hamiltonian)
    psi = prepare_state(reference, generators, thetas)
    lam = comp.apply(psi)
    e = float(np.vdot(psi, lam).real)
    grad = np.zeros(len(thetas))
    layers = _layers(generators)
    for k in range(len(layers) - 1, -1, -1):
        lay, th = layers[k], thetas[k]
        for perm, ph, c in zip(lay.perm[::-1], lay.phased[::-1], lay.coeff[::-1]):
            # d/dtheta of exp(i a P) acting last is i c P
            p_psi = (ph * psi)[perm]
            grad[k] += 2.0 * c * np.vdot(lam, 1j * p_psi).real
            a = th * c
            # undo: exp(-i a P)
            psi = np.cos(a) * psi - 1j * np.sin(a) * p_psi
            lam = np.cos(a) * lam - 1j * np.sin(a) * (ph * lam)[perm]
    return e, grad
