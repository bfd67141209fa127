"""Density-matrix simulation with thermal relaxation after every instruction.

After each gate, every qubit the gate touches relaxes for the gate's
duration ``t``: populations decay toward ``|0>`` with
``gamma = 1 - exp(-t / T1)`` and coherences are multiplied by
``sqrt(1 - gamma) * exp(-t / T_phi)``, ``1/T_phi = 1/T2 - 1/(2 T1)``, so the
total coherence decay is ``exp(-t / T2)``.  Both coherence times scale with
``alpha``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuits import Circuit, Gate, RX, H, apply_matrix, gate_matrix
from .pauli import PauliString, QubitOperator, _parity
from .simulator import EnergyEstimate, _rng, sample_terms

MAX_QUBITS = 10

DEFAULT_TIMES_NS = {"U1": 0.0, "U2": 50.0, "U3": 100.0, "CX": 300.0, "Reset": 1000.0, "Measure": 1000.0}


@dataclass(frozen=True)
class NoiseModel:
    t1_us: float = 100.0
    t2_us: float = 150.0
    alpha: float = 1.0
    instruction_times_ns: dict = field(default_factory=lambda: dict(DEFAULT_TIMES_NS))
    t1_per_qubit: tuple | None = None
    t2_per_qubit: tuple | None = None

    def __post_init__(self):
        times = dict(DEFAULT_TIMES_NS)
        times.update(self.instruction_times_ns)
        object.__setattr__(self, "instruction_times_ns", times)
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if any(t < 0 for t in times.values()):
            raise ValueError("instruction times must be non-negative")
        for t1, t2 in self._pairs():
            if t1 <= 0 or t2 <= 0:
                raise ValueError("T1 and T2 must be positive")
            if t2 > 2 * t1 * (1 + 1e-12):
                raise ValueError(f"T2 = {t2} exceeds 2*T1 = {2 * t1}")

    def _pairs(self):
        yield self.t1_us, self.t2_us
        if self.t1_per_qubit is not None:
            yield from zip(self.t1_per_qubit, self.t2_per_qubit)

    def times_us(self, qubit: int) -> tuple[float, float]:
        if self.t1_per_qubit is not None:
            t1, t2 = self.t1_per_qubit[qubit], self.t2_per_qubit[qubit]
        else:
            t1, t2 = self.t1_us, self.t2_us
        return self.alpha * t1, self.alpha * t2

    def duration_ns(self, g: Gate) -> float:
        return self.instruction_times_ns[instruction_class(g)]

    def to_json(self) -> str:
        d = {"t1_us": self.t1_us, "t2_us": self.t2_us, "alpha": self.alpha,
             "instruction_times_ns": self.instruction_times_ns}
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NoiseModel":
        d = json.loads(text)
        return cls(
            t1_us=float(d.get("t1_us", 100.0)),
            t2_us=float(d.get("t2_us", 150.0)),
            alpha=float(d.get("alpha", 1.0)),
            instruction_times_ns=d.get("instruction_times_ns", {}),
        )


def instruction_class(g: Gate) -> str:
    """Map a gate to its timing class (virtual Z rotations take no time)."""
    if g.name in ("RZ", "S", "Sdg", "U1"):
        return "U1"
    if g.name in ("H", "U2"):
        return "U2"
    if g.name == "RX" and np.isclose(abs(np.remainder(g.angle + np.pi, 2 * np.pi) - np.pi), np.pi / 2):
        return "U2"
    if g.name == "CX":
        return "CX"
    return "U3"


class DensityState:
    """``rho`` stored as a ``(2,)*2n`` tensor: row axes first, then column axes."""

    def __init__(self, n_qubits: int, rho: np.ndarray | None = None):
        if n_qubits > MAX_QUBITS:
            raise ValueError(f"density simulation refused above {MAX_QUBITS} qubits ({n_qubits} requested)")
        self.n_qubits = n_qubits
        dim = 1 << n_qubits
        if rho is None:
            rho = np.zeros((dim, dim), dtype=complex)
            rho[0, 0] = 1.0
        self.tensor = np.asarray(rho, dtype=complex).reshape((2,) * (2 * n_qubits))

    @classmethod
    def from_statevector(cls, psi) -> "DensityState":
        psi = np.asarray(psi)
        n = int(np.log2(psi.size))
        return cls(n, np.outer(psi, psi.conj()))

    @property
    def matrix(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        return self.tensor.reshape(dim, dim)

    def copy(self) -> "DensityState":
        out = DensityState.__new__(DensityState)
        out.n_qubits = self.n_qubits
        out.tensor = self.tensor.copy()
        return out

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def apply_unitary(self, mat: np.ndarray, qubits: Sequence[int]):
        n = self.n_qubits
        t = apply_matrix(self.tensor, mat, qubits, n)
        self.tensor = apply_matrix(t, mat.conj(), qubits, n, offset=n)

    def relax(self, qubit: int, t_ns: float, model: NoiseModel):
        if t_ns <= 0:
            return
        t1, t2 = model.times_us(qubit)
        t_us = t_ns * 1e-3
        gamma = -np.expm1(-t_us / t1)
        inv_tphi = 1.0 / t2 - 0.5 / t1
        coh = np.sqrt(1.0 - gamma) * np.exp(-t_us * max(inv_tphi, 0.0))
        n = self.n_qubits
        r = n - 1 - qubit
        c = 2 * n - 1 - qubit
        rho = self.tensor
        idx = [slice(None)] * (2 * n)

        def sl(a, b):
            idx[r], idx[c] = a, b
            return tuple(idx)

        p11 = rho[sl(1, 1)].copy()
        rho[sl(0, 0)] += gamma * p11
        rho[sl(1, 1)] *= 1.0 - gamma
        rho[sl(0, 1)] *= coh
        rho[sl(1, 0)] *= coh


def apply_gate_noisy(state: DensityState, gate: Gate, model: NoiseModel) -> DensityState:
    if any(not 0 <= q < state.n_qubits for q in gate.qubits):
        raise ValueError(f"{gate} outside {state.n_qubits} qubits")
    state.apply_unitary(gate_matrix(gate), gate.qubits)
    t = model.duration_ns(gate)
    for q in gate.qubits:
        state.relax(q, t, model)
    return state


def run_circuit(circ: Circuit, model: NoiseModel, reset: bool = True) -> DensityState:
    state = DensityState(circ.n_qubits)
    if reset:
        for q in range(circ.n_qubits):
            state.relax(q, model.instruction_times_ns["Reset"], model)
    for g in circ.gates:
        apply_gate_noisy(state, g, model)
    return state


def _basis_key(p: PauliString) -> tuple[int, int]:
    # qubits needing H (X letter) and RX (Y letter)
    return p.x & ~p.z, p.x & p.z


def noisy_term_expectations(state: DensityState, op: QubitOperator, model: NoiseModel):
    """``(paulis, coeffs, <P_j>)`` read out after noisy basis changes and measurement relaxation."""
    n = state.n_qubits
    groups: dict[tuple[int, int], list] = {}
    for p, c in op.items():
        if not p.is_identity():
            groups.setdefault(_basis_key(p), []).append((p, c))
    idx = np.arange(1 << n)
    paulis, coeffs, means = [], [], []
    t_meas = model.instruction_times_ns["Measure"]
    for (hx, hy), terms in sorted(groups.items()):
        s = state.copy()
        for q in range(n):
            if hx >> q & 1:
                apply_gate_noisy(s, H(q), model)
            elif hy >> q & 1:
                apply_gate_noisy(s, RX(q, np.pi / 2), model)
        for q in range(n):
            s.relax(q, t_meas, model)
        probs = np.diag(s.matrix).real
        for p, c in terms:
            mask = p.x | p.z
            par = _parity(idx & mask)
            paulis.append(p)
            coeffs.append(c.real)
            means.append(float(np.dot(probs, 1 - 2 * par)))
    return paulis, np.array(coeffs), np.array(means)


def measure_energy_noisy(
    circ: Circuit,
    hamiltonian: QubitOperator,
    model: NoiseModel,
    shots: int | None = None,
    seed=None,
) -> EnergyEstimate:
    """Noisy energy of ``circ``; ``shots=None`` gives the exact-probability value."""
    if circ.n_qubits > MAX_QUBITS:
        raise ValueError(f"density simulation refused above {MAX_QUBITS} qubits")
    state = run_circuit(circ, model)
    _, coeffs, means = noisy_term_expectations(state, hamiltonian, model)
    const = hamiltonian.constant.real
    if shots is None:
        return EnergyEstimate(float(const + np.dot(coeffs, means)), 0.0, 0, len(means))
    value, err = sample_terms(means, coeffs, shots, _rng(seed))
    return EnergyEstimate(value + float(const), err, shots, len(means))
