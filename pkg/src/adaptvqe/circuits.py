"""Gate-level compilation of Pauli exponentials.

``staircase(P, theta)`` realizes ``exp(i theta P)`` as: basis changes (H for
X, RX(pi/2) for Y), a CNOT chain over the support ending on its highest
qubit, ``RZ(-2 theta)`` there, then the mirror image.  ``RZ(phi)`` is
``diag(exp(-i phi/2), exp(i phi/2))`` and ``RX(phi) = exp(-i phi X / 2)``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString

ONE_QUBIT = {"H", "S", "Sdg", "X", "RZ", "RX", "U1", "U2", "U3"}
N_PARAMS = {"H": 0, "S": 0, "Sdg": 0, "X": 0, "RZ": 1, "RX": 1, "U1": 1, "U2": 2, "U3": 3, "CX": 0}
DIAGONAL = {"RZ", "S", "Sdg", "U1"}


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.name not in N_PARAMS:
            raise ValueError(f"unknown gate {self.name!r}")
        if len(self.params) != N_PARAMS[self.name]:
            raise ValueError(f"{self.name} takes {N_PARAMS[self.name]} parameters")
        if not all(np.isfinite(self.params)):
            raise ValueError("gate angles must be finite")
        nq = 2 if self.name == "CX" else 1
        if len(self.qubits) != nq:
            raise ValueError(f"{self.name} acts on {nq} qubit(s)")
        if nq == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError("CX control and target must differ")

    @property
    def angle(self) -> float:
        return self.params[0]

    def matrix(self) -> np.ndarray:
        return gate_matrix(self)

    def __str__(self):
        args = f"({','.join(repr(float(p)) for p in self.params)})" if self.params else ""
        return f"{self.name}{args} " + " ".join(str(q) for q in self.qubits)


def H(q):
    return Gate("H", (q,))


def CX(c, t):
    return Gate("CX", (c, t))


def RZ(q, phi):
    return Gate("RZ", (q,), (float(phi),))


def RX(q, phi):
    return Gate("RX", (q,), (float(phi),))


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate):
        if any(not 0 <= q < self.n_qubits for q in g.qubits):
            raise ValueError(f"{g} touches a qubit outside 0..{self.n_qubits - 1}")

    def append(self, g: Gate):
        self._check(g)
        self.gates.append(g)

    def extend(self, gates: Iterable[Gate]):
        for g in gates:
            self.append(g)

    def __len__(self):
        return len(self.gates)

    def __eq__(self, other):
        return isinstance(other, Circuit) and self.n_qubits == other.n_qubits and self.gates == other.gates

    def cnot_count(self) -> int:
        return sum(g.name == "CX" for g in self.gates)

    def depth(self) -> int:
        level = [0] * self.n_qubits
        for g in self.gates:
            d = 1 + max(level[q] for q in g.qubits)
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)


@dataclass(frozen=True)
class DepthReport:
    depth: int
    cnot_count: int
    gate_count: int

    def to_dict(self):
        return {"depth": self.depth, "cnot_count": self.cnot_count, "gate_count": self.gate_count}


def depth_report(circ: Circuit) -> DepthReport:
    return DepthReport(circ.depth(), circ.cnot_count(), len(circ))


# ------------------------------------------------------------------ matrices

_SQ2 = np.sqrt(0.5)
_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.diag([1, 1j]),
    "Sdg": np.diag([1, -1j]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
}


def _u3(theta, phi, lam):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]]
    )


def gate_matrix(g: Gate) -> np.ndarray:
    """Unitary of ``g``; for CX the first qubit (control) is the high bit."""
    if g.name in _FIXED:
        return _FIXED[g.name]
    if g.name == "RZ":
        return np.diag(np.exp([-0.5j * g.angle, 0.5j * g.angle]))
    if g.name == "RX":
        c, s = np.cos(g.angle / 2), np.sin(g.angle / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if g.name == "U1":
        return np.diag([1, np.exp(1j * g.angle)])
    if g.name == "U2":
        return _u3(np.pi / 2, *g.params)
    if g.name == "U3":
        return _u3(*g.params)
    return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def apply_matrix(tensor: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n_qubits: int, offset: int = 0):
    """Apply ``mat`` to qubit axes of a ``(2,)*n`` tensor (axes start at ``offset``).

    Axis ``offset + n - 1 - q`` holds qubit ``q``.
    """
    k = len(qubits)
    axes = [offset + n_qubits - 1 - q for q in qubits]
    m = mat.reshape((2,) * (2 * k))
    out = np.tensordot(m, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def circuit_unitary(circ: Circuit) -> np.ndarray:
    n = circ.n_qubits
    dim = 1 << n
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in circ.gates:
        u = apply_matrix(u, gate_matrix(g), g.qubits, n)
    return u.reshape(dim, dim)


# ----------------------------------------------------------------- staircase


def _basis_change(p: PauliString) -> tuple[list[Gate], list[Gate]]:
    pre, post = [], []
    for q in p.support:
        letter = p.letter(q)
        if letter == "X":
            pre.append(H(q))
            post.append(H(q))
        elif letter == "Y":
            pre.append(RX(q, np.pi / 2))
            post.append(RX(q, -np.pi / 2))
    return pre, post


def _cx(c: int, t: int, reverse: bool) -> list[Gate]:
    if not reverse:
        return [CX(c, t)]
    # CX(c, t) = (H x H) CX(t, c) (H x H)
    return [H(c), H(t), CX(t, c), H(c), H(t)]


def staircase(p: PauliString, theta: float, orientation: str | Sequence[bool] = "standard") -> list[Gate]:
    """Gate list realizing ``exp(i theta P)``.

    ``orientation`` is ``"standard"``, ``"reverse"`` or one flag per CNOT of
    the chain (``True`` = reverse), applied to the chain and its mirror.
    """
    if p.is_identity():
        raise ValueError("identity string has no staircase (global phase only)")
    sup = p.support
    links = list(zip(sup[:-1], sup[1:]))
    if isinstance(orientation, str):
        if orientation not in ("standard", "reverse"):
            raise ValueError(f"unknown orientation {orientation!r}")
        flags = [orientation == "reverse"] * len(links)
    else:
        flags = [bool(f) for f in orientation]
        if len(flags) != len(links):
            raise ValueError(f"{len(links)} orientation flags needed")
    pre, post = _basis_change(p)
    chain = [g for (c, t), r in zip(links, flags) for g in _cx(c, t, r)]
    mirror = [g for (c, t), r in reversed(list(zip(links, flags))) for g in _cx(c, t, r)]
    return pre + chain + [RZ(sup[-1], -2.0 * theta)] + mirror + post


def staircase_compile(p: PauliString, theta: float, orientation="standard") -> Circuit:
    return Circuit(p.n_qubits, staircase(p, theta, orientation))


def layers_circuit(
    n_qubits: int,
    layers: Sequence[tuple[PauliString, float]],
    orientation: str | Sequence[bool] = "standard",
    reference: Sequence[int] | None = None,
) -> Circuit:
    """Concatenate staircases; ``orientation`` may be one flag per layer."""
    circ = Circuit(n_qubits)
    if reference is not None:
        circ.extend(Gate("X", (q,)) for q, b in enumerate(reference) if b)
    if isinstance(orientation, str):
        flags = [orientation == "reverse"] * len(layers)
    else:
        flags = list(orientation)
    for (p, th), r in zip(layers, flags):
        circ.extend(staircase(p, th, "reverse" if r else "standard"))
    return circ


# ------------------------------------------------------------------ peephole

_FOUR_PI = 4 * np.pi


def _commute(a: Gate, b: Gate) -> bool:
    """Sufficient (not necessary) commutation test independent of angles."""
    if not set(a.qubits) & set(b.qubits):
        return True
    if a.name == "CX" and b.name == "CX":
        (c1, t1), (c2, t2) = a.qubits, b.qubits
        return c1 != t2 and t1 != c2
    if a.name == "CX" or b.name == "CX":
        cx, one = (a, b) if a.name == "CX" else (b, a)
        q = one.qubits[0]
        if q == cx.qubits[0]:
            return one.name in DIAGONAL
        return one.name in ("RX", "X")
    if a.name in DIAGONAL and b.name in DIAGONAL:
        return True
    return a.name in ("RX", "X") and b.name in ("RX", "X")


_SELF_INVERSE = {"H", "X", "CX"}
_INVERSE_PAIRS = {("S", "Sdg"), ("Sdg", "S")}
_MERGEABLE = {"RZ", "RX", "U1"}


def _combine(a: Gate, b: Gate):
    """Return ``None`` if ``a``/``b`` do not combine, ``()`` if they cancel, else ``(merged,)``."""
    if a.qubits != b.qubits:
        return None
    if a.name == b.name and a.name in _SELF_INVERSE:
        return ()
    if (a.name, b.name) in _INVERSE_PAIRS:
        return ()
    if a.name == b.name and a.name in _MERGEABLE:
        phi = a.angle + b.angle
        period = 2 * np.pi if a.name == "U1" else _FOUR_PI
        r = np.remainder(phi, period)
        if min(r, period - r) < 1e-12:
            return ()
        return (Gate(a.name, a.qubits, (phi,)),)
    return None


def _drop_identities(gates: list[Gate]) -> list[Gate]:
    out = []
    for g in gates:
        if g.name in _MERGEABLE:
            period = 2 * np.pi if g.name == "U1" else _FOUR_PI
            r = np.remainder(g.angle, period)
            if min(r, period - r) < 1e-12:
                continue
        out.append(g)
    return out


def peephole(circ: Circuit) -> Circuit:
    """Cancel inverse pairs and merge rotations across commuting gates until none remain.

    Only removals and in-place merges are performed, so the DAG depth
    cannot grow and the unitary is unchanged.
    """
    gates = _drop_identities(list(circ.gates))
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(gates):
            a = gates[i]
            hit = False
            for j in range(i + 1, len(gates)):
                b = gates[j]
                if not set(a.qubits) & set(b.qubits):
                    continue
                res = _combine(a, b)
                if res is not None:
                    del gates[j]
                    gates[i : i + 1] = list(res)
                    hit = changed = True
                    break
                if not _commute(a, b):
                    break
            if not hit:
                i += 1
    return Circuit(circ.n_qubits, gates)


# --------------------------------------------------------------- orientation


@dataclass
class OrientationResult:
    circuit: Circuit
    flags: tuple[bool, ...]
    standard: Circuit
    reverse: Circuit
    explored: int


def _score(c: Circuit):
    return (c.depth(), c.cnot_count(), len(c))


def optimize_orientations(
    layers: Sequence[tuple[PauliString, float]],
    n_qubits: int | None = None,
    reference: Sequence[int] | None = None,
    exhaustive_limit: int = 12,
) -> OrientationResult:
    """Choose standard/reverse CNOT orientation per layer to minimize depth after peephole.

    Layers of weight 1 carry no CNOTs and are left standard.  With at most
    ``exhaustive_limit`` CNOT-bearing layers every assignment is tried;
    otherwise layers are fixed greedily left to right.  All-standard and
    all-reverse assignments are always candidates.
    """
    if not layers:
        raise ValueError("at least one layer required")
    n = n_qubits if n_qubits is not None else layers[0][0].n_qubits
    active = [k for k, (p, _) in enumerate(layers) if p.weight > 1]

    def build(flags):
        return peephole(layers_circuit(n, layers, flags, reference))

    std_flags = tuple([False] * len(layers))
    rev_flags = tuple(k in active for k in range(len(layers)))
    cands = {std_flags: build(std_flags), rev_flags: build(rev_flags)}
    if len(active) <= exhaustive_limit:
        for choice in itertools.product((False, True), repeat=len(active)):
            flags = [False] * len(layers)
            for k, r in zip(active, choice):
                flags[k] = r
            flags = tuple(flags)
            if flags not in cands:
                cands[flags] = build(flags)
    else:
        flags = [False] * len(layers)
        for k in active:
            best = None
            for r in (False, True):
                flags[k] = r
                # score the prefix ending at this layer
                c = peephole(layers_circuit(n, layers[: k + 1], flags[: k + 1], reference))
                if best is None or _score(c) < best[0]:
                    best = (_score(c), r)
            flags[k] = best[1]
        flags = tuple(flags)
        if flags not in cands:
            cands[flags] = build(flags)
    order = sorted(cands, key=lambda f: (_score(cands[f]), f))
    best = order[0]
    return OrientationResult(
        circuit=cands[best],
        flags=best,
        standard=cands[std_flags],
        reverse=cands[rev_flags],
        explored=len(cands),
    )


# ------------------------------------------------------------------ export

_TEXT_GATE = re.compile(r"^(\w+)(?:\(([^)]*)\))?\s+([\d\s]+)$")


def export_text(circ: Circuit) -> str:
    lines = [f"QUBITS {circ.n_qubits}"] + [str(g) for g in circ.gates]
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> Circuit:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("QUBITS"):
        raise ValueError("line 1: expected 'QUBITS n' header")
    circ = Circuit(int(lines[0].split()[1]))
    for k, ln in enumerate(lines[1:], start=2):
        m = _TEXT_GATE.match(ln)
        if not m:
            raise ValueError(f"line {k}: cannot parse gate {ln!r}")
        name, params, qubits = m.groups()
        p = tuple(float(v) for v in params.split(",")) if params else ()
        circ.append(Gate(name, tuple(int(q) for q in qubits.split()), p))
    return circ


_QASM_NAME = {"H": "h", "S": "s", "Sdg": "sdg", "X": "x", "RZ": "rz", "RX": "rx",
              "U1": "u1", "U2": "u2", "U3": "u3", "CX": "cx"}
_QASM_BACK = {v: k for k, v in _QASM_NAME.items()}


def export_qasm(circ: Circuit) -> str:
    out = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circ.n_qubits}];"]
    for g in circ.gates:
        if g.name not in _QASM_NAME:
            raise ValueError(f"gate {g.name} has no OpenQASM 2.0 form")
        args = f"({','.join(repr(float(p)) for p in g.params)})" if g.params else ""
        out.append(f"{_QASM_NAME[g.name]}{args} " + ",".join(f"q[{q}]" for q in g.qubits) + ";")
    return "\n".join(out) + "\n"


_QASM_LINE = re.compile(r"^(\w+)(?:\(([^)]*)\))?\s+(.+);$")


def parse_qasm(text: str) -> Circuit:
    circ = None
    for k, ln in enumerate(text.splitlines(), start=1):
        ln = ln.strip()
        if not ln or ln.startswith(("OPENQASM", "include", "//")):
            continue
        if ln.startswith("qreg"):
            circ = Circuit(int(re.search(r"\[(\d+)\]", ln).group(1)))
            continue
        m = _QASM_LINE.match(ln)
        if not m or circ is None or m.group(1) not in _QASM_BACK:
            raise ValueError(f"line {k}: unsupported statement {ln!r}")
        name, params, args = m.groups()
        p = tuple(float(v) for v in params.split(",")) if params else ()
        qs = tuple(int(q) for q in re.findall(r"q\[(\d+)\]", args))
        circ.append(Gate(_QASM_BACK[name], qs, p))
    if circ is None:
        raise ValueError("no qreg declaration")
    return circ


def export_circuit(circ: Circuit, fmt: str = "text") -> bytes:
    if fmt == "text":
        return export_text(circ).encode()
    if fmt in ("qasm", "openqasm2"):
        return export_qasm(circ).encode()
    raise ValueError(f"unknown export format {fmt!r}")
