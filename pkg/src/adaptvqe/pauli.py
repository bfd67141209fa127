"""Pauli strings and weighted sums of them (qubit operators).

Strings are stored symplectically as two integer bit masks: bit ``q`` of
``x`` is set when qubit ``q`` carries X or Y, bit ``q`` of ``z`` when it
carries Z or Y.  Qubit 0 is the least significant bit everywhere in the
package, including statevector indices.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Iterator, Mapping

import numpy as np

PRUNE_TOL = 1e-14
MATRIX_QUBIT_LIMIT = 12

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
# lexicographic rank used for canonical ordering: I < X < Y < Z
_RANK = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}
_PHASES = (1, 1j, -1, -1j)

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


class PauliString:
    """Tensor product of single-qubit Paulis on ``n_qubits`` qubits.

    Immutable and hashable.  Build from text with :meth:`from_label`
    (``"X0 Z2"``) or :meth:`from_letters` (``"XIZ"``, qubit 0 first).
    """

    __slots__ = ("n_qubits", "x", "z", "_key")

    def __init__(self, n_qubits: int, x: int = 0, z: int = 0):
        if n_qubits < 0:
            raise ValueError("n_qubits must be non-negative")
        full = (1 << n_qubits) - 1
        if x & ~full or z & ~full:
            raise ValueError(f"bit masks exceed {n_qubits} qubits")
        object.__setattr__(self, "n_qubits", int(n_qubits))
        object.__setattr__(self, "x", int(x))
        object.__setattr__(self, "z", int(z))
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("PauliString is immutable")

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def from_letters(cls, letters: str) -> "PauliString":
        x = z = 0
        for q, ch in enumerate(letters):
            try:
                bx, bz = _LETTER_BITS[ch]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {ch!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(len(letters), x, z)

    @classmethod
    def from_label(cls, label: str, n_qubits: int) -> "PauliString":
        """Parse the sparse rendering, e.g. ``"X0 Z2 Y3"`` or ``"I"``."""
        x = z = 0
        label = label.strip()
        if label in ("", "I"):
            return cls(n_qubits)
        for tok in label.split():
            ch, idx = tok[0], tok[1:]
            if ch not in "XYZ" or not idx.isdigit():
                raise ValueError(f"bad Pauli token {tok!r}")
            q = int(idx)
            if q >= n_qubits:
                raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
            if (x | z) >> q & 1:
                raise ValueError(f"qubit {q} appears twice in {label!r}")
            bx, bz = _LETTER_BITS[ch]
            x |= bx << q
            z |= bz << q
        return cls(n_qubits, x, z)

    def letter(self, q: int) -> str:
        bits = ((self.x >> q) & 1, (self.z >> q) & 1)
        return "IXYZ"[_RANK[bits]]

    @property
    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    @property
    def support(self) -> list[int]:
        m = self.x | self.z
        return [q for q in range(self.n_qubits) if m >> q & 1]

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def n_y(self) -> int:
        return _popcount(self.x & self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def sort_key(self) -> tuple:
        if self._key is None:
            key = tuple(
                _RANK[((self.x >> q) & 1, (self.z >> q) & 1)] for q in range(self.n_qubits)
            )
            object.__setattr__(self, "_key", key)
        return self._key

    def commutes_with(self, other: "PauliString") -> bool:
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def __mul__(self, other):
        if isinstance(other, PauliString):
            phase, prod = multiply(self, other)
            return QubitOperator({prod: phase}, self.n_qubits)
        return NotImplemented

    def __eq__(self, other):
        return (
            isinstance(other, PauliString)
            and self.n_qubits == other.n_qubits
            and self.x == other.x
            and self.z == other.z
        )

    def __lt__(self, other: "PauliString") -> bool:
        return self.sort_key() < other.sort_key()

    def __hash__(self):
        return hash((self.n_qubits, self.x, self.z))

    def __str__(self):
        if self.is_identity():
            return "I"
        return " ".join(f"{self.letter(q)}{q}" for q in self.support)

    def __repr__(self):
        return f"PauliString({str(self)!r}, n_qubits={self.n_qubits})"

    def to_matrix(self) -> np.ndarray:
        # kron with qubit n-1 leftmost so qubit 0 is the least significant bit
        mats = [_MATS[self.letter(q)] for q in reversed(range(self.n_qubits))]
        if not mats:
            return np.ones((1, 1), dtype=complex)
        return reduce(np.kron, mats)


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, product)`` with ``a @ b == phase * product``."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"{a.n_qubits} vs {b.n_qubits} qubits")
    x3, z3 = a.x ^ b.x, a.z ^ b.z
    # P = i^{|x&z|} X^x Z^z ; moving Z^{z1} past X^{x2} costs (-1)^{|z1&x2|}
    k = _popcount(a.x & a.z) + _popcount(b.x & b.z) - _popcount(x3 & z3)
    k += 2 * _popcount(a.z & b.x)
    return _PHASES[k % 4], PauliString(a.n_qubits, x3, z3)


class QubitOperator:
    """Complex-weighted sum of Pauli strings with combined like terms.

    Terms are kept in canonical (lexicographic letter) order.  Coefficients
    whose magnitude falls at or below ``PRUNE_TOL`` after construction are
    dropped.
    """

    __slots__ = ("n_qubits", "_terms", "_cache")

    def __init__(
        self,
        terms: Mapping[PauliString, complex] | Iterable[tuple[PauliString, complex]] = (),
        n_qubits: int | None = None,
        prune: float = PRUNE_TOL,
    ):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[PauliString, complex] = {}
        for p, c in items:
            if n_qubits is None:
                n_qubits = p.n_qubits
            elif p.n_qubits != n_qubits:
                raise DimensionError(f"term on {p.n_qubits} qubits in {n_qubits}-qubit operator")
            acc[p] = acc.get(p, 0) + complex(c)
        if n_qubits is None:
            raise ValueError("n_qubits required for an empty operator")
        kept = sorted(
            ((p, c) for p, c in acc.items() if abs(c) > prune), key=lambda t: t[0].sort_key()
        )
        self.n_qubits = int(n_qubits)
        self._terms = dict(kept)
        self._cache = {}

    @classmethod
    def from_dict(cls, labels: Mapping[str, complex], n_qubits: int) -> "QubitOperator":
        return cls({PauliString.from_label(k, n_qubits): v for k, v in labels.items()}, n_qubits)

    @classmethod
    def scalar(cls, value: complex, n_qubits: int) -> "QubitOperator":
        return cls({PauliString(n_qubits): value}, n_qubits)

    @property
    def terms(self) -> dict[PauliString, complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __iter__(self) -> Iterator[PauliString]:
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    def __contains__(self, p):
        return p in self._terms

    def coefficient(self, p: PauliString | str) -> complex:
        if isinstance(p, str):
            p = PauliString.from_label(p, self.n_qubits)
        return self._terms.get(p, 0j)

    @property
    def constant(self) -> complex:
        return self._terms.get(PauliString(self.n_qubits), 0j)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def is_anti_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.real) <= tol for c in self._terms.values())

    def real(self) -> "QubitOperator":
        return QubitOperator({p: c.real for p, c in self._terms.items()}, self.n_qubits)

    def _check(self, other: "QubitOperator"):
        if self.n_qubits != other.n_qubits:
            raise DimensionError(f"{self.n_qubits} vs {other.n_qubits} qubits")

    def __add__(self, other):
        if isinstance(other, QubitOperator):
            self._check(other)
            return QubitOperator(list(self.items()) + list(other.items()), self.n_qubits)
        if np.isscalar(other):
            return self + QubitOperator.scalar(other, self.n_qubits)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QubitOperator):
            self._check(other)
            out = []
            for pa, ca in self._terms.items():
                for pb, cb in other._terms.items():
                    ph, prod = multiply(pa, pb)
                    out.append((prod, ph * ca * cb))
            return QubitOperator(out, self.n_qubits)
        if isinstance(other, PauliString):
            return self * QubitOperator({other: 1.0}, other.n_qubits)
        if np.isscalar(other):
            return QubitOperator({p: c * other for p, c in self._terms.items()}, self.n_qubits)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self * (1.0 / other)

    def __eq__(self, other):
        if not isinstance(other, QubitOperator):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def allclose(self, other: "QubitOperator", atol: float = 1e-12) -> bool:
        self._check(other)
        diff = self - other
        return all(abs(c) <= atol for c in diff._terms.values())

    def __repr__(self):
        body = " + ".join(f"({c:.6g}) {p}" for p, c in list(self._terms.items())[:6])
        more = "" if len(self) <= 6 else f" + ... ({len(self)} terms)"
        return f"QubitOperator({body or '0'}{more}, n_qubits={self.n_qubits})"

    def to_json(self) -> list[dict]:
        return [
            {"pauli": str(p), "re": c.real, "im": c.imag} for p, c in self._terms.items()
        ]

    @classmethod
    def from_json(cls, data: list[dict], n_qubits: int) -> "QubitOperator":
        return cls(
            {PauliString.from_label(d["pauli"], n_qubits): complex(d["re"], d.get("im", 0.0)) for d in data},
            n_qubits,
        )


def commutator(a: QubitOperator, b: QubitOperator) -> QubitOperator:
    """``[a, b] = ab - ba``, keeping only anticommuting string pairs."""
    a._check(b)
    out = []
    for pa, ca in a.items():
        for pb, cb in b.items():
            if pa.commutes_with(pb):
                continue
            ph, prod = multiply(pa, pb)
            out.append((prod, 2 * ph * ca * cb))
    return QubitOperator(out, a.n_qubits)


def to_matrix(op: QubitOperator | PauliString, limit: int = MATRIX_QUBIT_LIMIT) -> np.ndarray:
    """Dense matrix of ``op``.  Refuses operators above ``limit`` qubits."""
    if op.n_qubits > limit:
        raise ValueError(
            f"dense matrix refused: {op.n_qubits} qubits exceeds the limit of {limit}"
        )
    if isinstance(op, PauliString):
        return op.to_matrix()
    dim = 1 << op.n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    for p, c in op.items():
        # P|b> = i^{ny} (-1)^{|b & z|} |b ^ x>
        sign = 1 - 2 * (_parity(idx & p.z))
        mat[idx ^ p.x, idx] += c * (1j) ** p.n_y * sign
    return mat


_POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def _parity(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64)
    count = np.zeros_like(v)
    while True:
        count += _POP8[v & 0xFF]
        v = v >> 8
        if not v.any():
            break
    return count & 1
