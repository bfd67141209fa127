"""Fermionic ladder-operator algebra and the Jordan-Wigner mapping.

Spin orbitals are interleaved: mode ``2p`` is spatial orbital ``p`` with
spin alpha, mode ``2p + 1`` the same orbital with spin beta.  Mode ``i``
maps to qubit ``i`` with no reordering.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString, QubitOperator

Ladder = tuple[int, bool]  # (mode, is_creation)
Product = tuple[Ladder, ...]


def alpha(p: int) -> int:
    return 2 * p


def beta(p: int) -> int:
    return 2 * p + 1


class FermionOperator:
    """Linear combination of products of ladder operators.

    Terms are kept as an ordered list exactly as supplied, with no implicit
    normal ordering or merging; two different words for the same operator
    stay two terms.  Use :meth:`normal_ordered` for a canonical form.
    """

    __slots__ = ("n_modes", "_terms")

    def __init__(self, terms: Iterable[tuple[Sequence[Ladder], complex]] = (), n_modes: int = 0):
        self.n_modes = int(n_modes)
        out = []
        for prod, c in terms:
            prod = tuple((int(m), bool(d)) for m, d in prod)
            for m, _ in prod:
                if not 0 <= m < self.n_modes:
                    raise IndexError(f"mode {m} out of range for {self.n_modes} modes")
            out.append((prod, complex(c)))
        self._terms = out

    @classmethod
    def identity(cls, n_modes: int, coeff: complex = 1.0) -> "FermionOperator":
        return cls([((), coeff)], n_modes)

    @classmethod
    def term(cls, word: str | Sequence[Ladder], n_modes: int, coeff: complex = 1.0):
        """Single term.  ``word`` may be text such as ``"3^ 1"``."""
        if isinstance(word, str):
            word = [(int(t.rstrip("^")), t.endswith("^")) for t in word.split()]
        return cls([(word, coeff)], n_modes)

    @property
    def terms(self) -> list[tuple[Product, complex]]:
        return list(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def _check(self, other):
        if self.n_modes != other.n_modes:
            raise ValueError(f"{self.n_modes} vs {other.n_modes} modes")

    def __add__(self, other):
        if isinstance(other, FermionOperator):
            self._check(other)
            return FermionOperator(self._terms + other._terms, self.n_modes)
        return NotImplemented

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            self._check(other)
            return FermionOperator(
                [(pa + pb, ca * cb) for pa, ca in self._terms for pb, cb in other._terms],
                self.n_modes,
            )
        if np.isscalar(other):
            return FermionOperator([(p, c * other) for p, c in self._terms], self.n_modes)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return NotImplemented

    def __neg__(self):
        return self * -1

    def dagger(self) -> "FermionOperator":
        return FermionOperator(
            [(tuple((m, not d) for m, d in reversed(p)), np.conj(c)) for p, c in self._terms],
            self.n_modes,
        )

    def normal_ordered(self, tol: float = 1e-14) -> dict[Product, complex]:
        """Canonical form: creators left, each block sorted by descending mode."""
        acc: dict[Product, complex] = {}
        for prod, c in self._terms:
            for p2, c2 in _normal_order_word(prod):
                acc[p2] = acc.get(p2, 0) + c * c2
        return {p: c for p, c in sorted(acc.items()) if abs(c) > tol}

    def equals(self, other: "FermionOperator", tol: float = 1e-12) -> bool:
        diff = (self - other).normal_ordered(tol=tol)
        return not diff

    def is_anti_hermitian(self, tol: float = 1e-12) -> bool:
        return (self + self.dagger()).normal_ordered(tol=tol) == {}

    def many_body_order(self) -> int:
        return max((len(p) for p, _ in self._terms), default=0)

    def constant(self) -> complex:
        return sum((c for p, c in self._terms if not p), 0j)

    def __repr__(self):
        def fmt(p):
            return " ".join(f"{m}{'^' if d else ''}" for m, d in p) or "1"

        body = " + ".join(f"({c:.6g}) [{fmt(p)}]" for p, c in self._terms[:5])
        more = "" if len(self) <= 5 else f" + ... ({len(self)} terms)"
        return f"FermionOperator({body or '0'}{more}, n_modes={self.n_modes})"


def _normal_order_word(word: Product) -> list[tuple[Product, complex]]:
    """Expand one ladder word into normal-ordered words (with signs)."""
    out: list[tuple[Product, complex]] = []
    stack = [(list(word), 1.0)]
    while stack:
        w, c = stack.pop()
        # insertion sort; each transposition of ladder operators flips the sign
        for i in range(1, len(w)):
            for j in range(i, 0, -1):
                (ma, da), (mb, db) = w[j - 1], w[j]
                if not da and db:
                    # a_m a_n^ = delta_mn - a_n^ a_m
                    if ma == mb:
                        stack.append((w[: j - 1] + w[j + 1 :], c))
                elif da != db or mb < ma:
                    break
                elif ma == mb:
                    c = 0.0
                    break
                w[j - 1], w[j] = w[j], w[j - 1]
                c = -c
            if c == 0.0:
                break
        if c != 0.0:
            out.append((tuple(w), c))
    return out


@lru_cache(maxsize=None)
def _ladder_qubit(mode: int, creation: bool, n_modes: int) -> QubitOperator:
    zmask = (1 << mode) - 1
    xs = PauliString(n_modes, 1 << mode, zmask)
    ys = PauliString(n_modes, 1 << mode, zmask | (1 << mode))
    sign = -0.5j if creation else 0.5j
    return QubitOperator({xs: 0.5, ys: sign}, n_modes)


def jordan_wigner(f: FermionOperator) -> QubitOperator:
    """Map to qubits: a_p^ -> Z_0..Z_{p-1} (X_p - iY_p)/2, a_p -> ... (X_p + iY_p)/2."""
    if f.n_modes < 1:
        raise ValueError("jordan_wigner needs at least one mode")
    n = f.n_modes
    acc: dict[PauliString, complex] = {}
    word_cache: dict[Product, QubitOperator] = {}
    for prod, c in f:
        if prod not in word_cache:
            q = QubitOperator.scalar(1.0, n)
            for m, d in prod:
                q = q * _ladder_qubit(m, d, n)
            word_cache[prod] = q
        for p, v in word_cache[prod].items():
            acc[p] = acc.get(p, 0) + c * v
    return QubitOperator(acc, n)


def number_operator(n_modes: int) -> FermionOperator:
    return FermionOperator([(((p, True), (p, False)), 1.0) for p in range(n_modes)], n_modes)


def hartree_fock_reference(n_modes: int, n_electrons: int) -> np.ndarray:
    """Occupation vector of the reference determinant (lowest modes filled).

    Index ``i`` is the occupation of mode/qubit ``i``; the statevector basis
    index is ``sum(occ[i] << i)``.
    """
    if n_electrons < 0 or n_electrons > n_modes:
        raise ValueError(f"cannot place {n_electrons} electrons in {n_modes} modes")
    occ = np.zeros(n_modes, dtype=np.int8)
    occ[:n_electrons] = 1
    return occ


def occupation_index(occ: Sequence[int]) -> int:
    return int(sum(int(b) << i for i, b in enumerate(occ)))


def ladder_matrix(mode: int, creation: bool, n_modes: int) -> np.ndarray:
    """Fermionic ladder operator in the occupation basis, built from first principles.

    Independent of the Pauli route: acts on basis index bits directly with
    the sign ``(-1)^(number of occupied modes below mode)``.
    """
    dim = 1 << n_modes
    mat = np.zeros((dim, dim))
    for b in range(dim):
        occupied = (b >> mode) & 1
        if creation == bool(occupied):
            continue
        sign = (-1) ** bin(b & ((1 << mode) - 1)).count("1")
        mat[b ^ (1 << mode), b] = sign
    return mat
