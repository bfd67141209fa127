"""Molecular integrals, frozen-core effective Hamiltonians and compression.

Integral conventions
--------------------
``g[p, q, r, s]`` read from FCIDUMP is the chemist integral ``(pq|rs)``.
The second-quantized operator is written physicist-style,

    H = sum_pq h_pq a_p^ a_q + 1/2 sum_pqrs G_pqrs a_p^ a_q^ a_r a_s

with ``G_pqrs = (ps|qr)`` over spin orbitals.  The chemist -> physicist
swap happens once, inside :func:`spin_orbital_integrals`.  Each spin-allowed
entry becomes one fermionic term, so the two-body coefficient stored on a
term is ``G_pqrs / 2``.
"""

from __future__ import annotations

import gzip
import io
import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .fermion import FermionOperator, jordan_wigner
from .pauli import PauliString, QubitOperator, to_matrix


class FCIDUMPError(ValueError):
    """Malformed FCIDUMP input; the message names the offending line."""


@dataclass(frozen=True)
class MolecularIntegrals:
    n_orbitals: int
    n_electrons: int
    ms2: int
    orbsym: tuple[int, ...]
    isym: int
    h: np.ndarray
    g: np.ndarray
    e_core: float

    def __post_init__(self):
        n = self.n_orbitals
        if self.h.shape != (n, n) or self.g.shape != (n,) * 4:
            raise ValueError("integral tensor shapes do not match n_orbitals")
        if len(self.orbsym) != n:
            raise ValueError("orbsym length must equal n_orbitals")

    def check_symmetry(self, atol: float = 1e-12) -> bool:
        g = self.g
        perms = [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]
        return np.allclose(self.h, self.h.T, atol=atol) and all(
            np.allclose(g, g.transpose(p), atol=atol) for p in perms
        )


@dataclass(frozen=True)
class ActiveSpace:
    core: tuple[int, ...]
    active: tuple[int, ...]

    def __init__(self, core: Iterable[int] = (), active: Iterable[int] = ()):
        object.__setattr__(self, "core", tuple(int(i) for i in core))
        object.__setattr__(self, "active", tuple(int(i) for i in active))

    def validate(self, n_orbitals: int):
        if set(self.core) & set(self.active):
            raise ValueError("core and active orbitals overlap")
        for i in self.core + self.active:
            if not 0 <= i < n_orbitals:
                raise ValueError(f"orbital index {i} out of range ({n_orbitals} orbitals)")
        if len(set(self.active)) != len(self.active) or len(set(self.core)) != len(self.core):
            raise ValueError("repeated orbital index in active space")


# ---------------------------------------------------------------- FCIDUMP

_HEADER_END = re.compile(r"&END|/\s*$", re.IGNORECASE)


def _open_text(source) -> tuple[TextIO, bool]:
    if isinstance(source, (str, os.PathLike)):
        path = Path(source)
        if path.suffix == ".gz":
            return io.TextIOWrapper(gzip.open(path, "rb"), encoding="ascii"), True
        return open(path, encoding="ascii"), True
    return source, False


def _parse_header(text: str, first_line: int) -> dict:
    body = re.sub(r"^\s*&FCI", "", text, flags=re.IGNORECASE)
    body = _HEADER_END.sub("", body)
    fields: dict[str, list[str]] = {}
    key = None
    for tok in re.split(r"[,\s]+", body):
        if not tok:
            continue
        if "=" in tok:
            key, _, val = tok.partition("=")
            key = key.upper()
            fields[key] = [val] if val else []
        elif key is None:
            raise FCIDUMPError(f"line {first_line}: unexpected header token {tok!r}")
        else:
            fields[key].append(tok)
    out = {}
    try:
        for name in ("NORB", "NELEC"):
            out[name] = int(fields[name][0])
        out["MS2"] = int(fields.get("MS2", ["0"])[0])
        out["ISYM"] = int(fields.get("ISYM", ["1"])[0])
        orbsym = fields.get("ORBSYM", ["1"] * out["NORB"])
        out["ORBSYM"] = tuple(int(v) for v in orbsym if v)
    except KeyError as exc:
        raise FCIDUMPError(f"line {first_line}: header missing {exc.args[0]}") from None
    except (ValueError, IndexError):
        raise FCIDUMPError(f"line {first_line}: non-integer header value") from None
    if len(out["ORBSYM"]) != out["NORB"]:
        raise FCIDUMPError(
            f"line {first_line}: ORBSYM has {len(out['ORBSYM'])} entries, NORB={out['NORB']}"
        )
    return out


def parse_fcidump(source) -> MolecularIntegrals:
    """Read an FCIDUMP file (path, ``.gz`` path, or open text stream)."""
    stream, owned = _open_text(source)
    try:
        lines = stream.read().splitlines()
    finally:
        if owned:
            stream.close()
    header_lines = []
    i = 0
    while i < len(lines):
        header_lines.append(lines[i])
        i += 1
        if _HEADER_END.search(lines[i - 1]):
            break
    else:
        raise FCIDUMPError("line 1: FCIDUMP header not terminated by &END")
    if not header_lines[0].strip().upper().startswith("&FCI"):
        raise FCIDUMPError("line 1: FCIDUMP must start with &FCI")
    hdr = _parse_header(" ".join(header_lines), 1)
    n = hdr["NORB"]
    h = np.zeros((n, n))
    g = np.zeros((n, n, n, n))
    e_core = 0.0
    for lineno in range(i, len(lines)):
        parts = lines[lineno].split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FCIDUMPError(f"line {lineno + 1}: expected 'value i j k l', got {lines[lineno]!r}")
        try:
            val = float(parts[0].replace("D", "E").replace("d", "e"))
            a, b, c, d = (int(x) for x in parts[1:])
        except ValueError:
            raise FCIDUMPError(f"line {lineno + 1}: non-numeric field in {lines[lineno]!r}") from None
        if min(a, b, c, d) < 0 or max(a, b, c, d) > n:
            raise FCIDUMPError(f"line {lineno + 1}: orbital index out of range 1..{n}")
        if a == b == c == d == 0:
            e_core = val
        elif c == 0 and d == 0:
            if a == 0 or b == 0:
                raise FCIDUMPError(f"line {lineno + 1}: zero index in one-electron record")
            h[a - 1, b - 1] = h[b - 1, a - 1] = val
        else:
            if 0 in (a, b, c, d):
                raise FCIDUMPError(f"line {lineno + 1}: zero index in two-electron record")
            p, q, r, s = a - 1, b - 1, c - 1, d - 1
            for idx in (
                (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
            ):
                g[idx] = val
    return MolecularIntegrals(
        n_orbitals=n,
        n_electrons=hdr["NELEC"],
        ms2=hdr["MS2"],
        orbsym=hdr["ORBSYM"],
        isym=hdr["ISYM"],
        h=h,
        g=g,
        e_core=e_core,
    )


def write_fcidump(ints: MolecularIntegrals, target, tol: float = 0.0):
    """Write ``ints`` in FCIDUMP form with round-trip exact decimals.

    Every unique entry with ``|value| > tol`` is written (``tol=0`` keeps
    everything that is not exactly zero, including round-off-sized values).
    """
    n = ints.n_orbitals
    out = [
        f" &FCI NORB={n},NELEC={ints.n_electrons},MS2={ints.ms2},",
        "  ORBSYM=" + ",".join(str(s) for s in ints.orbsym) + ",",
        f"  ISYM={ints.isym},",
        " &END",
    ]
    fmt = "{:.17g} {} {} {} {}".format
    for p in range(n):
        for q in range(p + 1):
            pq = p * (p + 1) // 2 + q
            for r in range(n):
                for s in range(r + 1):
                    if r * (r + 1) // 2 + s > pq:
                        continue
                    v = ints.g[p, q, r, s]
                    if v != 0.0 and abs(v) > tol:
                        out.append(fmt(v, p + 1, q + 1, r + 1, s + 1))
    for p in range(n):
        for q in range(p + 1):
            v = ints.h[p, q]
            if v != 0.0 and abs(v) > tol:
                out.append(fmt(v, p + 1, q + 1, 0, 0))
    out.append(fmt(ints.e_core, 0, 0, 0, 0))
    text = "\n".join(out) + "\n"
    if isinstance(target, (str, os.PathLike)):
        path = Path(target)
        opener = gzip.open if path.suffix == ".gz" else open
        with opener(path, "wt") as fh:
            fh.write(text)
    else:
        target.write(text)


# ------------------------------------------------------- effective Hamiltonian


def spin_orbital_integrals(h: np.ndarray, g: np.ndarray, orbitals: Sequence[int]):
    """Spin-orbital ``h_PQ`` and physicist ``G_PQRS = (PS|QR)`` over ``orbitals``.

    Modes are interleaved (``2k`` alpha, ``2k+1`` beta for the k-th listed
    spatial orbital).
    """
    orb = np.asarray(orbitals, dtype=int)
    m = 2 * len(orb)
    sp = orb[np.arange(m) // 2]
    spin = np.arange(m) % 2
    h_so = h[np.ix_(sp, sp)] * (spin[:, None] == spin[None, :])
    same_ps = spin[:, None, None, None] == spin[None, None, None, :]
    same_qr = spin[None, :, None, None] == spin[None, None, :, None]
    # (PS|QR) laid out on axes P, Q, R, S
    g_phys = g[np.ix_(sp, sp, sp, sp)].transpose(0, 2, 3, 1)
    return h_so, g_phys * (same_ps & same_qr)


def _mixed_g(g, sp_idx, spin_idx):
    """Evaluate G_PQRS = (PS|QR) for four aligned spin-orbital index arrays."""
    (P, Q, R, S), (sP, sQ, sR, sS) = sp_idx, spin_idx
    return g[P, S, Q, R] * ((sP == sS) & (sQ == sR))


def frozen_core_integrals(ints: MolecularIntegrals, space: ActiveSpace):
    """Effective active-space spin-orbital one-body tensor and core potential.

    With ``I, J`` over core spin orbitals and ``P, Q`` over active ones:

        h~_PQ = h_PQ + sum_I (G_IQPI - G_IIPQ)
        V_eff = sum_I h_II + 1/2 sum_IJ (G_JIIJ - G_JJII)
    """
    space.validate(ints.n_orbitals)
    core = np.asarray(space.core, dtype=int)
    act = np.asarray(space.active, dtype=int)
    h_so, g_act = spin_orbital_integrals(ints.h, ints.g, act)
    nc, na = 2 * len(core), 2 * len(act)
    c_sp, c_s = core[np.arange(nc) // 2], np.arange(nc) % 2
    a_sp, a_s = act[np.arange(na) // 2], np.arange(na) % 2

    h_eff = h_so.copy()
    if nc:
        I = np.arange(nc)[:, None, None]
        P = np.arange(na)[None, :, None]
        Q = np.arange(na)[None, None, :]
        coulomb = _mixed_g(
            ints.g,
            (c_sp[I], a_sp[Q], a_sp[P], c_sp[I]),
            (c_s[I], a_s[Q], a_s[P], c_s[I]),
        )
        exchange = _mixed_g(
            ints.g,
            (c_sp[I], c_sp[I], a_sp[P], a_sp[Q]),
            (c_s[I], c_s[I], a_s[P], a_s[Q]),
        )
        h_eff = h_eff + (coulomb - exchange).sum(axis=0)

        Ii = np.arange(nc)[:, None]
        Jj = np.arange(nc)[None, :]
        jiij = _mixed_g(
            ints.g, (c_sp[Jj], c_sp[Ii], c_sp[Ii], c_sp[Jj]), (c_s[Jj], c_s[Ii], c_s[Ii], c_s[Jj])
        )
        jjii = _mixed_g(
            ints.g, (c_sp[Jj], c_sp[Jj], c_sp[Ii], c_sp[Ii]), (c_s[Jj], c_s[Jj], c_s[Ii], c_s[Ii])
        )
        v_eff = float(ints.h[c_sp, c_sp].sum() + 0.5 * (jiij - jjii).sum())
    else:
        v_eff = 0.0
    return h_eff, g_act, v_eff


@dataclass
class EffectiveHamiltonian:
    fermion: FermionOperator
    offset: float
    v_eff: float
    n_electrons: int
    n_modes: int
    orbsym: tuple[int, ...]
    isym: int = 1
    ms2: int = 0

    @property
    def n_spatial(self) -> int:
        return self.n_modes // 2


def build_effective_hamiltonian(ints: MolecularIntegrals, space: ActiveSpace | None = None):
    """Frozen-core Hamiltonian on ``2 * len(space.active)`` spin-orbital modes.

    The returned fermionic operator carries the scalar offset
    ``e_core + V_eff`` as its first (empty-word) term, then one term per
    nonzero spin-allowed one-body entry and one per nonzero two-body entry.
    """
    if space is None:
        space = ActiveSpace((), range(ints.n_orbitals))
    n_act_el = ints.n_electrons - 2 * len(space.core)
    if n_act_el < 0:
        raise ValueError(f"negative active electron count ({n_act_el})")
    if n_act_el > 2 * len(space.active):
        raise ValueError("more active electrons than active spin orbitals")
    h_eff, g_act, v_eff = frozen_core_integrals(ints, space)
    n_modes = h_eff.shape[0]
    offset = ints.e_core + v_eff
    terms: list = [((), offset)]
    for p, q in zip(*np.nonzero(h_eff)):
        terms.append((((p, True), (q, False)), h_eff[p, q]))
    for p, q, r, s in zip(*np.nonzero(g_act)):
        terms.append((((p, True), (q, True), (r, False), (s, False)), 0.5 * g_act[p, q, r, s]))
    return EffectiveHamiltonian(
        fermion=FermionOperator(terms, n_modes),
        offset=offset,
        v_eff=v_eff,
        n_electrons=n_act_el,
        n_modes=n_modes,
        orbsym=tuple(ints.orbsym[i] for i in space.active),
        isym=ints.isym,
        ms2=ints.ms2,
    )


# ---------------------------------------------------------------- compression


@dataclass(frozen=True)
class CompressionReport:
    threshold: float
    kept: int
    dropped: int
    dropped_abs_sum: float

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)


def compress(op, threshold: float):
    """Drop every term with ``|coefficient| <= threshold``; keep the scalar term.

    Works on :class:`FermionOperator` (term list) and :class:`QubitOperator`.
    Returns ``(compressed, CompressionReport)``.
    """
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    if isinstance(op, FermionOperator):
        kept, dropped = [], []
        for prod, c in op:
            (kept if (not prod or abs(c) > threshold) else dropped).append((prod, c))
        out = FermionOperator(kept, op.n_modes)
    elif isinstance(op, QubitOperator):
        kept, dropped = [], []
        for p, c in op.items():
            (kept if (p.is_identity() or abs(c) > threshold) else dropped).append((p, c))
        out = QubitOperator(kept, op.n_qubits)
    else:
        raise TypeError(f"cannot compress {type(op).__name__}")
    report = CompressionReport(
        threshold=float(threshold),
        kept=len(kept),
        dropped=len(dropped),
        dropped_abs_sum=float(sum(abs(c) for _, c in dropped)),
    )
    return out, report


def term_count(op) -> int:
    """Number of stored terms (the scalar term counts as one)."""
    return len(op)


def qubit_hamiltonian(
    ham: EffectiveHamiltonian, threshold: float | None = None, level: str = "fermion"
) -> tuple[QubitOperator, CompressionReport | None]:
    """Jordan-Wigner image of ``ham``, optionally compressed first.

    ``level="fermion"`` thresholds the fermionic terms before mapping;
    ``level="qubit"`` maps first and thresholds the Pauli coefficients.
    """
    report = None
    f = ham.fermion
    if threshold is not None and level == "fermion":
        f, report = compress(f, threshold)
    q = jordan_wigner(f).real()
    if threshold is not None and level == "qubit":
        q, report = compress(q, threshold)
    elif level not in ("fermion", "qubit"):
        raise ValueError(f"unknown compression level {level!r}")
    return q, report


# ------------------------------------------------------------- exact oracle


def sector_indices(n_qubits: int, n_electrons: int | None = None, ms2: int | None = None):
    idx = np.arange(1 << n_qubits)
    keep = np.ones(idx.shape, dtype=bool)
    bits = (idx[:, None] >> np.arange(n_qubits)) & 1
    if n_electrons is not None:
        keep &= bits.sum(axis=1) == n_electrons
    if ms2 is not None:
        keep &= bits[:, 0::2].sum(axis=1) - bits[:, 1::2].sum(axis=1) == ms2
    return idx[keep]


def exact_ground_energy(op: QubitOperator, n_electrons: int | None = None, ms2: int | None = None):
    """Lowest eigenvalue by dense diagonalization, optionally within a particle/spin sector."""
    mat = to_matrix(op)
    if n_electrons is not None or ms2 is not None:
        sel = sector_indices(op.n_qubits, n_electrons, ms2)
        mat = mat[np.ix_(sel, sel)]
    return float(np.linalg.eigvalsh(mat)[0])


# ---------------------------------------------------------------- fixtures

FIXTURES = {
    "h2": dict(file="h2_sto3g.fcidump", core=(), active=(0, 1)),
    "h4": dict(file="h4_linear_2A_sto3g.fcidump", core=(), active=(0, 1, 2, 3)),
    "benzene": dict(file="benzene_sto3g_no.fcidump.gz", core=tuple(range(19)), active=(19, 20, 21, 22)),
    "benzene_mo": dict(file="benzene_sto3g_mo.fcidump.gz", core=tuple(range(19)), active=(19, 20, 21, 22)),
}


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("adaptvqe") / "data" / FIXTURES[name]["file"]))


def load_fixture(name: str) -> tuple[MolecularIntegrals, ActiveSpace]:
    """Bundled integrals and their default active space (``h2``, ``h4``, ``benzene``, ``benzene_mo``)."""
    spec = FIXTURES[name]
    return parse_fcidump(fixture_path(name)), ActiveSpace(spec["core"], spec["active"])
