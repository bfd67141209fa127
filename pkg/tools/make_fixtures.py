"""Regenerate the bundled FCIDUMP fixtures with PySCF.

Not imported by the package; PySCF is only needed to run this script.

    python3 tools/make_fixtures.py [outdir]

Benzene integrals are produced in a generically rotated Cartesian frame so
that symmetry-forbidden integrals carry round-off values instead of exact
zeros, the same as an unaligned calculation would produce.
"""

import sys
from pathlib import Path

import numpy as np
from pyscf import ao2mo, gto, scf, symm
from pyscf.symm.param import IRREP_ID_MOLPRO
from scipy.linalg import eigh
from scipy.spatial.transform import Rotation

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from adaptvqe.hamiltonian import MolecularIntegrals, write_fcidump  # noqa: E402

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "src/adaptvqe/data"


def integrals(mol, C, nelec, orbsym):
    n = C.shape[1]
    h = C.T @ scf.hf.get_hcore(mol) @ C
    g = ao2mo.restore(1, ao2mo.full(mol, C), n)
    # ao2mo output is only 4-fold symmetric to round-off; enforce (pq|rs) = (rs|pq)
    g = 0.5 * (g + g.transpose(2, 3, 0, 1))
    return MolecularIntegrals(
        n_orbitals=n, n_electrons=nelec, ms2=0, orbsym=tuple(int(s) for s in orbsym),
        isym=1, h=h, g=g, e_core=mol.energy_nuc(),
    )


def hydrogen_chain(name, n_atoms, spacing):
    atom = [("H", (0.0, 0.0, k * spacing)) for k in range(n_atoms)]
    mol = gto.M(atom=atom, basis="sto-3g", verbose=0)
    mf = scf.RHF(mol).run()
    ints = integrals(mol, mf.mo_coeff, mol.nelectron, [1] * mol.nao)
    write_fcidump(ints, OUT / name)
    print(name, "RHF", mf.e_tot)


def benzene_geometry(rcc=1.39, rch=1.09):
    ang = np.pi / 3 * np.arange(6)
    ring = np.stack([np.cos(ang), np.sin(ang), np.zeros(6)], axis=1)
    return [("C", tuple(rcc * r)) for r in ring] + [("H", tuple((rcc + rch) * r)) for r in ring]


def rotate_coefficients(mol, C, R):
    """AO coefficients of the same orbitals after rotating the molecule by R."""
    C = C.copy()
    labels = mol.ao_labels(fmt=False)
    px = [i for i, lab in enumerate(labels) if lab[2].endswith("p") and lab[3] == "x"]
    for i in px:
        assert [labels[i + k][3] for k in range(3)] == ["x", "y", "z"]
        C[i : i + 3] = R @ C[i : i + 3]
    return C


def benzene(n_keep=23):
    atom = benzene_geometry()
    mols = gto.M(atom=atom, basis="sto-3g", verbose=0, symmetry=True)
    mol = mols.copy()
    mol.symmetry = False
    mol.build()
    mf = scf.RHF(mols).run()

    # broken-symmetry UHF density -> natural orbitals, diagonalized per irrep
    umf = scf.UHF(mol).run()
    for _ in range(4):
        mo1 = umf.stability()[0]
        umf.kernel(umf.make_rdm1(mo1, umf.mo_occ))
    S = mol.intor("int1e_ovlp")
    dm = umf.make_rdm1()
    dm = dm[0] + dm[1]
    occ, cols, labs = [], [], []
    for ir, c in zip(mols.irrep_id, mols.symm_orb):
        if c.shape[1] == 0:
            continue
        w, v = eigh(c.T @ S @ dm @ S @ c, c.T @ S @ c)
        occ += list(w)
        cols.append(c @ v)
        labs += [ir] * len(w)
    order = np.argsort(-np.array(occ), kind="stable")
    C_no = np.hstack(cols)[:, order]
    lab_no = np.array(labs)[order]
    lab_mo = symm.label_orb_symm(mols, mols.irrep_id, mols.symm_orb, mf.mo_coeff)

    R = Rotation.from_euler("zyx", [0.37, 1.13, -0.71]).as_matrix()
    # the symmetric build reorients the molecule, so rotate its frame, not the input one
    coords = mol.atom_coords(unit="Bohr")
    rot = gto.M(
        atom=[(mol.atom_symbol(i), tuple(R @ coords[i])) for i in range(mol.natm)],
        basis="sto-3g", unit="Bohr", verbose=0,
    )
    assert abs(rot.energy_nuc() - mol.energy_nuc()) < 1e-10
    for tag, C, lab in (("no", C_no, lab_no), ("mo", mf.mo_coeff, lab_mo)):
        Cr = rotate_coefficients(mol, C[:, :n_keep], R)
        orbsym = [IRREP_ID_MOLPRO["D2h"][i] for i in lab[:n_keep]]
        ints = integrals(rot, Cr, mol.nelectron, orbsym)
        write_fcidump(ints, OUT / f"benzene_sto3g_{tag}.fcidump.gz")
        print("benzene", tag, "orbsym", ints.orbsym[19:23])
    print("benzene RHF", mf.e_tot, "UHF", umf.e_tot)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    hydrogen_chain("h2_sto3g.fcidump", 2, 0.735)
    hydrogen_chain("h4_linear_2A_sto3g.fcidump", 4, 2.0)
    benzene()
