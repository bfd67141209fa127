import gzip
import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adaptvqe.fermion import jordan_wigner
from adaptvqe.hamiltonian import (
    ActiveSpace,
    FCIDUMPError,
    MolecularIntegrals,
    build_effective_hamiltonian,
    compress,
    exact_ground_energy,
    load_fixture,
    parse_fcidump,
    qubit_hamiltonian,
    sector_indices,
    term_count,
    write_fcidump,
)
from adaptvqe.pauli import QubitOperator, to_matrix

from conftest import random_operator

HEADER = "&FCI NORB=2,NELEC=2,MS2=0,\n ORBSYM=1,1,\n ISYM=1,\n&END\n"


def random_integrals(rng, n, n_el, e_core=0.7):
    h = rng.normal(size=(n, n))
    h = h + h.T
    a = rng.normal(size=(n, n, n, n))
    g = sum(a.transpose(p) for p in [(0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2)])
    g = 0.1 * (g + g.transpose(2, 3, 0, 1))
    return MolecularIntegrals(n, n_el, 0, (1,) * n, 1, h, g, e_core)


def test_parse_one_body_record():
    ints = parse_fcidump(io.StringIO(HEADER + "0.5 1 1 0 0\n"))
    assert ints.h[0, 0] == 0.5
    assert ints.n_orbitals == 2 and ints.n_electrons == 2 and ints.orbsym == (1, 1)


def test_parse_two_body_symmetry_expansion():
    ints = parse_fcidump(io.StringIO(HEADER + "0.7 1 2 1 2\n1.25 0 0 0 0\n"))
    for idx in [(0, 1, 0, 1), (1, 0, 0, 1), (0, 1, 1, 0), (1, 0, 1, 0)]:
        assert ints.g[idx] == 0.7
    assert np.count_nonzero(ints.g) == 4
    assert ints.e_core == 1.25
    assert ints.check_symmetry()


@pytest.mark.parametrize(
    "body,line",
    [("0.5 1 3 0 0\n", 5), ("abc 1 1 0 0\n", 5), ("0.1 1 1 0 0\n0.2 1 1\n", 6)],
)
def test_parse_errors_report_line(body, line):
    with pytest.raises(FCIDUMPError, match=f"line {line}"):
        parse_fcidump(io.StringIO(HEADER + body))


def test_parse_bad_header():
    with pytest.raises(FCIDUMPError, match="line 1"):
        parse_fcidump(io.StringIO("&FCI NELEC=2 &END\n0.5 1 1 0 0\n"))


def test_round_trip_fixed_point(tmp_path):
    ints = random_integrals(np.random.default_rng(1), 3, 2)
    p1 = tmp_path / "a.fcidump"
    write_fcidump(ints, p1)
    first = parse_fcidump(p1)
    np.testing.assert_allclose(first.g, ints.g, atol=1e-15)
    p2 = tmp_path / "b.fcidump.gz"
    write_fcidump(first, p2)
    second = parse_fcidump(p2)
    np.testing.assert_array_equal(second.h, first.h)
    np.testing.assert_array_equal(second.g, first.g)
    assert second.e_core == first.e_core
    p3 = tmp_path / "c.fcidump"
    write_fcidump(second, p3)
    assert p3.read_bytes() == gzip.decompress(p2.read_bytes())


def test_h2_fixture_energy():
    ints, space = load_fixture("h2")
    ham = build_effective_hamiltonian(ints, space)
    q, _ = qubit_hamiltonian(ham)
    e = exact_ground_energy(q, 2, 0)
    np.testing.assert_allclose(e, -1.137, atol=1e-3)
    np.testing.assert_allclose(np.linalg.eigvalsh(to_matrix(q))[0], e, atol=1e-10)


def test_empty_core_is_plain_hamiltonian():
    ints = random_integrals(np.random.default_rng(2), 2, 2)
    ham = build_effective_hamiltonian(ints)
    assert ham.v_eff == 0.0 and ham.offset == ints.e_core
    assert ham.fermion.terms[0] == ((), ints.e_core)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("core,active", [((0,), (1, 2)), ((1,), (0, 2)), ((2,), (0, 1))])
def test_frozen_core_matches_constrained_full_space(seed, core, active):
    ints = random_integrals(np.random.default_rng(seed), 3, 4)
    full = to_matrix(jordan_wigner(build_effective_hamiltonian(ints).fermion))
    sel = sector_indices(6, 4, 0)
    c = core[0]
    sel = [i for i in sel if (i >> 2 * c) & 3 == 3]
    e_full = np.linalg.eigvalsh(full[np.ix_(sel, sel)])[0]
    ham = build_effective_hamiltonian(ints, ActiveSpace(core, active))
    e_eff = exact_ground_energy(jordan_wigner(ham.fermion), 2, 0)
    np.testing.assert_allclose(e_eff, e_full, atol=1e-10)


def test_active_space_errors():
    ints = random_integrals(np.random.default_rng(0), 3, 2)
    with pytest.raises(ValueError, match="negative active electron"):
        build_effective_hamiltonian(ints, ActiveSpace((0, 1), (2,)))
    with pytest.raises(ValueError, match="overlap"):
        build_effective_hamiltonian(ints, ActiveSpace((0,), (0, 1)))
    with pytest.raises(ValueError, match="out of range"):
        build_effective_hamiltonian(ints, ActiveSpace((), (0, 5)))


def test_compress_examples():
    op = QubitOperator.from_dict({"I": 0.001, "Z0": 0.5, "X0 X1": 0.005, "Y1": -0.02}, 2)
    same, rep0 = compress(op, 0)
    assert same == op and rep0.dropped == 0
    out, rep = compress(op, 1e-2)
    assert term_count(out) == 3 and rep.kept == 3 and rep.dropped == 1
    np.testing.assert_allclose(rep.dropped_abs_sum, 0.005)
    only, _ = compress(op, np.inf)
    assert term_count(only) == 1 and only.constant == 0.001
    assert term_count(QubitOperator.from_dict({"I": 1}, 3)) == 1
    assert rep.to_json() == '{"dropped": 1, "dropped_abs_sum": 0.005, "kept": 3, "threshold": 0.01}'


def test_compress_rejects_negative_threshold():
    with pytest.raises(ValueError):
        compress(QubitOperator.from_dict({"Z0": 1}, 1), -1)


def test_fermion_level_compression_keeps_scalar():
    ints = random_integrals(np.random.default_rng(4), 2, 2)
    ham = build_effective_hamiltonian(ints)
    out, rep = compress(ham.fermion, 1e9)
    assert out.terms == [((), ham.offset)]
    assert rep.kept == 1


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.floats(0, 1.5))
def test_perturbation_bound(seed, n, threshold):
    rng = np.random.default_rng(seed)
    op = random_operator(rng, n, 12)
    small, rep = compress(op, threshold)
    diff = abs(exact_ground_energy(op) - exact_ground_energy(small))
    assert diff <= rep.dropped_abs_sum + 1e-10


@given(st.integers(0, 2**32 - 1), st.lists(st.floats(0, 2), min_size=2, max_size=5))
def test_term_count_monotone(seed, thresholds):
    op = random_operator(np.random.default_rng(seed), 4, 20)
    counts = [term_count(compress(op, t)[0]) for t in sorted(thresholds)]
    assert counts == sorted(counts, reverse=True)


def test_qubit_level_compression_option():
    ints, space = load_fixture("h2")
    ham = build_effective_hamiltonian(ints, space)
    q, rep = qubit_hamiltonian(ham, 0.1, level="qubit")
    assert all(abs(c) > 0.1 or p.is_identity() for p, c in q.items())
    with pytest.raises(ValueError):
        qubit_hamiltonian(ham, 0.1, level="bogus")
