import numpy as np
from hypothesis import settings, strategies as st

from adaptvqe.pauli import PauliString, QubitOperator

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@st.composite
def pauli_strings(draw, n=None, max_qubits=6):
    n = draw(st.integers(1, max_qubits)) if n is None else n
    x = draw(st.integers(0, (1 << n) - 1))
    z = draw(st.integers(0, (1 << n) - 1))
    return PauliString(n, x, z)


@st.composite
def pauli_pairs(draw, max_qubits=4, count=2):
    n = draw(st.integers(1, max_qubits))
    return tuple(draw(pauli_strings(n)) for _ in range(count))


def random_operator(rng, n, n_terms, hermitian=True):
    terms = []
    for _ in range(n_terms):
        p = PauliString(n, int(rng.integers(1 << n)), int(rng.integers(1 << n)))
        c = rng.normal() if hermitian else complex(rng.normal(), rng.normal())
        terms.append((p, c))
    return QubitOperator(terms, n)


def random_state(rng, n):
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return psi / np.linalg.norm(psi)


ACCEPTANCE_LINES: dict[str, str] = {}


def report(criterion: str, passed: bool, detail: str):
    """Record and print one acceptance verdict line."""
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
