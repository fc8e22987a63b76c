import numpy as np
import pytest

from wwbar.states import DensityMatrix, StateVector, make_state

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def random_state(rng, n=3) -> StateVector:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(v, normalize=True)


def random_density(rng, n=1, rank=None) -> DensityMatrix:
    d = 2**n
    rank = rank or d
    x = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = x @ x.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_hermitian(rng, d) -> np.ndarray:
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return x + x.conj().T


def brute_kron(a, b):
    """Entry-by-entry Kronecker product."""
    a, b = np.asarray(a), np.asarray(b)
    out = np.zeros((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            for k in range(b.shape[0]):
                for l in range(b.shape[1]):
                    out[i * b.shape[0] + k, j * b.shape[1] + l] = a[i, j] * b[k, l]
    return out


def brute_partial_trace(rho, keep, n):
    """Sum over basis labels of the traced qubits, one matrix element at a time."""
    keep = sorted(keep)
    traced = [q for q in range(1, n + 1) if q not in keep]
    dk = 2 ** len(keep)
    out = np.zeros((dk, dk), dtype=complex)

    def bits(index, qubits):
        return {q: (index >> (len(qubits) - 1 - k)) & 1 for k, q in enumerate(qubits)}

    def full_index(b):
        return sum(b[q] << (n - q) for q in range(1, n + 1))

    for r in range(dk):
        for c in range(dk):
            for t in range(2 ** len(traced)):
                tb = bits(t, traced)
                i = full_index({**bits(r, keep), **tb})
                j = full_index({**bits(c, keep), **tb})
                out[r, c] += rho[i, j]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def wwbar():
    return make_state("WWbar")


@pytest.fixture
def ghz():
    return make_state("GHZ")


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(name: str, passed: bool, detail: str = ""):
        _ACCEPTANCE.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
