"""Pure and mixed qubit states, the named three-qubit states, and gates.

Basis index bits read left to right as qubit 1, 2, ..., n, matching ket
labels: index 0b011 is |011>, with qubit 1 in |0>.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from . import linalg
from .linalg import num_qubits, partial_trace, tensor_product

NORM_ATOL = 1e-10
UNITARY_ATOL = 1e-10


class StateVector:
    """Normalized pure state of ``n`` qubits."""

    def __init__(self, data, *, normalize: bool = False):
        arr = np.array(data, dtype=complex).reshape(-1)
        self.n_qubits = num_qubits(arr.size)
        if not np.all(np.isfinite(arr)):
            raise ValueError("state has non-finite amplitudes")
        norm = np.linalg.norm(arr)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            arr = arr / norm
        elif abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state is not normalized (norm {norm:.12g})")
        self.data = arr

    @property
    def dim(self) -> int:
        return self.data.size

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.data, other.data))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.data, self.data.conj()))

    def gauged(self) -> "StateVector":
        return StateVector(linalg.gauge_vector(self.data))

    def evolve(self, op) -> "StateVector":
        return apply(op, self)

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits}, data={np.round(self.data, 6)!r})"


class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix on ``n`` qubits.

    Validation tolerates deviations up to ``atol`` (default 1e-8) in each
    of the three properties.
    """

    def __init__(self, data, *, validate: bool = True, atol: float = 1e-8):
        arr = linalg._as_matrix(data)
        if arr.shape[0] != arr.shape[1]:
            raise ValueError(f"density matrix must be square, got {arr.shape}")
        self.n_qubits = num_qubits(arr.shape[0])
        if validate:
            if not linalg.is_hermitian(arr, atol):
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(arr)
            if abs(tr - 1.0) > atol:
                raise ValueError(f"density matrix trace is {tr:.12g}, expected 1")
            lam = np.linalg.eigvalsh(0.5 * (arr + arr.conj().T))
            if lam.min() < -atol:
                raise ValueError(f"density matrix has negative eigenvalue {lam.min():.3e}")
        self.data = arr

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        return state.density()

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityMatrix":
        d = 2**n_qubits
        return cls(np.eye(d) / d)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def partial_trace(self, keep: Sequence[int]) -> "DensityMatrix":
        return DensityMatrix(partial_trace(self.data, keep))

    def evolve(self, op) -> "DensityMatrix":
        return apply_density(op, self)

    def __repr__(self) -> str:
        return f"DensityMatrix(n_qubits={self.n_qubits})"


def as_density(state: Union[StateVector, DensityMatrix]) -> DensityMatrix:
    return state.density() if isinstance(state, StateVector) else state


# --- named states -----------------------------------------------------------


def basis_state(bits: str) -> StateVector:
    """Computational basis ket from a bit string such as ``"101"``."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"invalid basis label {bits!r}")
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return StateVector(v)


def _uniform(kets: Sequence[str]) -> StateVector:
    v = np.zeros(2 ** len(kets[0]), dtype=complex)
    for k in kets:
        v[int(k, 2)] = 1.0
    return StateVector(v, normalize=True)


def make_state(name: str) -> StateVector:
    """Named three-qubit states: ``GHZ``, ``W``, ``Wbar``, ``WWbar``, or a bit string.

    ``Wbar`` is the bit-flip obverse of ``W``, so that ``(W + Wbar)/sqrt(2)``
    is the six-ket ``WWbar`` state.
    """
    key = name.strip()
    table = {
        "GHZ": ("000", "111"),
        "W": ("001", "010", "100"),
        "WBAR": ("110", "101", "011"),
        "WWBAR": ("001", "010", "011", "100", "101", "110"),
    }
    if key.upper() in table:
        return _uniform(table[key.upper()])
    return basis_state(key)


# --- gates ------------------------------------------------------------------

_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def ry_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def embed(local: dict[int, np.ndarray], n_qubits: int) -> np.ndarray:
    """Tensor single-qubit operators onto an ``n_qubits`` register (identity elsewhere)."""
    eye = np.eye(2, dtype=complex)
    return tensor_product(*(local.get(q, eye) for q in range(1, n_qubits + 1)))


def _controlled(control: int, target: int, u: np.ndarray, n_qubits: int) -> np.ndarray:
    return embed({control: _P0}, n_qubits) + embed({control: _P1, target: u}, n_qubits)


@dataclass(frozen=True)
class GateOp:
    """One gate on an ``n_qubits`` register.

    ``qubits`` is ``(target,)`` for single-qubit gates and
    ``(control, target)`` for controlled ones. Diagonal gates carry the full
    list of basis-state phases in ``phases`` and act on every qubit.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0
    n_qubits: int = 3
    phases: tuple[float, ...] = ()
    label: str = ""

    def matrix(self) -> np.ndarray:
        return _gate_matrix(self)

    def __str__(self) -> str:
        if self.label:
            return self.label
        q = "".join(str(i) for i in self.qubits)
        if self.kind == "rotation_y":
            return f"U{q}[{self.angle:.6g}]_y"
        if self.kind == "controlled_rotation_y":
            return f"CR{q}[{self.angle:.6g}]_y"
        if self.kind == "cnot":
            return f"CNOT{q}"
        return "DIAG"


@lru_cache(maxsize=256)
def _gate_matrix(gate: GateOp) -> np.ndarray:
    n = gate.n_qubits
    if gate.kind == "rotation_y":
        m = embed({gate.qubits[0]: ry_matrix(gate.angle)}, n)
    elif gate.kind == "controlled_rotation_y":
        m = _controlled(gate.qubits[0], gate.qubits[1], ry_matrix(gate.angle), n)
    elif gate.kind == "cnot":
        m = _controlled(gate.qubits[0], gate.qubits[1], _X, n)
    elif gate.kind == "diagonal":
        m = np.diag(np.exp(1j * np.asarray(gate.phases)))
    else:
        raise ValueError(f"unknown gate kind {gate.kind!r}")
    m.setflags(write=False)
    return m


def _check_qubit(q: int, n_qubits: int) -> int:
    if not isinstance(q, (int, np.integer)) or not 1 <= q <= n_qubits:
        raise ValueError(f"qubit index {q!r} outside 1..{n_qubits}")
    return int(q)


def _check_pair(control: int, target: int, n_qubits: int) -> tuple[int, int]:
    c, t = _check_qubit(control, n_qubits), _check_qubit(target, n_qubits)
    if c == t:
        raise ValueError("control and target must differ")
    return c, t


def rotation_y(qubit: int, angle: float, n_qubits: int = 3) -> GateOp:
    """``U_i[angle]_y``: rotation about y on one qubit."""
    return GateOp("rotation_y", (_check_qubit(qubit, n_qubits),), float(angle), n_qubits)


def controlled_rotation_y(control: int, target: int, angle: float, n_qubits: int = 3) -> GateOp:
    """``CR_ij[angle]_y``: y rotation on ``target`` when ``control`` is |1>."""
    return GateOp("controlled_rotation_y", _check_pair(control, target, n_qubits), float(angle), n_qubits)


def cnot(control: int, target: int, n_qubits: int = 3) -> GateOp:
    return GateOp("cnot", _check_pair(control, target, n_qubits), 0.0, n_qubits)


def diagonal_phase(phases: Sequence[float], n_qubits: int = 3, label: str = "") -> GateOp:
    """Diagonal gate multiplying basis state ``k`` by ``exp(i * phases[k])``."""
    phases = tuple(float(p) for p in phases)
    if len(phases) != 2**n_qubits:
        raise ValueError(f"need {2**n_qubits} phases, got {len(phases)}")
    return GateOp("diagonal", tuple(range(1, n_qubits + 1)), 0.0, n_qubits, phases, label)


def phase_shift(qubit: int, angle: float, n_qubits: int = 3) -> GateOp:
    """``diag(1, exp(i*angle))`` on one qubit, as a full-register diagonal gate."""
    q = _check_qubit(qubit, n_qubits)
    bits = [(k >> (n_qubits - q)) & 1 for k in range(2**n_qubits)]
    return diagonal_phase([angle * b for b in bits], n_qubits, label=f"PHASE{q}[{angle:.6g}]")


def parity_phase(qubit_a: int, qubit_b: int, angle: float, n_qubits: int = 3) -> GateOp:
    """Phase ``exp(i*angle)`` on basis states where the two qubits differ.

    This is the state-level effect of free evolution under a zz coupling
    between the two qubits, up to a global phase.
    """
    a, b = _check_pair(qubit_a, qubit_b, n_qubits)
    phases = []
    for k in range(2**n_qubits):
        ba = (k >> (n_qubits - a)) & 1
        bb = (k >> (n_qubits - b)) & 1
        phases.append(angle if ba != bb else 0.0)
    return diagonal_phase(phases, n_qubits, label=f"ZZ{a}{b}[{angle:.6g}]")


def is_unitary(m, atol: float = UNITARY_ATOL) -> bool:
    m = np.asarray(m)
    return np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])) <= atol


# --- application ------------------------------------------------------------

Operator = Union[GateOp, np.ndarray]


def operator_matrix(op: Operator) -> np.ndarray:
    return op.matrix() if isinstance(op, GateOp) else np.asarray(op, dtype=complex)


def apply(op: Operator, state: StateVector) -> StateVector:
    """Apply a unitary gate or matrix to a pure state.

    Raises:
        ValueError: on a dimension mismatch, or if the result is not
            normalized (use :func:`apply_raw` for non-unitary maps).
    """
    return StateVector(apply_raw(op, state.data))


def apply_raw(op: Operator, vec) -> np.ndarray:
    m = operator_matrix(op)
    vec = np.asarray(vec, dtype=complex)
    if m.ndim != 2 or m.shape[1] != vec.size:
        raise ValueError(f"operator shape {m.shape} does not match state dimension {vec.size}")
    return m @ vec


def apply_density(op: Operator, rho: DensityMatrix) -> DensityMatrix:
    """Conjugate a density matrix: ``M rho M^dagger``."""
    m = operator_matrix(op)
    if m.shape != rho.data.shape:
        raise ValueError(f"operator shape {m.shape} does not match density shape {rho.data.shape}")
    return DensityMatrix(m @ rho.data @ m.conj().T)
