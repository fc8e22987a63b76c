"""Gate program that prepares the WWbar state from |000>, with checkpoints."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .states import (
    GateOp,
    StateVector,
    basis_state,
    cnot,
    controlled_rotation_y,
    parity_phase,
    phase_shift,
    rotation_y,
)

_R3 = np.sqrt(3.0)


@dataclass
class CircuitProgram:
    """Ordered gates plus expected states at chosen positions.

    A checkpoint at position ``k`` is compared against the state after the
    first ``k`` gates have been applied.
    """

    gates: list[GateOp]
    checkpoints: dict[int, StateVector] = field(default_factory=dict)
    labels: dict[int, str] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        positions = sorted(self.checkpoints)
        if any(p < 1 or p > len(self.gates) for p in positions):
            raise ValueError("checkpoint positions must lie in 1..len(gates)")
        n = {g.n_qubits for g in self.gates}
        if len(n) > 1:
            raise ValueError("all gates must act on the same register size")

    @property
    def n_qubits(self) -> int:
        return self.gates[0].n_qubits if self.gates else 0

    def unitary(self) -> np.ndarray:
        u = np.eye(2**self.n_qubits, dtype=complex)
        for g in self.gates:
            u = g.matrix() @ u
        return u

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_qubits": self.n_qubits,
            "gates": [_gate_to_dict(g) for g in self.gates],
            "checkpoints": [
                {
                    "position": p,
                    "label": self.labels.get(p, ""),
                    "amplitudes": [[float(a.real), float(a.imag)] for a in self.checkpoints[p].data],
                }
                for p in sorted(self.checkpoints)
            ],
        }


def _gate_to_dict(g: GateOp) -> dict:
    out = {"kind": g.kind, "qubits": list(g.qubits), "label": str(g)}
    if g.kind in ("rotation_y", "controlled_rotation_y"):
        out["angle"] = g.angle
    if g.kind == "diagonal":
        out["phases"] = list(g.phases)
    return out


def _ket(coeffs: dict[str, complex]) -> StateVector:
    v = np.zeros(8, dtype=complex)
    for bits, c in coeffs.items():
        v[int(bits, 2)] = c
    return StateVector(v)


def preparation_checkpoints() -> list[StateVector]:
    """The six intermediate states of the WWbar preparation sequence."""
    a = 1 / (2 * _R3)
    return [
        _ket({"000": _R3 / 2, "100": -0.5}),
        _ket({"000": _R3 / 2, "100": -a, "110": -0.5 * np.sqrt(2 / 3)}),
        _ket({"000": _R3 / 2, "100": -a, "110": -a, "010": -a}),
        _ket({"000": _R3 / 2, "101": -a, "111": -a, "010": -a}),
        _ket({"000": _R3 / 2, "101": -a, "110": -a, "011": -a}),
        _ket({k: 1 / np.sqrt(6) for k in ("001", "010", "011", "100", "101", "110")}),
    ]


def iota_checkpoint() -> StateVector:
    """State after the NMR CNOT_23 with its uncompensated relative phase."""
    a = 1 / (2 * _R3)
    return _ket({"000": _R3 / 2, "101": -1j * a, "110": -a, "011": -1j * a})


def _head() -> list[GateOp]:
    return [
        rotation_y(1, -np.pi / 3),
        controlled_rotation_y(1, 2, 2 * np.arccos(1 / _R3)),
        controlled_rotation_y(2, 1, -np.pi / 2),
        cnot(1, 3),
        cnot(2, 3),
    ]


def _tail() -> list[GateOp]:
    return [rotation_y(1, np.pi / 2), rotation_y(2, np.pi / 2), rotation_y(3, np.pi / 2)]


def wwbar_circuit() -> CircuitProgram:
    cps = preparation_checkpoints()
    gates = _head() + _tail()
    positions = [1, 2, 3, 4, 5, 8]
    labels = ["U1", "CR12", "CR21", "CNOT13", "CNOT23", "WWbar"]
    return CircuitProgram(
        gates,
        dict(zip(positions, cps)),
        dict(zip(positions, labels)),
        name="wwbar",
    )


def wwbar_nmr_variant() -> CircuitProgram:
    """The preparation as run on the NMR register.

    The coupling-based CNOT_23 leaves a phase of i on qubit 3; a later zz
    evolution between qubits 1 and 2 removes it before the final rotations.
    """
    cps = preparation_checkpoints()
    gates = (
        _head()
        + [phase_shift(3, np.pi / 2), parity_phase(1, 2, -np.pi / 2)]
        + _tail()
    )
    checkpoints = {1: cps[0], 2: cps[1], 3: cps[2], 4: cps[3], 6: iota_checkpoint(), 7: cps[4], 10: cps[5]}
    labels = {1: "U1", 2: "CR12", 3: "CR21", 4: "CNOT13", 6: "CNOT23+iota", 7: "compensated", 10: "WWbar"}
    return CircuitProgram(gates, checkpoints, labels, name="wwbar_nmr")


def _gauged_deviation(actual: np.ndarray, expected: np.ndarray) -> float:
    # gauge both on the expected state's dominant amplitude
    mags = np.abs(expected)
    j = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    if abs(actual[j]) == 0:
        return float(np.linalg.norm(actual - expected))
    a = actual * (np.conj(actual[j]) / abs(actual[j]))
    e = expected * (np.conj(expected[j]) / abs(expected[j]))
    return float(np.linalg.norm(a - e))


def run_with_checkpoints(prog: CircuitProgram, initial: StateVector | None = None):
    """Run ``prog`` and compare against every checkpoint.

    Returns:
        ``(final_state, deviations)`` where ``deviations`` maps checkpoint
        position to the norm distance after global-phase gauging.
    """
    if initial is None:
        initial = basis_state("0" * max(prog.n_qubits, 1))
    if prog.gates and initial.n_qubits != prog.n_qubits:
        raise ValueError(f"initial state has {initial.n_qubits} qubits, program needs {prog.n_qubits}")
    vec = initial.data
    deviations: dict[int, float] = {}
    for k, g in enumerate(prog.gates, start=1):
        vec = g.matrix() @ vec
        if k in prog.checkpoints:
            deviations[k] = _gauged_deviation(vec, prog.checkpoints[k].data)
    return StateVector(vec), deviations
