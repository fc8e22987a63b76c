import numpy as np
import pytest

from wwbar.circuit import (
    CircuitProgram,
    iota_checkpoint,
    preparation_checkpoints,
    run_with_checkpoints,
    wwbar_circuit,
    wwbar_nmr_variant,
)
from wwbar.states import basis_state, controlled_rotation_y, make_state, rotation_y


def overlap(a, b):
    return abs(np.vdot(a.data, b.data)) ** 2


class TestCheckpoints:
    def test_gate_sequence(self):
        final, devs = run_with_checkpoints(wwbar_circuit())
        assert sorted(devs) == [1, 2, 3, 4, 5, 8]
        assert max(devs.values()) <= 1e-10
        assert overlap(final, make_state("WWbar")) >= 1 - 1e-12

    def test_nmr_variant(self):
        final, devs = run_with_checkpoints(wwbar_nmr_variant())
        assert len(devs) == 7
        assert max(devs.values()) <= 1e-10
        assert overlap(final, make_state("WWbar")) >= 1 - 1e-12

    def test_checkpoints_are_normalized(self):
        for s in preparation_checkpoints() + [iota_checkpoint()]:
            assert abs(np.linalg.norm(s.data) - 1) < 1e-12

    def test_iota_differs_from_compensated(self):
        # the uncompensated phase is physical: overlap with the fifth checkpoint is below 1
        assert overlap(iota_checkpoint(), preparation_checkpoints()[4]) < 0.9

    def test_global_phase_ignored(self):
        prog = wwbar_circuit()
        shifted = CircuitProgram(prog.gates, {k: type(v)(np.exp(0.7j) * v.data) for k, v in prog.checkpoints.items()})
        _, devs = run_with_checkpoints(shifted)
        assert max(devs.values()) <= 1e-10

    def test_corrupted_angle_is_caught(self):
        gates = list(wwbar_circuit().gates)
        gates[1] = controlled_rotation_y(1, 2, 2 * np.arccos(1 / np.sqrt(3)) + 0.01)
        prog = wwbar_circuit()
        _, devs = run_with_checkpoints(CircuitProgram(gates, prog.checkpoints))
        assert devs[1] <= 1e-10
        assert devs[2] > 1e-3 and devs[8] > 1e-3


class TestPrograms:
    def test_unitary_composition(self):
        prog = wwbar_circuit()
        final, _ = run_with_checkpoints(prog)
        u = prog.unitary()
        np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
        np.testing.assert_allclose(u[:, 0], final.data, atol=1e-14)

    def test_other_input(self):
        prog = wwbar_circuit()
        final, _ = run_with_checkpoints(prog, basis_state("111"))
        np.testing.assert_allclose(final.data, prog.unitary()[:, 7], atol=1e-14)
        assert abs(np.linalg.norm(final.data) - 1) < 1e-12

    def test_empty_program(self):
        psi = make_state("GHZ")
        final, devs = run_with_checkpoints(CircuitProgram([]), psi)
        np.testing.assert_array_equal(final.data, psi.data)
        assert devs == {}

    def test_bad_checkpoint_position(self):
        with pytest.raises(ValueError):
            CircuitProgram([rotation_y(1, 0.1)], {2: basis_state("000")})

    def test_qubit_count_mismatch(self):
        with pytest.raises(ValueError):
            run_with_checkpoints(wwbar_circuit(), basis_state("00"))

    def test_output_symmetric_under_qubit_permutation(self):
        final, _ = run_with_checkpoints(wwbar_circuit())
        t = final.data.reshape(2, 2, 2)
        for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
            np.testing.assert_allclose(t.transpose(perm), t, atol=1e-12)

    def test_to_dict(self):
        d = wwbar_nmr_variant().to_dict()
        assert [g["kind"] for g in d["gates"]].count("diagonal") == 2
        assert [c["position"] for c in d["checkpoints"]] == [1, 2, 3, 4, 6, 7, 10]
