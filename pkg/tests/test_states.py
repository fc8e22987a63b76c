import numpy as np
import pytest

from wwbar.states import (
    DensityMatrix,
    StateVector,
    apply,
    apply_density,
    basis_state,
    cnot,
    controlled_rotation_y,
    diagonal_phase,
    is_unitary,
    make_state,
    parity_phase,
    phase_shift,
    rotation_y,
)

from conftest import random_density, random_state

S6 = 1 / np.sqrt(6)


def ket(coeffs):
    v = np.zeros(8, dtype=complex)
    for bits, c in coeffs.items():
        v[int(bits, 2)] = c
    return v


class TestNamedStates:
    def test_ghz(self):
        np.testing.assert_allclose(make_state("GHZ").data, ket({"000": 1, "111": 1}) / np.sqrt(2))

    def test_wwbar_support(self):
        data = make_state("WWbar").data
        support = {format(i, "03b") for i in np.flatnonzero(np.abs(data) > 0)}
        assert support == {"001", "010", "011", "100", "101", "110"}
        np.testing.assert_allclose(data[np.abs(data) > 0], S6)

    def test_w_and_obverse(self):
        w, wbar = make_state("W"), make_state("Wbar")
        assert abs(w.inner(wbar)) == 0
        np.testing.assert_allclose((w.data + wbar.data) / np.sqrt(2), make_state("WWbar").data, atol=1e-15)
        # obverse = every qubit flipped
        np.testing.assert_array_equal(wbar.data, w.data[::-1])

    @pytest.mark.parametrize("name", ["GHZ", "W", "Wbar", "WWbar", "000", "101"])
    def test_normalized(self, name):
        assert abs(np.linalg.norm(make_state(name).data) - 1) < 1e-12

    def test_bad_label(self):
        with pytest.raises(ValueError):
            make_state("GHZ3")

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            StateVector([1, 1])


class TestDensityMatrix:
    def test_validation(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.0, 0.5]))
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.5, -0.5]))
        with pytest.raises(ValueError):
            DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))

    def test_partial_trace_method(self):
        rho = make_state("GHZ").density().partial_trace([1, 2])
        assert rho.n_qubits == 2


class TestRotationY:
    def test_pi_flips(self):
        out = apply(rotation_y(1, np.pi), basis_state("000"))
        np.testing.assert_allclose(out.data, ket({"100": 1}), atol=1e-15)

    def test_first_step(self):
        out = apply(rotation_y(1, -np.pi / 3), basis_state("000"))
        np.testing.assert_allclose(out.data, ket({"000": np.sqrt(3) / 2, "100": -0.5}), atol=1e-15)

    def test_zero_angle(self):
        np.testing.assert_allclose(rotation_y(2, 0).matrix(), np.eye(8))

    def test_block(self):
        a = 0.37
        m = rotation_y(3, a).matrix()
        np.testing.assert_allclose(m[:2, :2], [[np.cos(a / 2), -np.sin(a / 2)], [np.sin(a / 2), np.cos(a / 2)]])

    @pytest.mark.parametrize("q", [0, 4, 1.5])
    def test_bad_qubit(self, q):
        with pytest.raises(ValueError):
            rotation_y(q, 0.1)


class TestControlled:
    def test_cr12_checkpoint(self):
        psi = StateVector(ket({"000": np.sqrt(3) / 2, "100": -0.5}))
        out = apply(controlled_rotation_y(1, 2, 2 * np.arccos(1 / np.sqrt(3))), psi)
        expected = 0.5 * ket({"000": np.sqrt(3), "100": -1 / np.sqrt(3), "110": -np.sqrt(2 / 3)})
        np.testing.assert_allclose(out.data, expected, atol=1e-15)

    def test_cr21_checkpoint(self):
        psi = StateVector(0.5 * ket({"000": np.sqrt(3), "100": -1 / np.sqrt(3), "110": -np.sqrt(2 / 3)}))
        out = apply(controlled_rotation_y(2, 1, -np.pi / 2), psi)
        a = 1 / np.sqrt(3)
        expected = 0.5 * ket({"000": np.sqrt(3), "100": -a, "110": -a, "010": -a})
        np.testing.assert_allclose(out.data, expected, atol=1e-15)

    def test_control_zero_untouched(self, rng):
        v = np.zeros(8, dtype=complex)
        v[:4] = rng.normal(size=4)
        psi = StateVector(v, normalize=True)
        np.testing.assert_allclose(apply(controlled_rotation_y(1, 3, 1.1), psi).data, psi.data)

    def test_same_qubits_rejected(self):
        with pytest.raises(ValueError):
            controlled_rotation_y(2, 2, 0.3)
        with pytest.raises(ValueError):
            cnot(1, 1)

    def test_cnot_flip(self):
        np.testing.assert_array_equal(apply(cnot(1, 3), basis_state("101")).data, basis_state("100").data)

    def test_cnot_checkpoints(self):
        a = 1 / np.sqrt(3)
        c3 = StateVector(0.5 * ket({"000": np.sqrt(3), "100": -a, "110": -a, "010": -a}))
        c4 = apply(cnot(1, 3), c3)
        np.testing.assert_allclose(c4.data, 0.5 * ket({"000": np.sqrt(3), "101": -a, "111": -a, "010": -a}), atol=1e-15)
        c5 = apply(cnot(2, 3), c4)
        np.testing.assert_allclose(c5.data, 0.5 * ket({"000": np.sqrt(3), "101": -a, "110": -a, "011": -a}), atol=1e-15)

    def test_cnot_vs_cry_pi_columnwise(self):
        # CRy(pi) equals CNOT up to a sign on one column of each control-1 pair
        c, r = cnot(1, 2).matrix(), controlled_rotation_y(1, 2, np.pi).matrix()
        for k in range(8):
            if (k >> 2) & 1:
                e = np.zeros(8)
                e[k] = 1
                assert abs(abs(np.vdot(c @ e, r @ e)) - 1) < 1e-12


class TestUnitarity:
    gates = [
        rotation_y(1, 0.3),
        rotation_y(3, -2.1),
        controlled_rotation_y(1, 2, 1.9),
        controlled_rotation_y(3, 1, -0.4),
        cnot(2, 3),
        cnot(3, 1),
        phase_shift(2, 0.7),
        parity_phase(1, 3, -1.2),
        diagonal_phase(np.linspace(0, 1, 8)),
    ]

    @pytest.mark.parametrize("gate", gates, ids=str)
    def test_unitary(self, gate):
        m = gate.matrix()
        assert np.linalg.norm(m.conj().T @ m - np.eye(8)) <= 1e-10
        assert is_unitary(m)


class TestApply:
    def test_identity(self, rng):
        psi = random_state(rng)
        np.testing.assert_array_equal(apply(np.eye(8), psi).data, psi.data)

    def test_inverse_rotation(self, rng):
        psi = random_state(rng)
        back = apply(rotation_y(2, -0.8), apply(rotation_y(2, 0.8), psi))
        np.testing.assert_allclose(back.data, psi.data, atol=1e-10)

    def test_density_conjugation_keeps_spectrum(self, rng):
        rho = random_density(rng, 3)
        g = controlled_rotation_y(2, 3, 0.9).matrix() @ rotation_y(1, 1.3).matrix()
        out = apply_density(g, rho)
        assert abs(np.trace(out.data) - 1) < 1e-12
        np.testing.assert_allclose(np.linalg.eigvalsh(out.data), np.linalg.eigvalsh(rho.data), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply(np.eye(4), make_state("GHZ"))
        with pytest.raises(ValueError):
            apply_density(np.eye(4), DensityMatrix.maximally_mixed(3))
