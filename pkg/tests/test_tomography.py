import json

import numpy as np
import pytest

from wwbar.circuit import preparation_checkpoints
from wwbar.metrics import fidelity
from wwbar.rng import stream
from wwbar.states import DensityMatrix, make_state
from wwbar.tomography import (
    DetectionSetting,
    MeasurementRecord,
    augment_settings,
    depolarize,
    design_rank,
    detection_settings_2q,
    detection_settings_3q,
    reconstruct_linear_inversion,
    scheme_settings,
    simulate_readout,
    tomograph,
)

from conftest import brute_partial_trace, random_density


def full_rank_3q():
    return design_rank(detection_settings_3q()) == 63


class TestSettings:
    def test_three_qubit_list(self):
        s = detection_settings_3q()
        assert len(s) == 11 and s[0].label == "III" and s[-1].label == "YYY"
        np.testing.assert_array_equal(s[0].rotation, np.eye(8))

    def test_homogeneous_label_is_cube(self):
        x = DetectionSetting("X").rotation
        np.testing.assert_allclose(DetectionSetting("XXX").rotation, np.kron(np.kron(x, x), x), atol=1e-15)

    def test_two_qubit_lists(self):
        # the traced qubit's I is dropped from each three-qubit label
        assert [s.label for s in detection_settings_2q("AB")] == ["II", "IX", "IY", "XX"]
        assert [s.label for s in detection_settings_2q("BC")] == ["II", "IX", "IY", "XX"]

    @pytest.mark.parametrize("label", ["I", "X", "Y", "XY", "IXY", "YYY"])
    def test_rotations_unitary(self, label):
        r = DetectionSetting(label).rotation
        np.testing.assert_allclose(r.conj().T @ r, np.eye(r.shape[0]), atol=1e-10)

    def test_pulse_convention(self):
        # X pulse takes |0> to (|0> - i|1>)/sqrt 2
        np.testing.assert_allclose(DetectionSetting("X").rotation[:, 0], np.array([1, -1j]) / np.sqrt(2), atol=1e-15)

    @pytest.mark.parametrize("bad", ["", "IZI", "ab"])
    def test_bad_label(self, bad):
        with pytest.raises(ValueError):
            DetectionSetting(bad)

    def test_bad_pair(self):
        with pytest.raises(ValueError):
            detection_settings_2q("AC")

    def test_ranks(self):
        assert design_rank(detection_settings_3q()) == 63
        assert design_rank(detection_settings_2q("AB")) == 15
        # the alternative reading {II, XI, YI, XX} is equally complete
        assert design_rank([DetectionSetting(s) for s in ("II", "XI", "YI", "XX")]) == 15


class TestReadout:
    def test_maximally_mixed_silent(self):
        for s in detection_settings_3q():
            rec = simulate_readout(DensityMatrix.maximally_mixed(3), s)
            assert len(rec.observations) == 12
            np.testing.assert_allclose(rec.values(), 0, atol=1e-15)

    def test_diagonal_state_silent(self):
        rec = simulate_readout(make_state("000").density(), DetectionSetting("III"))
        np.testing.assert_array_equal(rec.values(), 0)

    def test_wwbar_lines(self, wwbar):
        rec = simulate_readout(wwbar.density(), DetectionSetting("III"))
        lines = {(o.spin, o.bra_index, o.ket_index): o.value for o in rec.observations}
        assert lines[(3, 0b000, 0b001)] == 0
        assert abs(lines[(3, 0b010, 0b011)] - 1 / 6) < 1e-15

    def test_lines_are_rotated_entries(self, rng):
        rho = random_density(rng, 3)
        s = DetectionSetting("XIY")
        rot = s.rotation @ rho.data @ s.rotation.conj().T
        for o in simulate_readout(rho, s).observations:
            assert o.value == pytest.approx(rot[o.bra_index, o.ket_index], abs=1e-15)
            assert bin(o.bra_index ^ o.ket_index).count("1") == 1

    def test_noise_needs_rng(self, wwbar):
        with pytest.raises(ValueError):
            simulate_readout(wwbar.density(), DetectionSetting("III"), 0.01)
        with pytest.raises(ValueError):
            simulate_readout(wwbar.density(), DetectionSetting("III"), -0.1, np.random.default_rng(0))

    def test_noise_statistics(self, wwbar):
        rho = wwbar.density()
        clean = simulate_readout(rho, DetectionSetting("YYI")).values()
        diffs = np.concatenate([
            simulate_readout(rho, DetectionSetting("YYI"), 0.02, stream(0, "t", k)).values() - clean for k in range(200)
        ])
        assert abs(np.std(diffs.real) - 0.02) < 0.002 and abs(np.std(diffs.imag) - 0.02) < 0.002

    def test_record_json_round_trip(self, wwbar):
        rec = simulate_readout(wwbar.density(), DetectionSetting("IXX"), 0.01, stream(1, "t"))
        back = MeasurementRecord.from_dict(json.loads(json.dumps(rec.to_dict())))
        assert back.setting == rec.setting and back.noise_sigma == rec.noise_sigma
        np.testing.assert_array_equal(back.values(), rec.values())


class TestRoundTrip:
    def test_wwbar_noiseless(self, wwbar):
        assert full_rank_3q()
        run = tomograph(wwbar.density(), detection_settings_3q())
        assert run.augmented == [] and run.result.rank == 63
        assert fidelity(run.result.density, wwbar).value >= 0.999
        assert run.result.residual < 1e-12

    @pytest.mark.parametrize("k", range(6))
    def test_circuit_states(self, k):
        assert full_rank_3q()
        psi = preparation_checkpoints()[k]
        run = tomograph(psi.density(), detection_settings_3q())
        assert fidelity(run.result.density, psi).value >= 0.999

    def test_mixed_state_exact(self, rng):
        rho = random_density(rng, 3)
        run = tomograph(rho, detection_settings_3q())
        np.testing.assert_allclose(run.result.density.data, rho.data, atol=1e-8)

    def test_maximally_mixed(self):
        run = tomograph(DensityMatrix.maximally_mixed(3), detection_settings_3q())
        np.testing.assert_allclose(run.result.density.data, np.eye(8) / 8, atol=1e-8)

    def test_noisy(self, wwbar):
        # measured over 40 seeds under this readout model: F = 0.940 +/- 0.008
        run = tomograph(wwbar.density(), detection_settings_3q(), sigma=0.01, seed=0)
        f = fidelity(run.result.density, wwbar).value
        assert 0.90 <= f < 1
        assert run.result.residual > 0

    def test_fidelity_falls_with_noise(self, wwbar):
        means = []
        for sigma in (0.0, 0.005, 0.01, 0.02):
            fs = [fidelity(tomograph(wwbar.density(), detection_settings_3q(), sigma, seed=s).result.density, wwbar).value for s in range(3)]
            means.append(np.mean(fs))
        assert all(a > b for a, b in zip(means, means[1:]))

    def test_seeded_reproducible(self, wwbar):
        a = tomograph(wwbar.density(), detection_settings_3q(), 0.01, seed=5).result.density.data
        b = tomograph(wwbar.density(), detection_settings_3q(), 0.01, seed=5).result.density.data
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("scheme, keep", [("2q-AB", [1, 2]), ("2q-BC", [2, 3])])
    def test_two_qubit_marginals(self, wwbar, scheme, keep):
        settings, kept = scheme_settings(scheme)
        assert kept == keep
        analytic = brute_partial_trace(wwbar.density().data, keep, 3)
        run = tomograph(DensityMatrix(analytic), settings, augment=False)
        assert run.result.rank == 15
        np.testing.assert_allclose(run.result.density.data, analytic, atol=1e-6)

    def test_rank_deficient_is_reported(self, wwbar):
        rec = [simulate_readout(wwbar.density(), DetectionSetting("III"))]
        assert reconstruct_linear_inversion(rec).rank < 63

    def test_augmentation(self):
        settings, added = augment_settings([DetectionSetting("III")])
        assert design_rank(settings) == 63 and added
        assert added == sorted(added)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            scheme_settings("4q")


class TestDepolarize:
    def test_endpoints(self, wwbar):
        rho = wwbar.density()
        np.testing.assert_array_equal(depolarize(rho, 0).data, rho.data)
        np.testing.assert_allclose(depolarize(rho, 1).data, np.eye(8) / 8)

    def test_overlap(self, wwbar):
        rho = depolarize(wwbar.density(), 0.1)
        assert abs(fidelity(rho, wwbar).value - 0.9125) < 1e-9

    @pytest.mark.parametrize("p", [-0.1, 1.1])
    def test_bad_weight(self, wwbar, p):
        with pytest.raises(ValueError):
            depolarize(wwbar.density(), p)
