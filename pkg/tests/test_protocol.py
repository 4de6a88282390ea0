import math

import numpy as np
import pytest

from eprsim.errors import ConfigError, DimMismatchError, POutOfRangeError
from eprsim.linalg import DensityOperator, expectation, fidelity_pure, kron, purity
from eprsim.optics import SIGMA_X, SIGMA_Z, deutsch_gate, ket, path_ket, x_basis_adapter
from eprsim.protocol import (
    Arm,
    Basis,
    DetectorId,
    ExperimentConfig,
    FunctionType,
    MeasurementRecord,
    RecordSet,
    build_arm,
    detected_polarization,
    epr_state,
    exact_correlators,
    joint_output_state,
    outcome_distribution,
    sample_records,
    schematic_amplitude,
    schematic_outcome,
    single_photon_output,
    target_state,
    werner,
)

FUNCTIONS = list(FunctionType)
ARMS = list(Arm)
P_GRID = [round(0.60 + 0.05 * i, 2) for i in range(9)]


def cfg_for(fn, arm, **kwargs) -> ExperimentConfig:
    other = FunctionType.CONSTANT if fn is FunctionType.BALANCED else FunctionType.BALANCED
    fn_a, fn_b = (fn, other) if arm is Arm.A else (other, fn)
    return ExperimentConfig(fn_a=fn_a, fn_b=fn_b, **kwargs)


class TestExperimentConfig:
    def test_defaults(self):
        cfg = ExperimentConfig(fn_a="balanced", fn_b="Constant")
        assert cfg.fn_a is FunctionType.BALANCED and cfg.fn_b is FunctionType.CONSTANT
        assert (cfg.noise_p, cfg.detector_efficiency, cfg.shots_per_basis, cfg.seed) == (1.0, 1.0, 10000, 0)

    def test_rejects_out_of_range(self):
        with pytest.raises(POutOfRangeError):
            ExperimentConfig(fn_a="balanced", fn_b="constant", noise_p=1.2)
        with pytest.raises(ConfigError):
            ExperimentConfig(fn_a="balanced", fn_b="constant", detector_efficiency=0)
        with pytest.raises(ConfigError):
            ExperimentConfig(fn_a="balanced", fn_b="constant", shots_per_basis=0)
        with pytest.raises(ConfigError):
            ExperimentConfig(fn_a="balanced", fn_b="constant", seed=-1)
        with pytest.raises(ConfigError):
            ExperimentConfig(fn_a="linear", fn_b="constant")

    def test_seed_accepts_hex_string(self):
        assert ExperimentConfig(fn_a="balanced", fn_b="constant", seed="0x10").seed == 16

    def test_numeric_strings_are_coerced(self):
        cfg = ExperimentConfig(fn_a="balanced", fn_b="constant", noise_p="0.9", detector_efficiency="0.8", shots_per_basis="200")
        assert (cfg.noise_p, cfg.detector_efficiency, cfg.shots_per_basis) == (0.9, 0.8, 200)
        assert isinstance(cfg.shots_per_basis, int)

    @pytest.mark.parametrize(
        "setting", [{"noise_p": "high"}, {"detector_efficiency": [0.9]}, {"shots_per_basis": None}, {"shots_per_basis": 2.5}]
    )
    def test_rejects_wrong_types(self, setting):
        with pytest.raises(ConfigError):
            ExperimentConfig(fn_a="balanced", fn_b="constant", **setting)

    def test_from_config_rejects_unknown_keys(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_config({"fn_a": "balanced", "fn_b": "constant", "shots": 10})

    def test_to_dict(self):
        d = ExperimentConfig(fn_a="balanced", fn_b="constant", seed=3).to_dict()
        assert d == {
            "fn_a": "balanced",
            "fn_b": "constant",
            "noise_p": 1.0,
            "detector_efficiency": 1.0,
            "shots_per_basis": 10000,
            "seed": 3,
        }


class TestSchematic:
    @pytest.mark.parametrize(
        "fn, alpha, detector",
        [
            ("constant", 1, DetectorId.D2),
            ("constant", -1, DetectorId.D2_PRIME),
            ("balanced", 1, DetectorId.D2_PRIME),
            ("balanced", -1, DetectorId.D2),
        ],
    )
    def test_outcome(self, fn, alpha, detector):
        assert schematic_outcome(fn, alpha) is detector

    def test_amplitude_magnitudes(self):
        assert abs(schematic_amplitude("constant", 1)) == pytest.approx(2.0)
        assert abs(schematic_amplitude("constant", -1)) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            schematic_amplitude("constant", 0)


class TestSource:
    def test_singlet(self):
        rho = epr_state()
        assert purity(rho) == pytest.approx(1.0, abs=1e-12)
        assert expectation(kron(SIGMA_Z, SIGMA_Z), rho) == pytest.approx(-1.0, abs=1e-12)
        assert expectation(kron(SIGMA_X, SIGMA_X), rho) == pytest.approx(-1.0, abs=1e-12)

    def test_werner_limits(self):
        rho = epr_state()
        np.testing.assert_allclose(werner(rho, 1.0).matrix, rho.matrix)
        np.testing.assert_allclose(werner(rho, 0.0).matrix, np.eye(4) / 4)

    def test_werner_rejects_bad_input(self):
        with pytest.raises(POutOfRangeError):
            werner(epr_state(), -0.1)
        with pytest.raises(DimMismatchError):
            werner(DensityOperator.maximally_mixed(2), 0.5)


class TestArm:
    def test_labels(self):
        assert [e.label for e in build_arm("balanced", "A")] == ["HWP1", "PBS2", "HWP2", "DP", "HWP3", "HWP(45)"]
        assert [e.label for e in build_arm("balanced", "B")] == ["HWP4", "PBS3", "HWP5", "DP", "HWP6", "HWP(45)"]

    def test_balanced_output(self):
        out = single_photon_output("balanced", "A").amplitudes
        expected = kron(ket("V").amplitudes, (path_ket("a").amplitudes + path_ket("b").amplitudes) / np.sqrt(2))
        assert abs(abs(np.vdot(expected, out)) - 1) < 1e-12

    def test_constant_output(self):
        out = single_photon_output("constant", "A").amplitudes
        expected = kron(ket("H").amplitudes, (path_ket("a").amplitudes + path_ket("b").amplitudes) / np.sqrt(2))
        np.testing.assert_allclose(out, expected, atol=1e-12)

    @pytest.mark.parametrize("arm", ARMS)
    def test_detected_polarization_sign(self, arm):
        assert expectation(SIGMA_Z, detected_polarization("balanced", arm)) == pytest.approx(-1.0, abs=1e-12)
        assert expectation(SIGMA_Z, detected_polarization("constant", arm)) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("arm", ARMS)
    @pytest.mark.parametrize("fn", FUNCTIONS)
    def test_deutsch_gate_matches_element_list(self, fn, arm):
        detected = detected_polarization(fn, arm)
        gate = deutsch_gate(fn).unitary
        assert fidelity_pure(detected, gate @ ket("H").amplitudes) == pytest.approx(1.0, abs=1e-12)
        # x frame: the adapter turns the detected ray into the gate image of |+>
        readout = x_basis_adapter().unitary @ np.linalg.eigh(detected.matrix)[1][:, -1]
        assert abs(np.vdot(gate @ ket("+").amplitudes, readout)) == pytest.approx(1.0, abs=1e-12)


class TestJointOutputState:
    @pytest.mark.parametrize("arm", ARMS)
    @pytest.mark.parametrize("fn", FUNCTIONS)
    def test_ideal_target(self, fn, arm):
        rho = joint_output_state(cfg_for(fn, arm), arm)
        assert fidelity_pure(rho, target_state(fn)) == pytest.approx(1.0, abs=1e-12)
        assert purity(rho) == pytest.approx(1.0, abs=1e-10)

    def test_constant_target_sign(self):
        psi_minus = (kron(ket("H").amplitudes, ket("V").amplitudes) - kron(ket("V").amplitudes, ket("H").amplitudes)) / np.sqrt(2)
        rho = joint_output_state(cfg_for(FunctionType.CONSTANT, Arm.A), Arm.A)
        assert fidelity_pure(rho, psi_minus) == pytest.approx(1.0, abs=1e-12)

    def test_fully_depolarized(self):
        rho = joint_output_state(cfg_for(FunctionType.BALANCED, Arm.A, noise_p=0.0), Arm.A)
        np.testing.assert_allclose(rho.matrix, np.eye(4) / 4, atol=1e-12)

    @pytest.mark.parametrize("arm", ARMS)
    @pytest.mark.parametrize("fn", FUNCTIONS)
    def test_x_z_equivalence(self, fn, arm):
        for p in P_GRID + [0.0, 0.5]:
            analysis = exact_correlators(cfg_for(fn, arm, noise_p=p), arm)
            assert analysis.xx == pytest.approx(analysis.zz, abs=1e-12)
            sign = 1 if fn is FunctionType.BALANCED else -1
            assert analysis.zz == pytest.approx(sign * p, abs=1e-12)

    def test_correlation_monotone_in_p(self):
        values = [
            abs(exact_correlators(cfg_for(FunctionType.BALANCED, Arm.A, noise_p=p / 10), Arm.A).zz) for p in range(11)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_werner_fidelity(self):
        analysis = exact_correlators(cfg_for(FunctionType.BALANCED, Arm.A, noise_p=0.8), Arm.A)
        assert analysis.fidelity == pytest.approx(0.85, abs=1e-12)
        assert analysis.bell == pytest.approx(0.8 * math.sqrt(2), abs=1e-12)

    def test_outcome_distribution_x_basis(self):
        rho = joint_output_state(cfg_for(FunctionType.BALANCED, Arm.A), Arm.A)
        np.testing.assert_allclose(outcome_distribution(rho, Basis.X), [0.5, 0, 0, 0.5], atol=1e-12)
        np.testing.assert_allclose(outcome_distribution(rho, Basis.Z), [0.5, 0, 0, 0.5], atol=1e-12)


class TestSampleRecords:
    @pytest.mark.parametrize("fn_a", FUNCTIONS)
    @pytest.mark.parametrize("fn_b", FUNCTIONS)
    def test_ideal_determinism(self, fn_a, fn_b):
        cfg = ExperimentConfig(fn_a=fn_a, fn_b=fn_b, shots_per_basis=10000, seed=11)
        records = sample_records(cfg)
        assert len(records) == 4 * 10000
        for arm in ARMS:
            want = 1 if cfg.fn(arm) is FunctionType.BALANCED else -1
            for basis in Basis:
                products = records.products(arm, basis)
                assert products.size == 10000
                assert np.all(products == want)

    def test_block_layout(self):
        records = sample_records(ExperimentConfig(fn_a="balanced", fn_b="constant", shots_per_basis=5))
        blocks = [(r.arm, r.basis) for r in records]
        assert blocks == [(Arm.A, Basis.Z)] * 5 + [(Arm.A, Basis.X)] * 5 + [(Arm.B, Basis.Z)] * 5 + [(Arm.B, Basis.X)] * 5
        assert [r.shot_index for r in records][:5] == list(range(5))

    def test_seed_determinism(self):
        cfg = ExperimentConfig(fn_a="balanced", fn_b="constant", noise_p=0.7, detector_efficiency=0.8, shots_per_basis=2000, seed=5)
        assert sample_records(cfg).same_as(sample_records(cfg))
        other = ExperimentConfig(fn_a="balanced", fn_b="constant", noise_p=0.7, detector_efficiency=0.8, shots_per_basis=2000, seed=6)
        assert not sample_records(cfg).same_as(sample_records(other))

    def test_depolarized_mean_is_zero(self):
        n = 100000
        records = sample_records(ExperimentConfig(fn_a="balanced", fn_b="constant", noise_p=0.0, shots_per_basis=n, seed=2))
        for arm in ARMS:
            for basis in Basis:
                assert abs(records.products(arm, basis).mean()) < 5 / math.sqrt(n)

    def test_sampled_x_z_agree(self):
        n = 100000
        records = sample_records(ExperimentConfig(fn_a="balanced", fn_b="constant", noise_p=0.8, shots_per_basis=n, seed=9))
        for arm in ARMS:
            zz, xx = records.products(arm, Basis.Z), records.products(arm, Basis.X)
            se = math.sqrt(zz.var(ddof=1) / zz.size + xx.var(ddof=1) / xx.size)
            assert abs(zz.mean() - xx.mean()) < 5 * se

    def test_inefficiency_drops_shots(self):
        eta, n = 0.7, 50000
        records = sample_records(ExperimentConfig(fn_a="balanced", fn_b="balanced", detector_efficiency=eta, shots_per_basis=n, seed=4))
        kept = records.kept()
        fraction = len(kept) / len(records)
        assert abs(fraction - eta**2) < 5 * math.sqrt(eta**2 * (1 - eta**2) / len(records))
        # surviving shots keep the ideal correlation
        assert np.all(kept.first.astype(int) * kept.second == 1)
        dropped = [r for r in records[:200] if r.dropped]
        assert dropped and all(r.outcome_first is None or r.outcome_second is None for r in dropped)


class TestRecordSet:
    def test_sequence_behaviour(self):
        records = [
            MeasurementRecord("A", "z", 1, -1, 0),
            MeasurementRecord("A", "x", None, 1, 0),
            MeasurementRecord("B", "z", -1, -1, 0),
        ]
        rs = RecordSet.from_records(records)
        assert len(rs) == 3
        assert list(rs) == records
        assert rs[-1] == records[-1]
        assert len(rs[1:]) == 2
        assert len(rs.kept()) == 2
        np.testing.assert_array_equal(rs.products("A", "z"), [-1])
        with pytest.raises(IndexError):
            rs[3]

    def test_record_validation(self):
        with pytest.raises(ValueError):
            MeasurementRecord("A", "z", 0, 1, 0)
        with pytest.raises(AssertionError):
            MeasurementRecord("A", "z", None, 1, 0).product

    def test_csv_format(self, tmp_path):
        rs = RecordSet.from_records([MeasurementRecord("A", "z", 1, -1, 0), MeasurementRecord("B", "x", None, 1, 7)])
        path = tmp_path / "records.csv"
        rs.to_csv(path)
        assert path.read_text() == "shot,arm,basis,d_first,d_second\n0,A,z,+1,-1\n7,B,x,,+1\n"
        assert RecordSet.from_csv(path).same_as(rs)

    def test_csv_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ConfigError):
            RecordSet.from_csv(path)

    def test_csv_is_reproducible(self, tmp_path):
        cfg = ExperimentConfig(fn_a="constant", fn_b="balanced", noise_p=0.9, detector_efficiency=0.9, shots_per_basis=500, seed=1)
        sample_records(cfg).to_csv(tmp_path / "one.csv")
        sample_records(cfg).to_csv(tmp_path / "two.csv")
        assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()
