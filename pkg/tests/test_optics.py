import numpy as np
import pytest

from eprsim.errors import BadIndexError, NonUnitaryError, UnknownDetectorError
from eprsim.linalg import StateVector, apply, is_hermitian, is_unitary, kron
from eprsim.optics import (
    HADAMARD,
    SIGMA_X,
    SIGMA_Z,
    OpticalElement,
    compose,
    deutsch_gate,
    dove_cnot,
    hwp,
    ket,
    observable,
    path_ket,
    pbs,
    truth_value,
    x_basis_adapter,
)
from eprsim.types import Basis, DetectorId, FunctionType

I2 = np.eye(2)


def pol_path(pol: str, path: str) -> np.ndarray:
    return kron(ket(pol).amplitudes, path_ket(path).amplitudes)


def is_permutation(u: np.ndarray) -> bool:
    return bool(np.all(np.isin(u, [0, 1])) and np.all(u.sum(axis=0) == 1) and np.all(u.sum(axis=1) == 1))


class TestConventions:
    def test_truth_values(self):
        assert truth_value("H") == 1
        assert truth_value("V") == 0
        with pytest.raises(ValueError):
            truth_value("+")

    def test_x_basis_kets(self):
        np.testing.assert_allclose(ket("+").amplitudes, np.array([1, 1]) / np.sqrt(2))
        np.testing.assert_allclose(ket("-").amplitudes, np.array([1, -1]) / np.sqrt(2))

    def test_path_labels(self):
        np.testing.assert_array_equal(path_ket("2").amplitudes, path_ket("a").amplitudes)
        np.testing.assert_array_equal(path_ket("2'").amplitudes, path_ket("b").amplitudes)
        with pytest.raises(ValueError):
            path_ket("c")


class TestHWP:
    def test_hadamard_plate_on_h(self):
        np.testing.assert_allclose(apply(hwp(22.5).unitary, ket("H")).amplitudes, ket("+").amplitudes, atol=1e-12)

    def test_hadamard_plate_sign_on_v(self):
        np.testing.assert_allclose(apply(hwp(22.5).unitary, ket("V")).amplitudes, ket("-").amplitudes, atol=1e-12)

    def test_45_degrees_swaps(self):
        np.testing.assert_allclose(apply(hwp(45).unitary, ket("H")).amplitudes, ket("V").amplitudes, atol=1e-12)

    def test_zero_degrees_is_sigma_z(self):
        np.testing.assert_allclose(hwp(0).unitary, np.diag([1, -1]), atol=1e-15)

    def test_22_5_is_hadamard(self):
        np.testing.assert_allclose(hwp(22.5).unitary, HADAMARD, atol=1e-12)

    def test_random_angles(self, rng):
        for theta in rng.uniform(-180, 180, size=100):
            u = hwp(theta).unitary
            assert is_unitary(u)
            assert is_hermitian(u)
            np.testing.assert_allclose(u @ u, I2, atol=1e-12)

    def test_rejects_non_finite_angle(self):
        with pytest.raises(ValueError):
            hwp(float("nan"))

    def test_path_local_plate(self):
        plate = hwp(45, path=1)
        assert plate.acts_on == (0, 1)
        np.testing.assert_allclose(plate.unitary @ pol_path("H", "b"), pol_path("V", "b"), atol=1e-12)
        np.testing.assert_allclose(plate.unitary @ pol_path("H", "a"), pol_path("H", "a"), atol=1e-12)

    def test_path_local_plate_rejects_bad_path(self):
        with pytest.raises(BadIndexError):
            hwp(45, path=2)


class TestPBS:
    def test_diagonal_input_splits(self):
        out = pbs().unitary @ pol_path("+", "2")
        expected = (pol_path("H", "2") + pol_path("V", "2'")) / np.sqrt(2)
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_h_is_transmitted(self):
        np.testing.assert_allclose(pbs().unitary @ pol_path("H", "2"), pol_path("H", "2"))

    def test_is_permutation(self):
        assert is_permutation(pbs().unitary.real)
        assert is_unitary(pbs().unitary)


class TestDoveCNOT:
    def test_balanced_routes_v_across(self):
        u = dove_cnot("balanced").unitary
        np.testing.assert_allclose(u @ pol_path("V", "2"), pol_path("V", "b"))
        np.testing.assert_allclose(u @ pol_path("V", "2'"), pol_path("V", "a"))
        np.testing.assert_allclose(u @ pol_path("H", "2"), pol_path("H", "a"))

    def test_balanced_on_pre_prism_state(self):
        # HWP2 output: (|H>_2 + |H>_2' + |V>_2 - |V>_2')/2
        before = (pol_path("H", "2") + pol_path("V", "2") + pol_path("H", "2'") - pol_path("V", "2'")) / 2
        after = dove_cnot(FunctionType.BALANCED).unitary @ before
        expected = (pol_path("H", "a") + pol_path("V", "b") + pol_path("H", "b") - pol_path("V", "a")) / 2
        np.testing.assert_allclose(after, expected, atol=1e-12)

    def test_constant_is_identity(self):
        np.testing.assert_array_equal(dove_cnot("constant").unitary, np.eye(4))

    def test_balanced_is_involution(self):
        u = dove_cnot("balanced").unitary
        np.testing.assert_array_equal(u @ u, np.eye(4))
        assert is_permutation(u.real)


class TestXBasisAdapter:
    def test_maps_x_kets_to_z(self):
        u = x_basis_adapter().unitary
        np.testing.assert_allclose(u @ ket("+").amplitudes, ket("H").amplitudes, atol=1e-12)
        np.testing.assert_allclose(u @ ket("-").amplitudes, ket("V").amplitudes, atol=1e-12)

    def test_involution(self):
        u = x_basis_adapter().unitary
        np.testing.assert_allclose(u @ u, I2, atol=1e-12)

    def test_conjugates_sigma_z_to_sigma_x(self):
        u = x_basis_adapter().unitary
        np.testing.assert_allclose(u @ SIGMA_Z @ u.conj().T, SIGMA_X, atol=1e-12)

    def test_singlet_keeps_its_form(self):
        singlet = StateVector((kron(ket("V").amplitudes, ket("H").amplitudes) - kron(ket("H").amplitudes, ket("V").amplitudes)) / np.sqrt(2))
        u = x_basis_adapter().unitary
        rotated = apply(kron(u, u), singlet)
        np.testing.assert_allclose(np.abs(np.vdot(rotated.amplitudes, singlet.amplitudes)), 1.0, atol=1e-12)
        np.testing.assert_allclose(rotated.amplitudes, -singlet.amplitudes, atol=1e-12)


class TestObservable:
    def test_d1_z_on_v(self):
        obs = observable(DetectorId.D1, Basis.Z)
        state = kron(ket("V").amplitudes, ket("H").amplitudes)
        np.testing.assert_allclose(obs @ state, -state)

    def test_d2_x_is_sigma_x(self):
        np.testing.assert_allclose(observable("D2", "x"), kron(I2, SIGMA_X))
        np.testing.assert_allclose(observable("D4", "x"), kron(I2, SIGMA_X))
        np.testing.assert_allclose(observable("D3", "z"), kron(SIGMA_Z, I2))

    def test_hermitian_with_unit_eigenvalues(self):
        for detector in ("D1", "D2", "D3", "D4"):
            for basis in ("z", "x"):
                obs = observable(detector, basis)
                assert is_hermitian(obs)
                np.testing.assert_allclose(np.linalg.eigvalsh(obs), [-1, -1, 1, 1], atol=1e-12)

    def test_unknown_detector(self):
        with pytest.raises(UnknownDetectorError):
            observable("D5", "z")
        with pytest.raises(UnknownDetectorError):
            observable(DetectorId.D2_PRIME, "z")


class TestElements:
    def test_rejects_non_unitary(self):
        with pytest.raises(NonUnitaryError):
            OpticalElement("HWP", np.diag([1, 2]), (0,))

    def test_rejects_repeated_qubits(self):
        with pytest.raises(BadIndexError):
            OpticalElement("PBS", np.eye(4), (0, 0))

    def test_compose_orders_first_element_first(self):
        # HWP(0) then HWP(45): X . Z
        np.testing.assert_allclose(compose([hwp(0), hwp(45)], 1), SIGMA_X @ SIGMA_Z, atol=1e-12)

    def test_compose_on_register(self):
        u = compose([hwp(45).on(1), pbs()], 2)
        np.testing.assert_allclose(u, pbs().unitary @ kron(I2, hwp(45).unitary), atol=1e-12)

    def test_deutsch_gate(self):
        np.testing.assert_allclose(deutsch_gate("constant").unitary, I2)
        np.testing.assert_allclose(deutsch_gate("balanced").unitary, SIGMA_X @ SIGMA_Z, atol=1e-12)

    def test_embedded_rejects_small_register(self):
        with pytest.raises(BadIndexError):
            hwp(22.5).on(3).embedded(2)

    def test_repr_names_label(self):
        assert "HWP2" in repr(hwp(22.5).named("HWP2"))
