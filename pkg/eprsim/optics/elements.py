"""Jones-calculus models of the optical elements of the interferometer.

Polarization qubit: basis index 0 is |H>, index 1 is |V>. The Deutsch truth values are
assigned the other way round (|H> <-> 1, |V> <-> 0); see `truth_value`.
Path qubit: index 0 is path 2 (later a), index 1 is path 2' (later b).
Two-qubit elements act on (polarization, path) in that order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Tuple

import numpy as np

from eprsim.errors import BadIndexError, DimMismatchError, NonUnitaryError, UnknownDetectorError
from eprsim.linalg import ComplexMatrix, StateVector, embed, is_unitary, kron
from eprsim.linalg.core import as_matrix
from eprsim.types import Basis, DetectorId, FunctionType

logger = logging.getLogger("eprsim")

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

H, V = 0, 1
PATH_A, PATH_B = 0, 1

_POLARIZATION_KETS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    # x basis: |H>_x = (|H>+|V>)/sqrt2, |V>_x = (|H>-|V>)/sqrt2
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
}
_PATH_LABELS = {"2": PATH_A, "a": PATH_A, "2'": PATH_B, "b": PATH_B}


def ket(label: str) -> StateVector:
    """Polarization ket: "H", "V", or "+"/"-" for |H>_x/|V>_x."""
    try:
        return StateVector(_POLARIZATION_KETS[label])
    except KeyError:
        raise ValueError(f"Unknown polarization label '{label}'")


def path_ket(label: str) -> StateVector:
    try:
        index = _PATH_LABELS[label]
    except KeyError:
        raise ValueError(f"Unknown path label '{label}'")
    amps = np.zeros(2, dtype=complex)
    amps[index] = 1
    return StateVector(amps)


def truth_value(label: str) -> int:
    if label == "H":
        return 1
    if label == "V":
        return 0
    raise ValueError(f"Truth values are defined for 'H' and 'V' only, got '{label}'")


@dataclass(frozen=True, eq=False)
class OpticalElement:
    """
    Args:
        kind: "HWP", "PBS", "DoveCNOT", "XAdapter" or "DeutschGate"
        unitary: exact unitary on the qubits in `acts_on`, first listed qubit leftmost
        acts_on: register indices the element touches
        label: name on the optical table, e.g. "HWP2"
        angle: plate angle in degrees, for wave plates
        fn: oracle the element implements, for dove prisms and Deutsch gates
        path: path mode a path-local plate sits in
    """

    kind: str
    unitary: np.ndarray
    acts_on: Tuple[int, ...]
    label: str = ""
    angle: Optional[float] = None
    fn: Optional[FunctionType] = None
    path: Optional[int] = None

    def __post_init__(self):
        u = as_matrix(self.unitary)
        acts_on = tuple(int(q) for q in self.acts_on)
        if len(set(acts_on)) != len(acts_on) or any(q < 0 for q in acts_on):
            raise BadIndexError(f"{self.kind}: invalid qubit indices {acts_on}")
        if u.shape != (2 ** len(acts_on), 2 ** len(acts_on)):
            raise DimMismatchError(f"{self.kind}: matrix of shape {u.shape} cannot act on {len(acts_on)} qubits")
        if not is_unitary(u):
            raise NonUnitaryError(f"{self.kind}: matrix is not unitary within tolerance")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "acts_on", acts_on)

    def on(self, *qubits: int) -> OpticalElement:
        """The same element placed on other register qubits."""
        return replace(self, acts_on=tuple(qubits))

    def named(self, label: str) -> OpticalElement:
        return replace(self, label=label)

    def embedded(self, n_qubits: int) -> ComplexMatrix:
        if max(self.acts_on) >= n_qubits:
            raise BadIndexError(f"{self.label or self.kind} acts on {self.acts_on}, register has {n_qubits} qubits")
        return embed(self.unitary, self.acts_on, n_qubits)

    def __repr__(self):
        details = ", ".join(
            f"{k}={v}"
            for k, v in (("label", self.label), ("angle", self.angle), ("fn", self.fn and self.fn.value), ("path", self.path))
            if v not in (None, "")
        )
        return f"OpticalElement({self.kind}, acts_on={self.acts_on}{', ' + details if details else ''})"


def jones_hwp(theta: float) -> ComplexMatrix:
    """Half-wave plate with fast axis at `theta` degrees, no global phase."""
    if not np.isfinite(theta):
        raise ValueError(f"Plate angle must be finite, got {theta}")
    c, s = np.cos(np.deg2rad(2 * theta)), np.sin(np.deg2rad(2 * theta))
    return np.array([[c, s], [s, -c]], dtype=complex)


def hwp(theta: float, path: Optional[int] = None) -> OpticalElement:
    """
    Half-wave plate at `theta` degrees: [[cos2t, sin2t], [sin2t, -cos2t]] on (|H>, |V>).

    Args:
        theta: fast-axis angle in degrees; 22.5 is a Hadamard, 45 swaps H and V
        path: if given, the plate sits in that path mode only and the element acts on
            (polarization, path)
    """
    jones = jones_hwp(theta)
    if path is None:
        return OpticalElement("HWP", jones, (0,), angle=float(theta))
    if path not in (PATH_A, PATH_B):
        raise BadIndexError(f"Path mode must be {PATH_A} or {PATH_B}, got {path}")
    inside = np.zeros((2, 2), dtype=complex)
    inside[path, path] = 1
    outside = np.eye(2, dtype=complex) - inside
    return OpticalElement("HWP", kron(jones, inside) + kron(IDENTITY2, outside), (0, 1), angle=float(theta), path=path)


def _polarization_controlled_path_not() -> ComplexMatrix:
    # |H,p> -> |H,p>, |V,p> -> |V,1-p>
    u = np.zeros((4, 4), dtype=complex)
    for pol in (H, V):
        for p in (PATH_A, PATH_B):
            out = p ^ 1 if pol == V else p
            u[2 * pol + out, 2 * pol + p] = 1
    return u


def pbs() -> OpticalElement:
    """Polarizing beam splitter on (polarization, path): H is transmitted, V is reflected to the other path."""
    return OpticalElement("PBS", _polarization_controlled_path_not(), (0, 1))


def dove_cnot(fn: FunctionType | str) -> OpticalElement:
    """
    Dove-prism oracle on (polarization, path).

    Balanced: H keeps its path (2 -> a, 2' -> b), V swaps it (2 -> b, 2' -> a).
    Constant: paths are kept for both polarizations.
    """
    fn = FunctionType.parse(fn)
    if fn is FunctionType.BALANCED:
        u = _polarization_controlled_path_not()
    else:
        u = np.eye(4, dtype=complex)
    return OpticalElement("DoveCNOT", u, (0, 1), fn=fn)


def x_basis_adapter() -> OpticalElement:
    """45-degree polarizer plus half-wave plate in front of a detector: maps |H>_x -> |H>, |V>_x -> |V>."""
    return OpticalElement("XAdapter", HADAMARD, (0,), label="POL45+HWP")


def deutsch_gate(fn: FunctionType | str) -> OpticalElement:
    """Net polarization action of an arm on its detected photon.

    Constant oracles leave the polarization alone; balanced ones rotate it by
    HWP(45) . HWP(0) = sigma_x sigma_z, which sends the singlet to Phi+.
    It stands in for the full element list of `protocol.build_arm` with the path traced out;
    `--selftest` (deutsch-gate checks) compares the two in the z and x frames.
    """
    fn = FunctionType.parse(fn)
    if fn is FunctionType.BALANCED:
        u = compose([hwp(0.0), hwp(45.0)], 1)
    else:
        u = IDENTITY2
    return OpticalElement("DeutschGate", u, (0,), fn=fn)


def compose(elements: Iterable[OpticalElement], n_qubits: int) -> ComplexMatrix:
    """Unitary of the elements applied in order (first element acts first)."""
    u = np.eye(2**n_qubits, dtype=complex)
    for element in elements:
        u = element.embedded(n_qubits) @ u
    return u


_DETECTOR_POSITION = {DetectorId.D1: 0, DetectorId.D3: 0, DetectorId.D2: 1, DetectorId.D4: 1}


def observable(detector: DetectorId | str, basis: Basis | str) -> ComplexMatrix:
    """Pauli observable of one detector, embedded in its arm's two-detector register.

    D1 and D3 read the first (partner-photon) qubit, D2 and D4 the second.
    """
    detector = DetectorId.parse(detector)
    if detector not in _DETECTOR_POSITION:
        raise UnknownDetectorError(f"Detector {detector.value} has no polarization observable")
    pauli = SIGMA_Z if Basis.parse(basis) is Basis.Z else SIGMA_X
    return embed(pauli, (_DETECTOR_POSITION[detector],), 2)
