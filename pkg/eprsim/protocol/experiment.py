"""Two-photon Deutsch experiment: source, arm circuits, detected states and sampling.

Each EPR pair feeds one arm. The arm's run is conditioned on the source term routed to it,
and the arm's two detectors form a two-qubit register (partner photon first).
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, NamedTuple

import numpy as np

from eprsim.errors import ConfigError, DimMismatchError, POutOfRangeError
from eprsim.linalg import (
    DensityOperator,
    StateVector,
    apply,
    expectation,
    fidelity_pure,
    kron,
    partial_trace,
    projector,
    purity,
)
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
    path_ket,
    pbs,
    x_basis_adapter,
)
from eprsim.optics.elements import PATH_B
from eprsim.protocol.records import RecordSet
from eprsim.types import Arm, Basis, DetectorId, FunctionType
from eprsim.utils import block_seed, parse_seed

logger = logging.getLogger("eprsim")

# (first, second) detector outcomes for the computational-basis index |HH>, |HV>, |VH>, |VV>
OUTCOMES = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=np.int8)

_ARM_LABELS = {
    Arm.A: ("HWP1", "PBS2", "HWP2", "DP", "HWP3", "HWP(45)"),
    Arm.B: ("HWP4", "PBS3", "HWP5", "DP", "HWP6", "HWP(45)"),
}

_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Args:
        fn_a: hidden function of arm A
        fn_b: hidden function of arm B
        noise_p: Werner parameter of the source, 1 is a pure singlet
        detector_efficiency: probability that a single detector fires, in (0, 1]
        shots_per_basis: shots drawn per arm and per basis setting
        seed: master seed, unsigned 64-bit
    """

    fn_a: FunctionType
    fn_b: FunctionType
    noise_p: float = 1.0
    detector_efficiency: float = 1.0
    shots_per_basis: int = 10000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "fn_a", FunctionType.parse(self.fn_a))
        object.__setattr__(self, "fn_b", FunctionType.parse(self.fn_b))
        for name in ("noise_p", "detector_efficiency", "shots_per_basis"):
            value = getattr(self, name)
            try:
                object.__setattr__(self, name, float(value))
            except (TypeError, ValueError):
                raise ConfigError(f"{name} must be a number, got {value!r}")
        if not 0.0 <= self.noise_p <= 1.0:
            raise POutOfRangeError(f"noise_p must lie in [0, 1], got {self.noise_p}")
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise ConfigError(f"detector_efficiency must lie in (0, 1], got {self.detector_efficiency}")
        if not self.shots_per_basis.is_integer() or self.shots_per_basis < 1:
            raise ConfigError(f"shots_per_basis must be a positive integer, got {self.shots_per_basis}")
        object.__setattr__(self, "shots_per_basis", int(self.shots_per_basis))
        try:
            object.__setattr__(self, "seed", parse_seed(self.seed))
        except (TypeError, ValueError):
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    @classmethod
    def from_config(cls, config: Dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(config) - known
        if unknown:
            raise ConfigError(f"Unknown experiment settings: {', '.join(sorted(unknown))}")
        return cls(**config)

    def fn(self, arm: Arm | str) -> FunctionType:
        return self.fn_a if Arm.parse(arm) is Arm.A else self.fn_b

    def to_dict(self) -> Dict:
        d = asdict(self)
        d["fn_a"], d["fn_b"] = self.fn_a.value, self.fn_b.value
        return d


def epr_state() -> DensityOperator:
    """Singlet (|VH> - |HV>)/sqrt2 on (photon 1, photon 1')."""
    h, v = ket("H").amplitudes, ket("V").amplitudes
    psi = StateVector((kron(v, h) - kron(h, v)) / np.sqrt(2))
    return DensityOperator.from_state(psi)


def werner(rho_pure: DensityOperator, p: float) -> DensityOperator:
    """p * rho + (1 - p) * I/4."""
    if rho_pure.dim != 4:
        raise DimMismatchError(f"Werner noise is defined on two qubits, got dimension {rho_pure.dim}")
    if not 0.0 <= p <= 1.0:
        raise POutOfRangeError(f"Werner parameter must lie in [0, 1], got {p}")
    return DensityOperator(p * rho_pure.matrix + (1 - p) * np.eye(4, dtype=complex) / 4)


def schematic_amplitude(fn: FunctionType | str, alpha: int) -> complex:
    """Amplitude on |1> of H[X|I]H|1> + alpha X H[X|I]H|0> in the logical basis (|0>, |1>)."""
    if alpha not in (1, -1):
        raise ValueError(f"alpha must be +1 or -1, got {alpha}")
    oracle = SIGMA_X if FunctionType.parse(fn) is FunctionType.BALANCED else np.eye(2, dtype=complex)
    zero, one = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    step = HADAMARD @ oracle @ HADAMARD
    out = step @ one + alpha * SIGMA_X @ step @ zero
    assert abs(out[0]) < 1e-12, f"Schematic output leaked onto |0>: {out}"
    return complex(out[1])


def schematic_outcome(fn: FunctionType | str, alpha: int) -> DetectorId:
    """D2 fires when the two branches interfere constructively, D2' when they cancel."""
    if abs(schematic_amplitude(fn, alpha)) > 1e-12:
        return DetectorId.D2
    return DetectorId.D2_PRIME


def build_arm(fn: FunctionType | str, arm: Arm | str) -> List[OpticalElement]:
    """Element list of one arm on the (polarization, path) register of the circuit photon.

    Hadamard plate, PBS, Hadamard plate, dove-prism oracle, Hadamard plate, then a
    45-degree plate in path b before the detector.
    """
    fn, arm = FunctionType.parse(fn), Arm.parse(arm)
    first, splitter, second, prism, third, swap = _ARM_LABELS[arm]
    elements = [
        hwp(22.5).named(first),
        pbs().named(splitter),
        hwp(22.5).named(second),
        dove_cnot(fn).named(prism),
        hwp(22.5).named(third),
        hwp(45.0, path=PATH_B).named(swap),
    ]
    logger.info(f"Arm {arm.value} ({fn.value}): {' -> '.join(e.label for e in elements)}")
    return elements


def single_photon_output(fn: FunctionType | str, arm: Arm | str) -> StateVector:
    """(polarization, path) state after the arm for the post-selected |H> photon entering on path 2."""
    psi = StateVector(kron(ket("H").amplitudes, path_ket("2").amplitudes))
    return apply(compose(build_arm(fn, arm), 2), psi)


def detected_polarization(fn: FunctionType | str, arm: Arm | str) -> DensityOperator:
    """Polarization seen by the arm's second detector, which merges paths a and b."""
    return partial_trace(DensityOperator.from_state(single_photon_output(fn, arm)), keep=[0])


def target_state(fn: FunctionType | str) -> StateVector:
    """Ideal detector-pair state: Phi+ for a balanced oracle, Psi- = (|HV> - |VH>)/sqrt2 for a constant one."""
    h, v = ket("H").amplitudes, ket("V").amplitudes
    if FunctionType.parse(fn) is FunctionType.BALANCED:
        return StateVector((kron(h, h) + kron(v, v)) / np.sqrt(2))
    return StateVector((kron(h, v) - kron(v, h)) / np.sqrt(2))


def joint_output_state(cfg: ExperimentConfig, arm: Arm | str) -> DensityOperator:
    """Two-qubit state on the arm's detectors (partner photon first).

    Register during evolution: (partner polarization, photon polarization, photon path).
    The photon carries the arm's Deutsch gate; the path mode is traced out at the detector.
    """
    arm = Arm.parse(arm)
    fn = cfg.fn(arm)
    source = werner(epr_state(), cfg.noise_p)
    # partner photon 1' to the front
    pair = apply(_SWAP, source)
    register = DensityOperator(kron(pair.matrix, projector(path_ket("a"))))
    register = apply(deutsch_gate(fn).on(1).embedded(3), register)
    rho = partial_trace(register, keep=[0, 1])
    logger.info(f"Arm {arm.value} ({fn.value}, p={cfg.noise_p}): purity {purity(rho):.6f}")
    return rho


def basis_rotation(basis: Basis | str) -> np.ndarray:
    """Pair unitary that turns a `basis` measurement into a z measurement."""
    if Basis.parse(basis) is Basis.Z:
        return np.eye(4, dtype=complex)
    adapter = x_basis_adapter().unitary
    return kron(adapter, adapter)


def outcome_distribution(rho: DensityOperator, basis: Basis | str) -> np.ndarray:
    """Born probabilities of the four outcome pairs, in `OUTCOMES` order."""
    rotated = apply(basis_rotation(basis), rho)
    probs = np.clip(np.real(np.diag(rotated.matrix)), 0.0, None)
    return probs / probs.sum()


class ExactAnalysis(NamedTuple):
    arm: Arm
    fn: FunctionType
    zz: float
    xx: float
    bell: float
    fidelity: float
    purity: float


def exact_correlators(cfg: ExperimentConfig, arm: Arm | str) -> ExactAnalysis:
    arm = Arm.parse(arm)
    rho = joint_output_state(cfg, arm)
    zz = expectation(kron(SIGMA_Z, SIGMA_Z), rho)
    xx = expectation(kron(SIGMA_X, SIGMA_X), rho)
    return ExactAnalysis(
        arm=arm,
        fn=cfg.fn(arm),
        zz=zz,
        xx=xx,
        bell=(xx + zz) * np.sqrt(0.5),
        fidelity=fidelity_pure(rho, target_state(cfg.fn(arm))),
        purity=purity(rho),
    )


def sample_block(
    rho: DensityOperator, arm: Arm, basis: Basis, shots: int, efficiency: float, seed: int
) -> RecordSet:
    rng = np.random.default_rng(block_seed(seed, arm.index, basis.index))
    index = rng.choice(len(OUTCOMES), size=shots, p=outcome_distribution(rho, basis))
    outcomes = OUTCOMES[index]
    if efficiency < 1.0:
        fired = rng.random((shots, 2)) < efficiency
        outcomes = np.where(fired, outcomes, 0).astype(np.int8)
    return RecordSet.block(arm, basis, outcomes)


def sample_records(cfg: ExperimentConfig) -> RecordSet:
    """Finite-shot detector records for both arms and both basis settings.

    Blocks come in the order (A, z), (A, x), (B, z), (B, x); each draws from its own
    seed-derived stream, so the result depends only on `cfg`.
    """
    blocks = []
    for arm in (Arm.A, Arm.B):
        rho = joint_output_state(cfg, arm)
        for basis in (Basis.Z, Basis.X):
            block = sample_block(rho, arm, basis, cfg.shots_per_basis, cfg.detector_efficiency, cfg.seed)
            logger.info(
                f"Sampled arm {arm.value} basis {basis.value}: "
                f"{len(block) - int(block.dropped_mask.sum())} kept, {int(block.dropped_mask.sum())} dropped"
            )
            blocks.append(block)
    return RecordSet.concat(blocks)
