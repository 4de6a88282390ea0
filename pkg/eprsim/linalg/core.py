"""Dense complex linear algebra for small qubit registers.

Register convention: qubit 0 is the leftmost tensor factor, so for a register
(q0, q1, ..., qn-1) the basis index of |b0 b1 ... bn-1> is b0*2^(n-1) + ... + bn-1.
Every operator and state in the package follows it.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from eprsim.errors import (
    BadIndexError,
    DimMismatchError,
    InvalidStateError,
    NonHermitianError,
    NonUnitaryError,
)

logger = logging.getLogger("eprsim")

ComplexMatrix = np.ndarray

STRUCTURAL_TOL = 1e-12
POSITIVITY_TOL = 1e-10
IMAG_TOL = 1e-10
MAX_DIM = 2**20


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def as_matrix(a) -> ComplexMatrix:
    """Return `a` as a finite complex 2-D array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimMismatchError(f"Expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("Matrix has non-finite entries")
    return m


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def dagger(a: ComplexMatrix) -> ComplexMatrix:
    return np.conj(np.asarray(a)).T


def is_unitary(u: ComplexMatrix, tol: float = STRUCTURAL_TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))) <= tol)


def is_hermitian(a: ComplexMatrix, tol: float = STRUCTURAL_TOL) -> bool:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - dagger(a))) <= tol)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if not _is_power_of_two(amps.size):
            raise DimMismatchError(f"State dimension {amps.size} is not a power of 2")
        if not np.all(np.isfinite(amps)):
            raise InvalidStateError("State has non-finite amplitudes")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > STRUCTURAL_TOL:
            raise InvalidStateError(f"State norm^2 {norm!r} differs from 1 by more than {STRUCTURAL_TOL}")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex], normalize: bool = False) -> StateVector:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise InvalidStateError("Cannot normalize the zero vector")
            amps = amps / norm
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1] or not _is_power_of_two(m.shape[0]):
            raise DimMismatchError(f"Density operator must be square with power-of-2 dimension, got {m.shape}")
        if not is_hermitian(m):
            raise InvalidStateError(f"Density operator is not Hermitian within {STRUCTURAL_TOL}")
        trace = np.trace(m).real
        if abs(trace - 1.0) > STRUCTURAL_TOL:
            raise InvalidStateError(f"Density operator trace {trace!r} differs from 1 by more than {STRUCTURAL_TOL}")
        lowest = float(np.min(np.linalg.eigvalsh(m)))
        if lowest < -POSITIVITY_TOL:
            raise InvalidStateError(f"Density operator has eigenvalue {lowest!r} below -{POSITIVITY_TOL}")
        object.__setattr__(self, "matrix", _readonly(m))

    @classmethod
    def from_state(cls, psi: StateVector) -> DensityOperator:
        return cls(projector(psi))

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityOperator:
        return cls(np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1


State = Union[StateVector, DensityOperator]


def projector(psi: Union[StateVector, np.ndarray]) -> ComplexMatrix:
    v = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(v, np.conj(v))


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product, `a` as the left (lower-index) factor.

    Raises:
        DimMismatchError: if the product would exceed 2^20 rows or columns.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("kron operands must be finite")
    rows = (a.shape[0] if a.ndim else 1) * (b.shape[0] if b.ndim else 1)
    cols = (a.shape[1] if a.ndim == 2 else 1) * (b.shape[1] if b.ndim == 2 else 1)
    if max(rows, cols) > MAX_DIM:
        raise DimMismatchError(f"kron result {rows}x{cols} exceeds the {MAX_DIM} dimension limit")
    return np.kron(a, b)


def embed(op: ComplexMatrix, acts_on: Sequence[int], n_qubits: int) -> ComplexMatrix:
    """Place a k-qubit operator on the given register positions of an n-qubit register.

    `acts_on[j]` is the register index of the operator's j-th qubit, so
    embed(CNOT, (2, 0), 3) controls on qubit 2 and targets qubit 0.
    """
    op = as_matrix(op)
    acts_on = list(acts_on)
    k = len(acts_on)
    if len(set(acts_on)) != k:
        raise BadIndexError(f"Repeated qubit index in {acts_on}")
    if any(q < 0 or q >= n_qubits for q in acts_on):
        raise BadIndexError(f"Qubit indices {acts_on} out of range for a {n_qubits}-qubit register")
    if op.shape != (2**k, 2**k):
        raise DimMismatchError(f"Operator of shape {op.shape} cannot act on {k} qubits")

    rest = [q for q in range(n_qubits) if q not in acts_on]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    order = acts_on + rest
    perm = list(np.argsort(order))
    t = full.reshape([2] * (2 * n_qubits))
    t = t.transpose(perm + [p + n_qubits for p in perm])
    return t.reshape(2**n_qubits, 2**n_qubits)


def apply(u: ComplexMatrix, s: State) -> State:
    """Evolve a state: psi -> U psi, rho -> U rho U^dagger.

    Raises:
        NonUnitaryError: if max|U^dagger U - I| exceeds 1e-12.
        DimMismatchError: if U does not match the state dimension.
    """
    u = as_matrix(u)
    if u.shape[0] != u.shape[1] or u.shape[0] != s.dim:
        raise DimMismatchError(f"Operator of shape {u.shape} cannot act on a state of dimension {s.dim}")
    if not is_unitary(u):
        deviation = float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))))
        raise NonUnitaryError(f"Operator deviates from unitarity by {deviation:.3e} > {STRUCTURAL_TOL}")
    if isinstance(s, StateVector):
        return StateVector(u @ s.amplitudes)
    if isinstance(s, DensityOperator):
        return DensityOperator(u @ s.matrix @ dagger(u))
    raise TypeError(f"Cannot apply an operator to {type(s).__name__}")


def expectation(obs: ComplexMatrix, rho: State) -> float:
    """Tr(obs rho) for a Hermitian observable.

    Raises:
        NonHermitianError: if obs is not Hermitian within 1e-12.
        InvalidStateError: if the result carries an imaginary part of 1e-10 or more.
    """
    obs = as_matrix(obs)
    if not is_hermitian(obs):
        raise NonHermitianError(f"Observable is not Hermitian within {STRUCTURAL_TOL}")
    if obs.shape[0] != rho.dim:
        raise DimMismatchError(f"Observable of shape {obs.shape} cannot act on a state of dimension {rho.dim}")
    if isinstance(rho, StateVector):
        value = np.vdot(rho.amplitudes, obs @ rho.amplitudes)
    else:
        value = np.trace(obs @ rho.matrix)
    if abs(value.imag) >= IMAG_TOL:
        raise InvalidStateError(f"Expectation has imaginary residue {value.imag!r}, the state is not Hermitian")
    return float(value.real)


def partial_trace(rho: DensityOperator, keep: Iterable[int]) -> DensityOperator:
    """Reduced state on the qubits in `keep`, returned in ascending register order."""
    n = rho.n_qubits
    keep = set(keep)
    if any(q < 0 or q >= n for q in keep):
        raise BadIndexError(f"Qubit indices {sorted(keep)} out of range for a {n}-qubit register")

    t = rho.matrix.reshape([2] * (2 * n))
    current = n
    for q in sorted(set(range(n)) - keep, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + current)
        current -= 1
    return DensityOperator(t.reshape(2**current, 2**current))


def purity(rho: DensityOperator) -> float:
    return float(np.real(np.trace(rho.matrix @ rho.matrix)))


def fidelity_pure(rho: DensityOperator, psi: Union[StateVector, np.ndarray]) -> float:
    """<psi|rho|psi> for a pure target."""
    v = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex).reshape(-1)
    return float(np.real(np.vdot(v, rho.matrix @ v)))


def random_unitary(dim: int, rng: Optional[np.random.Generator] = None) -> ComplexMatrix:
    # Haar measure: QR of a Ginibre matrix with the phases of R's diagonal divided out
    rng = np.random.default_rng() if rng is None else rng
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: Optional[np.random.Generator] = None, rank: Optional[int] = None) -> DensityOperator:
    rng = np.random.default_rng() if rng is None else rng
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ dagger(g)
    m = (m + dagger(m)) / 2
    return DensityOperator(m / np.trace(m).real)
