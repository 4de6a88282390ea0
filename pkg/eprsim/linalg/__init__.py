from .core import (
    ComplexMatrix,
    DensityOperator,
    StateVector,
    apply,
    dagger,
    embed,
    expectation,
    fidelity_pure,
    is_hermitian,
    is_unitary,
    kron,
    partial_trace,
    projector,
    purity,
    random_density,
    random_unitary,
)
