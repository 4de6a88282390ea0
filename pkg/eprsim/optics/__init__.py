from .elements import (
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
