from eprsim.types import Arm, Basis, DetectorId, FunctionType

from .experiment import (
    ExactAnalysis,
    ExperimentConfig,
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
from .records import MeasurementRecord, RecordSet
