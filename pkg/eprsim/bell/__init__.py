from .report import BellEstimate, BellReport, Decision, FidelityBounds
from .stats import (
    bell_operator,
    classify,
    decide,
    estimate,
    exact_estimate,
    fidelity_bounds,
    speedup_factor,
    true_fidelity,
    violated,
    werner_threshold,
)
