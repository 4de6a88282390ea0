"""Bell-operator analysis of the two arms.

B = (sigma_x sigma_x + sigma_z sigma_z) / sqrt2 on each arm's detector pair. Local models
obey |<B>| <= 1; a violation certifies the fidelity to the arm's target state above 1/sqrt2.
"""
from __future__ import annotations

import logging
import math
from typing import Iterable, Optional

import numpy as np

from eprsim.bell.report import BellEstimate, BellReport, Decision, FidelityBounds
from eprsim.errors import InconclusiveError, InsufficientDataError
from eprsim.linalg import ComplexMatrix, DensityOperator, expectation, fidelity_pure
from eprsim.optics import observable
from eprsim.protocol import MeasurementRecord, RecordSet, target_state
from eprsim.types import Arm, Basis, FunctionType

logger = logging.getLogger("eprsim")

INV_SQRT2 = math.sqrt(0.5)
MIN_SHOTS = 2


def bell_operator(arm: Arm | str) -> ComplexMatrix:
    first, second = Arm.parse(arm).detectors
    xx = observable(first, Basis.X) @ observable(second, Basis.X)
    zz = observable(first, Basis.Z) @ observable(second, Basis.Z)
    return (xx + zz) * INV_SQRT2


def werner_threshold() -> float:
    """Smallest Werner parameter whose ideal Bell value p*sqrt2 exceeds 1."""
    return INV_SQRT2


def _basis_mean(products: np.ndarray):
    n = products.size
    mean = float(products.mean())
    std_error = float(products.std(ddof=1) / math.sqrt(n))
    return mean, std_error


def estimate(records: Iterable[MeasurementRecord], arm: Arm | str) -> BellEstimate:
    """Sample Bell value of one arm from its kept z and x shots.

    Raises:
        InsufficientDataError: fewer than two kept shots in either basis.
    """
    arm = Arm.parse(arm)
    records = RecordSet.from_records(records)
    zz = records.products(arm, Basis.Z)
    xx = records.products(arm, Basis.X)
    if zz.size < MIN_SHOTS or xx.size < MIN_SHOTS:
        raise InsufficientDataError(
            f"Arm {arm.value} needs at least {MIN_SHOTS} kept shots per basis, got z={zz.size}, x={xx.size}"
        )
    m_zz, s_zz = _basis_mean(zz)
    m_xx, s_xx = _basis_mean(xx)
    est = BellEstimate(
        arm=arm,
        mean=(m_xx + m_zz) * INV_SQRT2,
        std_error=math.sqrt(s_xx**2 + s_zz**2) * INV_SQRT2,
        n_zz=int(zz.size),
        n_xx=int(xx.size),
    )
    logger.info(f"Arm {arm.value}: <B> = {est.mean:.6f} +/- {est.std_error:.6f} (n_zz={est.n_zz}, n_xx={est.n_xx})")
    return est


def exact_estimate(rho: DensityOperator, arm: Arm | str) -> BellEstimate:
    return BellEstimate(arm=Arm.parse(arm), mean=expectation(bell_operator(arm), rho), std_error=0.0, n_zz=0, n_xx=0)


def violated(est: BellEstimate, confidence_k: float = 0.0) -> bool:
    """|<B>| > 1, or with a margin of `confidence_k` standard errors: |<B>| - k*se > 1."""
    return abs(est.mean) - confidence_k * est.std_error > 1.0


def fidelity_bounds(est: BellEstimate, hypothesis: FunctionType | str) -> FidelityBounds:
    """
    Balanced: <B>/sqrt2 <= F(Phi+) <= (<B>/sqrt2 + 1)/2.
    Constant: -<B>/sqrt2 <= F(Psi-) <= (-<B>/sqrt2 + 1)/2.
    """
    hypothesis = FunctionType.parse(hypothesis)
    witness = est.mean * INV_SQRT2
    if hypothesis is FunctionType.CONSTANT:
        witness = -witness
    raw_lower, raw_upper = witness, (witness + 1) / 2
    return FidelityBounds(
        lower=min(max(raw_lower, 0.0), 1.0),
        upper=min(max(raw_upper, 0.0), 1.0),
        target=hypothesis,
        raw_lower=raw_lower,
        raw_upper=raw_upper,
    )


def true_fidelity(rho: DensityOperator, hypothesis: FunctionType | str) -> float:
    return fidelity_pure(rho, target_state(hypothesis))


def decide(est: BellEstimate, confidence_k: float = 0.0) -> Decision:
    if not violated(est, confidence_k):
        return Decision.INCONCLUSIVE
    return Decision.BALANCED if est.mean > 0 else Decision.CONSTANT


def classify(est_a: BellEstimate, est_b: BellEstimate, confidence_k: float = 0.0) -> BellReport:
    """Decide both functions from the sign of a violated Bell inequality.

    P_success is the mean of the two arms' lower fidelity bounds under the decided
    hypotheses and is only reported when both arms are decided.
    """
    decision_a, decision_b = decide(est_a, confidence_k), decide(est_b, confidence_k)
    bounds_a = fidelity_bounds(est_a, decision_a.hypothesis) if decision_a.hypothesis else None
    bounds_b = fidelity_bounds(est_b, decision_b.hypothesis) if decision_b.hypothesis else None

    p_success: Optional[float] = None
    speedup: Optional[float] = None
    if bounds_a and bounds_b:
        p_success = (bounds_a.lower + bounds_b.lower) / 2
        speedup = 4 * p_success

    report = BellReport(
        estimate_a=est_a,
        estimate_b=est_b,
        violated_a=violated(est_a, confidence_k),
        violated_b=violated(est_b, confidence_k),
        decision_a=decision_a,
        decision_b=decision_b,
        bounds_a=bounds_a,
        bounds_b=bounds_b,
        p_success_lower=p_success,
        speedup=speedup,
        confidence_k=confidence_k,
    )
    logger.info(f"Decisions: A={decision_a.value}, B={decision_b.value}, P_success>={p_success}")
    return report


def speedup_factor(report: BellReport) -> float:
    """4 * P_success; at least 2*sqrt2 whenever both arms violate their Bell inequality.

    Raises:
        InconclusiveError: if either arm is undecided.
    """
    if not report.conclusive:
        raise InconclusiveError(
            f"Speed-up needs both arms decided, got A={report.decision_a.value}, B={report.decision_b.value}"
        )
    return 4 * report.p_success_lower
