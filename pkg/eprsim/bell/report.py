from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

from eprsim.types import Arm, FunctionType

TSIRELSON = math.sqrt(2)
# 5-sigma consistency slack on top of the Tsirelson bound, plus rounding
_TSIRELSON_SIGMAS = 5.0
_ROUNDING = 1e-12


class Decision(str, Enum):
    BALANCED = "Balanced"
    CONSTANT = "Constant"
    INCONCLUSIVE = "Inconclusive"

    @property
    def hypothesis(self) -> Optional[FunctionType]:
        return {Decision.BALANCED: FunctionType.BALANCED, Decision.CONSTANT: FunctionType.CONSTANT}.get(self)


@dataclass(frozen=True)
class BellEstimate:
    arm: Arm
    mean: float
    std_error: float
    n_zz: int
    n_xx: int

    def __post_init__(self):
        object.__setattr__(self, "arm", Arm.parse(self.arm))
        if not self.std_error >= 0:
            raise ValueError(f"std_error must be non-negative, got {self.std_error}")
        if abs(self.mean) > TSIRELSON + _TSIRELSON_SIGMAS * self.std_error + _ROUNDING:
            raise ValueError(
                f"Arm {self.arm.value}: |<B>| = {abs(self.mean):.6f} exceeds the Tsirelson bound "
                f"by more than {_TSIRELSON_SIGMAS:g} standard errors"
            )


@dataclass(frozen=True)
class FidelityBounds:
    """Fidelity window to the target state of `target`; `lower`/`upper` are clamped to [0, 1]."""

    lower: float
    upper: float
    target: FunctionType
    raw_lower: float
    raw_upper: float


@dataclass(frozen=True)
class BellReport:
    estimate_a: BellEstimate
    estimate_b: BellEstimate
    violated_a: bool
    violated_b: bool
    decision_a: Decision
    decision_b: Decision
    bounds_a: Optional[FidelityBounds]
    bounds_b: Optional[FidelityBounds]
    p_success_lower: Optional[float]
    speedup: Optional[float]
    confidence_k: float = 0.0

    def __post_init__(self):
        conclusive = self.conclusive
        assert (self.p_success_lower is not None) == conclusive, "P_success is reported iff both arms are decided"
        if conclusive:
            assert math.isclose(self.speedup, 4 * self.p_success_lower), "speedup must be 4 * P_success"
        else:
            assert self.speedup is None, "speedup is absent unless both arms are decided"

    @property
    def conclusive(self) -> bool:
        return Decision.INCONCLUSIVE not in (self.decision_a, self.decision_b)

    @property
    def inconclusive(self) -> bool:
        return not self.conclusive

    def decision(self, arm: Arm | str) -> Decision:
        return self.decision_a if Arm.parse(arm) is Arm.A else self.decision_b

    def to_dict(self) -> Dict:
        def arm_dict(est: BellEstimate, violated: bool, bounds: Optional[FidelityBounds]) -> Dict:
            return {
                "mean": est.mean,
                "std_error": est.std_error,
                "violated": violated,
                "n_zz": est.n_zz,
                "n_xx": est.n_xx,
                "fidelity_lower": bounds.lower if bounds else None,
                "fidelity_upper": bounds.upper if bounds else None,
            }

        return {
            "arm_a": arm_dict(self.estimate_a, self.violated_a, self.bounds_a),
            "arm_b": arm_dict(self.estimate_b, self.violated_b, self.bounds_b),
            "decision_a": self.decision_a.value,
            "decision_b": self.decision_b.value,
            "p_success_lower": self.p_success_lower,
            "speedup": self.speedup,
            "confidence_k": self.confidence_k,
        }

    def to_json(self, **extra) -> str:
        """JSON document of the report; `extra` keys are appended after the report fields."""
        return json.dumps({**self.to_dict(), **extra}, indent=2)

    def to_text(self) -> str:
        lines = [f"{'arm':<4}{'<B>':>18}{'std_error':>16}{'violated':>10}{'decision':>14}{'f_lower':>18}"]
        for arm, est, violated, decision, bounds in (
            ("A", self.estimate_a, self.violated_a, self.decision_a, self.bounds_a),
            ("B", self.estimate_b, self.violated_b, self.decision_b, self.bounds_b),
        ):
            f_lower = f"{bounds.lower:.12f}" if bounds else "-"
            lines.append(
                f"{arm:<4}{est.mean:>18.12f}{est.std_error:>16.12f}{str(violated):>10}{decision.value:>14}{f_lower:>18}"
            )
        if self.conclusive:
            lines.append(f"P_success >= {self.p_success_lower:.12f}")
            lines.append(f"speed-up   = {self.speedup:.12f} : 1")
        else:
            lines.append("P_success and speed-up not certified: at least one Bell inequality holds")
        return "\n".join(lines)
