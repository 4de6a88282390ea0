from __future__ import annotations

import logging
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional

import yaml

from eprsim.bell import BellEstimate, BellReport, classify, estimate, exact_estimate, fidelity_bounds
from eprsim.errors import ConfigError
from eprsim.protocol import ExactAnalysis, ExperimentConfig, exact_correlators, joint_output_state, sample_records
from eprsim.types import Arm

logging.basicConfig(
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S", level=logging.WARNING
)
logger = logging.getLogger("eprsim")

REPORT_FORMATS = ("json", "text")


@dataclass(frozen=True)
class RunConfig:
    """
    Args:
        experiment: source, oracles, noise, shots and seed
        out_records: CSV destination for sampled records, None to skip
        out_report: report destination, None for stdout
        report_format: "json" or "text"
        confidence_k: standard errors a Bell value must clear beyond 1 to count as violated
        exact_only: skip sampling and report exact expectations
    """

    experiment: ExperimentConfig
    out_records: Optional[Path] = None
    out_report: Optional[Path] = None
    report_format: str = "json"
    confidence_k: float = 3.0
    exact_only: bool = False

    def __post_init__(self):
        if self.report_format not in REPORT_FORMATS:
            raise ConfigError(f"report_format must be one of {REPORT_FORMATS}, got '{self.report_format}'")
        try:
            object.__setattr__(self, "confidence_k", float(self.confidence_k))
        except (TypeError, ValueError):
            raise ConfigError(f"confidence_k must be a number, got {self.confidence_k!r}")
        if not isinstance(self.exact_only, bool):
            raise ConfigError(f"exact_only must be true or false, got {self.exact_only!r}")
        if not self.confidence_k >= 0:
            raise ConfigError(f"confidence_k must be non-negative, got {self.confidence_k}")
        for name in ("out_records", "out_report"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, Path(value))

    @classmethod
    def from_config(cls, config: Dict) -> RunConfig:
        """Build from a flat mapping of experiment and run settings."""
        run_keys = {f.name for f in fields(cls)} - {"experiment"}
        experiment = {k: v for k, v in config.items() if k not in run_keys}
        run = {k: v for k, v in config.items() if k in run_keys}
        for key in ("fn_a", "fn_b"):
            if experiment.get(key) is None:
                raise ConfigError(f"Missing required setting '{key}'")
        return cls(ExperimentConfig.from_config(experiment), **run)


def load_config_file(path: Path | str) -> Dict:
    """Read a YAML (or JSON) mapping of settings."""
    with open(path) as f:
        try:
            config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: {e}")
    if not isinstance(config, dict):
        raise ConfigError(f"{path}: expected a mapping of settings, got {type(config).__name__}")
    return config


class EPRSimTask:
    def __init__(self, config: Dict | RunConfig):
        self.config = config if isinstance(config, RunConfig) else RunConfig.from_config(config)
        self.experiment = self.config.experiment
        self.records = None
        self.report: Optional[BellReport] = None

    def sanity_check(self):
        for path in (self.config.out_records, self.config.out_report):
            if path is None:
                continue
            parent = path.parent if str(path.parent) else Path(".")
            if not parent.is_dir():
                raise ConfigError(f"Output directory {parent} does not exist")
            if not os.access(parent, os.W_OK):
                raise ConfigError(f"Output directory {parent} is not writable")

    def exact_analysis(self) -> List[ExactAnalysis]:
        return [exact_correlators(self.experiment, arm) for arm in (Arm.A, Arm.B)]

    def process(self) -> BellReport:
        self.sanity_check()
        exact = self.exact_analysis()

        if self.config.exact_only:
            estimates = [exact_estimate(joint_output_state(self.experiment, arm), arm) for arm in (Arm.A, Arm.B)]
        else:
            self.records = sample_records(self.experiment)
            if self.config.out_records:
                self.records.to_csv(self.config.out_records)
            estimates = [estimate(self.records, arm) for arm in (Arm.A, Arm.B)]

        self.report = classify(*estimates, confidence_k=self.config.confidence_k)
        self.write_report(exact)
        return self.report

    def write_report(self, exact: List[ExactAnalysis]):
        if self.config.report_format == "json":
            content = self.report.to_json(exact=_exact_dict(exact), config=self.experiment.to_dict()) + "\n"
        else:
            content = self.report.to_text() + "\n\n" + _exact_text(exact) + "\n"

        if self.config.out_report:
            self.config.out_report.write_text(content)
            logger.info(f"Wrote report to {self.config.out_report}")
        else:
            sys.stdout.write(content)


def _exact_dict(exact: List[ExactAnalysis]) -> Dict:
    out = {}
    for analysis in exact:
        exact_mean = BellEstimate(arm=analysis.arm, mean=analysis.bell, std_error=0.0, n_zz=0, n_xx=0)
        bounds = fidelity_bounds(exact_mean, analysis.fn)
        out[f"arm_{analysis.arm.value.lower()}"] = {
            "fn": analysis.fn.value,
            "zz": analysis.zz,
            "xx": analysis.xx,
            "bell": analysis.bell,
            "fidelity": analysis.fidelity,
            "fidelity_lower": bounds.lower,
            "fidelity_upper": bounds.upper,
            "purity": analysis.purity,
        }
    return out


def _exact_text(exact: List[ExactAnalysis]) -> str:
    lines = ["exact analysis", f"{'arm':<4}{'fn':>10}{'<zz>':>18}{'<xx>':>18}{'<B>':>18}{'fidelity':>18}"]
    for a in exact:
        lines.append(f"{a.arm.value:<4}{a.fn.value:>10}{a.zz:>18.12f}{a.xx:>18.12f}{a.bell:>18.12f}{a.fidelity:>18.12f}")
    return "\n".join(lines)


if __name__ == "__main__":
    config = load_config_file("example/config.yaml")
    task = EPRSimTask(config)
    task.process()
