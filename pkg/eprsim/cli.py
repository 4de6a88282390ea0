from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from eprsim.bell import bell_operator, fidelity_bounds, exact_estimate, true_fidelity
from eprsim.errors import ConfigError
from eprsim.linalg import apply, expectation, fidelity_pure, random_density
from eprsim.optics import SIGMA_Z, deutsch_gate, hwp, ket, x_basis_adapter
from eprsim.protocol import ExperimentConfig, detected_polarization, exact_correlators
from eprsim.task import EPRSimTask, RunConfig, load_config_file
from eprsim.types import Arm, FunctionType
from eprsim.utils import parse_seed, seconds2text, seed_from_env

logger = logging.getLogger("eprsim")

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2

# flag dest -> configuration key
_FLAG_KEYS = {
    "fn_a": "fn_a",
    "fn_b": "fn_b",
    "noise_p": "noise_p",
    "efficiency": "detector_efficiency",
    "shots": "shots_per_basis",
    "seed": "seed",
    "confidence_k": "confidence_k",
    "out_records": "out_records",
    "out_report": "out_report",
    "format": "report_format",
    "exact_only": "exact_only",
}


class _ArgumentParser(argparse.ArgumentParser):
    # usage errors exit 1; status 2 is reserved for inconclusive reports
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="eprsim",
        description="Two-photon Deutsch protocol: exact states, sampled detector records and Bell-operator report.",
    )
    parser.add_argument("--config", type=str, help="YAML or JSON file of settings; flags override it")
    parser.add_argument("--fn-a", type=str, choices=["balanced", "constant"], help="hidden function of arm A")
    parser.add_argument("--fn-b", type=str, choices=["balanced", "constant"], help="hidden function of arm B")
    parser.add_argument("--noise-p", type=float, help="Werner parameter of the source, 1 is ideal")
    parser.add_argument("--efficiency", type=float, help="single-detector efficiency in (0, 1]")
    parser.add_argument("--shots", type=int, help="shots per arm and basis setting")
    parser.add_argument("--seed", type=parse_seed, help="master seed (falls back to $EPRSIM_SEED)")
    parser.add_argument("--confidence-k", type=float, help="standard errors required beyond |<B>| = 1")
    parser.add_argument("--out-records", type=str, help="CSV file for sampled records")
    parser.add_argument("--out-report", type=str, help="report file, stdout if omitted")
    parser.add_argument("--format", type=str, choices=["json", "text"], help="report format")
    parser.add_argument("--exact-only", action="store_true", default=None, help="skip sampling, report exact values")
    parser.add_argument("--selftest", action="store_true", help="run the built-in consistency checks and exit")
    parser.add_argument("--verbose", action="store_true", help="log progress at INFO level")
    parser.add_argument("--debug", action="store_true", help="log at DEBUG level")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < flags; $EPRSIM_SEED only supplies a seed neither of them sets."""
    config: Dict = {}
    if args.config:
        config.update(load_config_file(args.config))
    if config.get("seed") is None and args.seed is None:
        env_seed = seed_from_env()
        if env_seed is not None:
            config["seed"] = env_seed
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest)
        if value is not None:
            config[key] = value
    return RunConfig.from_config(config)


def run(cfg: RunConfig | Dict) -> int:
    """Run one experiment; 0 on success, 2 if a function stays undecided, 1 on error."""
    try:
        task = EPRSimTask(cfg)
        report = task.process()
    except (ValueError, OSError) as e:
        logger.error(f"Run failed: {e}")
        return EXIT_ERROR
    return EXIT_INCONCLUSIVE if report.inconclusive else EXIT_OK


def _same_ray(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    """Equal up to a global phase, for normalized vectors."""
    return abs(abs(np.vdot(a, b)) - 1.0) < tol


def _check_hwp2_sign() -> Tuple[bool, str]:
    out = apply(hwp(22.5).unitary, ket("V")).amplitudes
    expected = ket("-").amplitudes
    return bool(np.allclose(out, expected, atol=1e-12)), f"HWP(22.5)|V> = {np.round(out, 6)}, want (|H>-|V>)/sqrt2"


def _check_hadamard_plate() -> Tuple[bool, str]:
    out = apply(hwp(22.5).unitary, ket("H")).amplitudes
    return bool(np.allclose(out, ket("+").amplitudes, atol=1e-12)), f"HWP(22.5)|H> = {np.round(out, 6)}"


def _check_detector_sign(fn: FunctionType, arm: Arm) -> Tuple[bool, str]:
    rho = detected_polarization(fn, arm)
    value = expectation(SIGMA_Z, rho)
    want = -1.0 if fn is FunctionType.BALANCED else 1.0
    return abs(value - want) < 1e-12, f"sigma_z({arm.detectors[1].value}) = {value:+.12f}, want {want:+.0f}"


def _check_ideal_pair(fn_a: FunctionType, fn_b: FunctionType) -> Tuple[bool, str]:
    cfg = ExperimentConfig(fn_a=fn_a, fn_b=fn_b)
    details, ok = [], True
    for arm in (Arm.A, Arm.B):
        a = exact_correlators(cfg, arm)
        want = 1.0 if a.fn is FunctionType.BALANCED else -1.0
        ok &= abs(a.zz - want) < 1e-12 and abs(a.xx - want) < 1e-12 and abs(a.bell - want * math.sqrt(2)) < 1e-12
        details.append(f"{arm.value}: zz={a.zz:+.3f} xx={a.xx:+.3f} <B>={a.bell:+.6f}")
    return ok, "; ".join(details)


def _check_deutsch_gate(fn: FunctionType) -> Tuple[bool, str]:
    # the gate must agree with the element list on the post-selected input, in both frames
    z_out = detected_polarization(fn, Arm.A)
    gate = deutsch_gate(fn).unitary
    z_ok = fidelity_pure(z_out, gate @ ket("H").amplitudes) > 1 - 1e-12
    adapter = x_basis_adapter().unitary
    x_readout = adapter @ np.linalg.eigh(z_out.matrix)[1][:, -1]
    x_ok = _same_ray(gate @ ket("+").amplitudes, x_readout)
    return bool(z_ok and x_ok), f"z frame {'ok' if z_ok else 'mismatch'}, x frame {'ok' if x_ok else 'mismatch'}"


def _check_tsirelson(n: int = 100) -> Tuple[bool, str]:
    rng = np.random.default_rng(12345)
    worst = max(abs(expectation(bell_operator(Arm.A), random_density(4, rng))) for _ in range(n))
    return worst <= math.sqrt(2) + 1e-10, f"max |<B>| over {n} random states = {worst:.12f}"


def _check_sandwich(n: int = 100) -> Tuple[bool, str]:
    rng = np.random.default_rng(54321)
    worst = math.inf
    for _ in range(n):
        rho = random_density(4, rng)
        est = exact_estimate(rho, Arm.A)
        for fn in FunctionType:
            bounds = fidelity_bounds(est, fn)
            f = true_fidelity(rho, fn)
            worst = min(worst, f - bounds.raw_lower, bounds.raw_upper - f)
    return worst >= -1e-10, f"smallest slack over {n} random states = {worst:.3e}"


def selftest_checks() -> List[Tuple[str, Callable[[], Tuple[bool, str]]]]:
    checks: List[Tuple[str, Callable[[], Tuple[bool, str]]]] = [
        ("hwp2-sign: |V> -> (|H>-|V>)/sqrt2", _check_hwp2_sign),
        ("hadamard-plate: |H> -> (|H>+|V>)/sqrt2", _check_hadamard_plate),
    ]
    for arm in (Arm.A, Arm.B):
        for fn in FunctionType:
            checks.append((f"detector-sign: arm {arm.value} {fn.value}", lambda fn=fn, arm=arm: _check_detector_sign(fn, arm)))
    for fn_a in FunctionType:
        for fn_b in FunctionType:
            checks.append(
                (f"ideal-pair: A={fn_a.value} B={fn_b.value}", lambda a=fn_a, b=fn_b: _check_ideal_pair(a, b))
            )
    for fn in FunctionType:
        checks.append((f"deutsch-gate: {fn.value}", lambda fn=fn: _check_deutsch_gate(fn)))
    checks.append(("tsirelson: 100 random states", _check_tsirelson))
    checks.append(("fidelity-sandwich: 100 random states", _check_sandwich))
    return checks


def selftest(out=None) -> int:
    """Run the consistency checks, print a pass/fail table; 0 if everything passes."""
    out = sys.stdout if out is None else out
    start = time.perf_counter()
    failures = 0
    for name, check in selftest_checks():
        try:
            ok, detail = check()
        except Exception as e:
            ok, detail = False, f"{type(e).__name__}: {e}"
        failures += not ok
        out.write(f"{'PASS' if ok else 'FAIL':<6}{name:<44}{detail}\n")
    elapsed = time.perf_counter() - start
    out.write(f"{'FAILED' if failures else 'OK'}: {failures} failing check(s) in {seconds2text(elapsed)}\n")
    return EXIT_ERROR if failures else EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.debug:
        logger.setLevel(logging.DEBUG)
    elif args.verbose:
        logger.setLevel(logging.INFO)

    if args.selftest:
        return selftest()
    try:
        cfg = resolve_config(args)
    except (ConfigError, ValueError, OSError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_ERROR
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
