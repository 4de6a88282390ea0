import os
from typing import Optional

import numpy as np

SEED_ENV_VAR = "EPRSIM_SEED"
MAX_SEED = 2**64 - 1


def block_seed(seed: int, arm_index: int, basis_index: int) -> np.random.SeedSequence:
    """Random stream of one (arm, basis) sampling block.

    The master seed is the SeedSequence entropy and (arm_index, basis_index) its spawn key,
    so blocks are independent of each other and of the order they are drawn in.
    """
    return np.random.SeedSequence(entropy=seed, spawn_key=(arm_index, basis_index))


def parse_seed(value) -> int:
    seed = int(str(value).strip(), 0) if isinstance(value, str) else int(value)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"Seed must be an unsigned 64-bit integer, got {value}")
    return seed


def seed_from_env() -> Optional[int]:
    value = os.environ.get(SEED_ENV_VAR)
    if value is None or not value.strip():
        return None
    return parse_seed(value)


def seconds2text(seconds: float) -> str:
    """Short human-readable duration, e.g. 0.412s or 2m03.1s."""
    if seconds < 60:
        return f"{seconds:.3f}s"
    minutes, seconds = divmod(seconds, 60)
    return f"{int(minutes)}m{seconds:04.1f}s"
