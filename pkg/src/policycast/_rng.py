"""Per-trial random streams.

Every trial draws from a generator seeded by ``(master_seed, stream, trial)``,
so results do not depend on how trials are distributed over workers.
"""
import zlib

import numpy as np


def trial_rng(seed: int, trial: int, stream: str = "") -> np.random.Generator:
    tag = zlib.crc32(stream.encode())
    return np.random.default_rng(np.random.SeedSequence([int(seed), tag, int(trial)]))
