"""Counter-based random streams.

Every stochastic quantity is drawn from a Philox stream keyed by the master
seed and an integer tuple (sample or path index, purpose tag), so results do
not depend on batching or on how work is split across workers.
"""

from __future__ import annotations

import numpy as np

ENV_SEED = "MONOTONE_SPDE_SEED"


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), *[int(k) for k in key]])
    return np.random.Generator(np.random.Philox(ss))
