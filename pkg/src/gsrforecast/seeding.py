"""Seed splitting.

A single user seed feeds every stochastic stage. Each stage draws from
``SeedSequence([seed, stage_id])`` so changing e.g. the number of GP
restarts never perturbs the synthetic data or the network initialization.
"""

from __future__ import annotations

import numpy as np

STAGES = {
    "synth": 0,
    "split": 1,
    "solarisnet-init": 2,
    "gpr-starts": 3,
    "ann-init": 4,
    "restarts": 5,
}


def rng_for(seed: int, stage: str, *extra: int) -> np.random.Generator:
    if seed is None:
        raise ValueError(f"stage {stage!r} needs an explicit seed")
    if int(seed) < 0:
        raise ValueError("seed must be non-negative")
    entropy = [int(seed), STAGES[stage], *[int(e) for e in extra]]
    return np.random.default_rng(np.random.SeedSequence(entropy))
