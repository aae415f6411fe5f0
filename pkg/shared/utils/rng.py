from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def substream(master_seed: int, *keys: int) -> np.random.Generator:
    """
    Counter-based generator for one (master_seed, trial, stage, ...) key.

    Philox is keyed from a SeedSequence over the full key, so a substream depends
    only on its key and never on how many other streams were drawn before it.
    """
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class TrialStreams:
    master_seed: int
    trial: int

    def stage(self, index: int) -> np.random.Generator:
        return substream(self.master_seed, self.trial, index)


def make_streams(master_seed: int, trial: int) -> TrialStreams:
    return TrialStreams(master_seed=master_seed, trial=trial)
