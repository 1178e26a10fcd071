from typing import Dict

import numpy as np

# Stable ids; appending new names must not renumber existing ones.
STREAM_IDS: Dict[str, int] = {
    "init": 0,
    "selection": 1,
    "noise": 2,
    "slicing": 3,
    "sampling": 4,
    "power": 5,
    "baseline1": 6,
    "baseline2": 7,
    "subsample": 8,
}


class RngStreams:
    """One seed forked into named, independent numpy generators."""

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)
        self._streams: Dict[str, np.random.Generator] = {}

    def __getitem__(self, name: str) -> np.random.Generator:
        if name not in STREAM_IDS:
            raise KeyError(f"Unknown RNG stream: {name}")
        if name not in self._streams:
            seq = np.random.SeedSequence([self.seed, STREAM_IDS[name]])
            self._streams[name] = np.random.default_rng(seq)
        return self._streams[name]

