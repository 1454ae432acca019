"""Counter-based random streams.

Every stream is a Philox-4x64 generator keyed by ``(seed, path_hash)``,
where ``path_hash`` folds an index path (e.g. ``(n, trial, replica)``)
through splitmix64. Streams for different paths are disjoint keys of the
same block cipher, so trials can run in any order or in parallel.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def path_key(*path: int) -> int:
    h = 0x243F6A8885A308D3
    for p in path:
        h = splitmix64(h ^ (int(p) & MASK64))
    return h


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for ``(seed, *path)``."""
    key = np.array([int(seed) & MASK64, path_key(*path)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
