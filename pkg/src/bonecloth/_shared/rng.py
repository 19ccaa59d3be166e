# Area: Shared
# PRD: docs/prd-bonecloth.md
"""
bonecloth._shared.rng — Named counter-based random streams
==========================================================

Every random draw in the package comes from a Philox generator keyed by
(seed, stream name, counter). Streams are independent of call order, so
resuming a run at epoch N reproduces exactly the draws of the
uninterrupted run.
"""

from __future__ import annotations

import zlib

import numpy as np

# Documented stream names, in the order they are first used by a run
STREAMS = ("init", "assets", "poses", "windows", "bench")


def stream(seed: int, name: str, counter: int = 0) -> np.random.Generator:
    """Return the generator for (seed, name, counter)."""
    if name not in STREAMS:
        raise ValueError(f"Unknown RNG stream '{name}'")
    key = (int(seed) & 0xFFFFFFFF) << 32 | zlib.crc32(name.encode("utf-8"))
    bit_gen = np.random.Philox(key=key, counter=int(counter))
    return np.random.Generator(bit_gen)
