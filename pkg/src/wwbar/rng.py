"""Counter-based random streams keyed by (seed, purpose label, index).

A stream for a given key is the same no matter how work is chunked or
scheduled, which is what keeps CLI runs byte-identical.
"""

from __future__ import annotations

import zlib

import numpy as np

# doubles reserved per trial row; a multiple of 4 keeps rows aligned to Philox counter blocks
ROW_WIDTH = 8


def _key(seed: int, label: str, index: int = 0) -> np.ndarray:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, zlib.crc32(label.encode()), int(index)])
    return ss.generate_state(2, dtype=np.uint64)


def stream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Independent generator for one (seed, label, index) key."""
    return np.random.Generator(np.random.Philox(key=_key(seed, label, index)))


def trial_uniforms(seed: int, label: str, start: int, stop: int) -> np.ndarray:
    """Uniform variates for trials ``start..stop-1``, one row of ``ROW_WIDTH`` per trial.

    Row ``i`` depends only on ``(seed, label, i)``.
    """
    if stop < start:
        raise ValueError("stop must be >= start")
    bg = np.random.Philox(key=_key(seed, label))
    bg.advance(start * ROW_WIDTH // 4)
    return np.random.Generator(bg).random((stop - start, ROW_WIDTH))
