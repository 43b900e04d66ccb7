"""
Counter-based random streams.

Every random draw in a simulation comes from a generator keyed by
``(master_seed, purpose tag, index...)``. Two runs with the same key get the
same numbers no matter how trials are scheduled across workers.
"""

import zlib

import numpy as np

__all__ = ["stream", "tag_code"]


def tag_code(tag):
    """Stable 32-bit code for a purpose tag such as ``"channel"``."""
    return zlib.crc32(tag.encode("utf-8"))


def stream(master_seed, tag, *index):
    """Independent ``numpy.random.Generator`` for one (tag, index) key."""
    if int(master_seed) < 0:
        raise ValueError(f"master_seed must be non-negative, got {master_seed}")
    key = (tag_code(tag),) + tuple(int(i) for i in index)
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(seq))
