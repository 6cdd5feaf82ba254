"""Named, splittable random streams.

All randomness in the package flows from a 64-bit master seed through
``numpy.random.SeedSequence`` spawn keys, so a stream is identified by its
path, e.g. ``stream(seed, "corpus", 17)``. Strings in the path are hashed
with CRC-32 to get a stable integer key.
"""

import zlib

import numpy as np


def _key(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    part = int(part)
    if part < 0:
        raise ValueError("stream path integers must be non-negative")
    return part


def stream(seed, *path):
    """Return a fresh ``Generator`` for the stream named by ``(seed, *path)``."""
    seq = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF,
                                 spawn_key=tuple(_key(p) for p in path))
    return np.random.Generator(np.random.PCG64(seq))


def gaussian(rng, shape):
    """Standard normal draws via Box-Muller.

    Uses only ``rng.random`` so the bit pattern is platform independent.
    """
    size = int(np.prod(shape, dtype=np.int64))
    half = (size + 1) // 2
    u1 = 1.0 - rng.random(half)  # (0, 1]
    u2 = rng.random(half)
    r = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate([r * np.cos(angle), r * np.sin(angle)])[:size]
    return z.reshape(shape)
