"""Seed derivation.

Every random stream in the package is a ``numpy.random.Generator`` backed by
PCG64 (64-bit output, 128-bit state). Streams are never shared between
purposes: a root seed is combined with a purpose tag and an optional integer
path through ``SeedSequence`` so that, e.g., the dropout masks of the third
discriminator do not depend on how many noise vectors were drawn before.

    stream(seed, "noise")          -> generator noise
    stream(seed, "d_init", 2)      -> init of discriminator #2

The purpose tag is hashed with CRC-32, which is stable across processes and
Python versions (unlike ``hash``).
"""

from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def purpose_key(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def stream(seed: int, purpose: str, *path: int) -> np.random.Generator:
    """Return an independent generator for ``purpose`` under ``seed``."""
    seq = np.random.SeedSequence(
        entropy=int(seed) & MASK64,
        spawn_key=(purpose_key(purpose), *(int(p) for p in path)),
    )
    return np.random.Generator(np.random.PCG64(seq))


def derive_seed(seed: int, purpose: str, *path: int) -> int:
    """Derive a child 64-bit seed, for handing to a nested trainer."""
    seq = np.random.SeedSequence(
        entropy=int(seed) & MASK64,
        spawn_key=(purpose_key(purpose), *(int(p) for p in path)),
    )
    lo, hi = seq.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


def as_generator(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit seed or Generator is required")
    return stream(int(rng), "root")
