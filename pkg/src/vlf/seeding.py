"""Deterministic RNG streams derived from one user seed.

Components draw from independent streams (``rng(seed, "rc")``,
``rng(seed, "qg")``) so that enabling or disabling one component never
shifts the random draws of another.
"""

import zlib

import numpy as np


def _tag_to_int(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def rng(seed: int, *tags: str) -> np.random.Generator:
    """Generator for (seed, tags); same arguments give identical streams."""
    entropy = [int(seed)] + [_tag_to_int(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))
