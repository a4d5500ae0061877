"""Deterministic random substreams.

Every stochastic quantity in a drop is drawn from its own generator keyed
by (root seed, purpose, entity indices). Links, users, and cells can
therefore be sampled in any order, or in parallel, and still produce
bit-identical results for a fixed seed.
"""

from __future__ import annotations

import numpy as np

# Fixed purpose codes; changing these renumbers every random stream.
_PURPOSES = {
    "bs-count": 0,
    "bs-pos": 1,
    "bs-attr": 2,
    "user-pos": 3,
    "user-attr": 4,
    "link": 5,
    "schedule": 6,
    "phase-fix": 7,
}


def substream(seed: int, purpose: str, *indices: int) -> np.random.Generator:
    """Independent generator for (seed, purpose, indices).

    The same tuple always yields the same stream, and distinct tuples yield
    statistically independent streams.
    """
    key = (_PURPOSES[purpose],) + tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))
