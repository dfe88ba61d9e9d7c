"""Counter-based random streams.

Every randomized routine draws from ``substream(seed, index)``: a Philox
generator keyed by the (seed, index) pair.  Streams with different indices
are statistically independent and do not share state, so trials, restarts,
and sampling rows can run in any order (or in parallel) without reordering
draws.
"""

import numpy as np

__all__ = ["substream"]


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Return the generator for substream ``index`` of ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and substream index must be nonnegative")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
