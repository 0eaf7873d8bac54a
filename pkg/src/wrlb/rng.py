"""Counter-based random streams keyed by (experiment seed, sample index).

Every ensemble in the package draws sample ``i`` of experiment ``seed``
from an independent Philox stream keyed by the pair.  Philox generates
each output block purely from (key, counter), so the stream for a given
sample never depends on how many samples were drawn before it or on how
work is split across workers.  Within one sample the layout of draws is
fixed (documented by the caller), which pins every mode to a fixed
position in the stream.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Return the generator for sample `index` of experiment `seed`.

    The same (seed, index) pair always yields bit-identical draws,
    regardless of platform thread count or draw batching upstream.
    """
    if index < 0:
        raise ValueError("sample index must be non-negative")
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def standard_normals(seed: int, index: int, count: int) -> np.ndarray:
    """First `count` standard normals of the (seed, index) stream.

    Drawing a prefix is stable: the first k values are the same whether
    or not more are drawn afterwards, so callers that need only part of
    a sample's layout (for example a u-marginal) stay consistent with
    callers that draw the whole phase point.
    """
    return stream(seed, index).standard_normal(count)
