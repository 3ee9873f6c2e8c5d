"""Counter-based uniforms: one value per (seed, i, j), independent of evaluation order."""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def pair_uniforms(seed: int, i, j) -> np.ndarray:
    """Uniform [0, 1) draws keyed by ``(seed, i, j)``; ``i`` and ``j`` below 2**32."""
    i = np.asarray(i, dtype=np.uint64)
    j = np.asarray(j, dtype=np.uint64)
    with np.errstate(over="ignore"):
        key = (i << np.uint64(32)) | j
        s = _mix(np.asarray([seed], dtype=np.uint64) * _GOLDEN + _GOLDEN)
        z = _mix(_mix(key + _GOLDEN) ^ s)
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
