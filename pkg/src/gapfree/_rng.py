"""Counter-based splitmix64 generator with Box-Muller normals.

Every variate is a pure function of ``(seed, stream_index, position)``, so a
stream can be replayed exactly and distinct streams never share state.
"""

import numpy as np

_U64 = np.uint64
_MASK = (1 << 64) - 1
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MUL1 = _U64(0xBF58476D1CE4E5B9)
_MUL2 = _U64(0x94D049BB133111EB)
_STREAM_SALT = 0xD1B54A32D192ED03


def _mix(z):
    # splitmix64 finaliser; uint64 arithmetic wraps modulo 2**64
    z = (z ^ (z >> _U64(30))) * _MUL1
    z = (z ^ (z >> _U64(27))) * _MUL2
    return z ^ (z >> _U64(31))


def _check_u64(value, name):
    value = int(value)
    if not 0 <= value <= _MASK:
        raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")
    return value


def derive_seed(*parts):
    """Fold integers into a single 64-bit seed."""
    acc = np.array([0x6A09E667F3BCC909], dtype=np.uint64)
    for part in parts:
        acc = _mix((acc ^ np.array([int(part) & _MASK], dtype=np.uint64)) + _GOLDEN)
    return int(acc[0])


class RngStream:
    """Reproducible stream of uniform and standard-normal variates.

    Parameters
    ----------
    seed : int
        64-bit unsigned master seed.
    stream_index : int
        64-bit unsigned substream selector; typically one per trial.

    Notes
    -----
    The stream keeps a position counter, so one instance must not be
    consumed from several threads at once. Create one stream per trial.
    """

    def __init__(self, seed=0, stream_index=0):
        self.seed = _check_u64(seed, "seed")
        self.stream_index = _check_u64(stream_index, "stream_index")
        self._key = _U64(derive_seed(self.seed, self.stream_index ^ _STREAM_SALT))
        self._position = 0

    def __repr__(self):
        return (f"RngStream(seed={self.seed}, stream_index={self.stream_index}, "
                f"position={self._position})")

    @property
    def position(self):
        return self._position

    def uniforms(self, count):
        """``count`` doubles in (0, 1], 53 random bits each."""
        idx = np.arange(self._position + 1, self._position + 1 + count, dtype=np.uint64)
        self._position += count
        with np.errstate(over="ignore"):
            bits = _mix(self._key + idx * _GOLDEN)
        return ((bits >> _U64(11)).astype(np.float64) + 1.0) * 2.0**-53

    def normals(self, count):
        """``count`` standard-normal variates via the Box-Muller transform."""
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs)
        radius = np.sqrt(-2.0 * np.log(u[0::2]))
        angle = 2.0 * np.pi * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count]
