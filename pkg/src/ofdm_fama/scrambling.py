"""Per-user bit scrambling with a length-31 Gold sequence.

The sequence XORs onto the coded bits, so applying it twice restores the
input.  The second LFSR is seeded from the user id, which keeps different
users' sequences distinct.
"""

from functools import lru_cache

import numpy as np

__all__ = ["gold_sequence", "scramble"]

# Discard transient so nearby seeds decorrelate.
_WARMUP = 1600


def _lfsr(init31: np.ndarray, taps, n: int) -> np.ndarray:
    """Fibonacci LFSR output, generated 28 bits per step from the recurrence
    x[i+31] = XOR of x[i+t] over taps (all t <= 3, so blocks never overlap)."""
    out = np.empty(n + 31, dtype=np.uint8)
    out[:31] = init31
    filled = 31
    while filled < n + 31:
        s = min(28, n + 31 - filled)
        i = np.arange(filled - 31, filled - 31 + s)
        acc = out[i + taps[0]].copy()
        for t in taps[1:]:
            acc ^= out[i + t]
        out[filled:filled + s] = acc
        filled += s
    return out[:n]


@lru_cache(maxsize=256)
def _cached_sequence(user_id: int, length: int):
    n = _WARMUP + length
    x1_init = np.zeros(31, dtype=np.uint8)
    x1_init[0] = 1
    seed = (user_id + 1) & 0x7FFFFFFF  # nonzero 31-bit initial state
    x2_init = ((seed >> np.arange(31)) & 1).astype(np.uint8)
    seq = _lfsr(x1_init, (0, 3), n) ^ _lfsr(x2_init, (0, 1, 2, 3), n)
    seq = seq[_WARMUP:]
    seq.setflags(write=False)
    return seq


def gold_sequence(user_id: int, length: int) -> np.ndarray:
    """`length` bits of the Gold sequence for this user."""
    if user_id < 0:
        raise ValueError("user_id must be nonnegative")
    return _cached_sequence(int(user_id), int(length))


def scramble(bits: np.ndarray, user_id: int) -> np.ndarray:
    """XOR the user's sequence onto a bit vector (involutory)."""
    bits = np.asarray(bits, dtype=np.uint8)
    return bits ^ gold_sequence(user_id, bits.size)
