"""Channel codec: identity (uncoded) and a rate-matched systematic code.

The coded mode wraps a memory-3 recursive systematic convolutional code
(feedback 1+D+D^3, parity 1+D^2+D^3, the classic turbo constituent) in a
circular-buffer rate matcher, so any transport-block/payload pair from the
MCS table maps to a soft-decodable code.  Decoding is max-log Viterbi on
accumulated LLRs; repeated positions add, punctured positions contribute
zero.
"""

import numpy as np

__all__ = ["CODECS", "encode", "decode"]

CODECS = ("uncoded", "coded")

_M = 3  # encoder memory


def _rsc_tables():
    """Trellis tables indexed by [state, a] where a is the post-feedback bit."""
    n_states = 1 << _M
    nxt = np.zeros((n_states, 2), dtype=np.int64)
    sys_out = np.zeros((n_states, 2), dtype=np.int64)
    par_out = np.zeros((n_states, 2), dtype=np.int64)
    for s in range(n_states):
        d1, d2, d3 = (s >> 2) & 1, (s >> 1) & 1, s & 1
        for a in (0, 1):
            sys_out[s, a] = a ^ d2 ^ d3      # u = a XOR feedback(state)
            par_out[s, a] = a ^ d1 ^ d3      # parity 1+D^2+D^3 on the fed-back bit
            nxt[s, a] = (a << 2) | (d1 << 1) | d2
    return nxt, sys_out, par_out


_NEXT, _SYS, _PAR = _rsc_tables()


def _mother_encode(info_bits: np.ndarray):
    """(systematic, parity) streams of length len(info)+3, trellis terminated."""
    k = info_bits.size
    sys_bits = np.empty(k + _M, dtype=np.uint8)
    par_bits = np.empty(k + _M, dtype=np.uint8)
    s = 0
    for i in range(k):
        u = int(info_bits[i])
        a = u ^ _SYS[s, 0]  # feedback parity; _SYS[s,0] = fb(state)
        sys_bits[i] = u
        par_bits[i] = _PAR[s, a]
        s = _NEXT[s, a]
    for i in range(_M):  # drive state to zero with a = 0
        sys_bits[k + i] = _SYS[s, 0]
        par_bits[k + i] = _PAR[s, 0]
        s = _NEXT[s, 0]
    assert s == 0
    return sys_bits, par_bits


def _rate_match_index(n_info: int, n_out: int) -> np.ndarray:
    """Mother-stream index for each output position.

    Mother stream: systematic (0..m-1) then parity (m..2m-1), m = n_info+3.
    Full copies of the whole stream first; the remainder takes systematic
    bits, then evenly spread parity bits.
    """
    m = n_info + _M
    if n_out < m + 1:
        raise ValueError(f"rate {n_info}/{n_out} too high for the coded mode")
    reps, rem = divmod(n_out, 2 * m)
    parts = [np.tile(np.arange(2 * m), reps)]
    if rem:
        take_sys = min(rem, m)
        parts.append(np.arange(take_sys))
        n_par = rem - take_sys
        if n_par:
            parts.append(m + (np.arange(n_par) * m) // n_par)
    return np.concatenate(parts)


def encode(codec: str, info_bits: np.ndarray, n_out: int) -> np.ndarray:
    """Encode `info_bits` into exactly `n_out` bits."""
    info_bits = np.asarray(info_bits, dtype=np.uint8)
    if codec == "uncoded":
        if info_bits.size != n_out:
            raise ValueError("uncoded mode requires matching lengths")
        return info_bits.copy()
    if codec != "coded":
        raise ValueError(f"unknown codec {codec!r}")
    sys_bits, par_bits = _mother_encode(info_bits)
    mother = np.concatenate((sys_bits, par_bits))
    return mother[_rate_match_index(info_bits.size, n_out)]


def decode(codec: str, llrs: np.ndarray, n_info: int) -> np.ndarray:
    """Recover info bits from LLRs (positive favors 0)."""
    llrs = np.asarray(llrs, dtype=float)
    if codec == "uncoded":
        if llrs.size != n_info:
            raise ValueError("uncoded mode requires matching lengths")
        return (llrs < 0).astype(np.uint8)
    if codec != "coded":
        raise ValueError(f"unknown codec {codec!r}")
    m = n_info + _M
    acc = np.zeros(2 * m)
    np.add.at(acc, _rate_match_index(n_info, llrs.size), llrs)
    return _viterbi(acc[:m], acc[m:], n_info)


def _viterbi(sys_llr: np.ndarray, par_llr: np.ndarray, n_info: int) -> np.ndarray:
    """Max-log sequence decision over the terminated trellis.

    Each destination state encodes the bit `a` that produced it in its top
    position and has exactly two sources (old d3 shifted out), so the
    add-compare-select step vectorizes over all states.
    """
    n_states = 1 << _M
    steps = n_info + _M
    # metric of emitting bit b given LLR L: +L/2 for 0, -L/2 for 1
    sys_sign = 0.5 * (1.0 - 2.0 * _SYS)  # [state, a]
    par_sign = 0.5 * (1.0 - 2.0 * _PAR)
    dests = np.arange(n_states)
    a_of = (dests >> (_M - 1)).astype(np.uint8)
    src0 = (dests & (n_states // 2 - 1)) << 1
    src1 = src0 | 1
    metric = np.full(n_states, -np.inf)
    metric[0] = 0.0
    choice = np.zeros((steps, n_states), dtype=np.uint8)
    for i in range(steps):
        branch = metric[:, None] + sys_sign * sys_llr[i] + par_sign * par_llr[i]
        if i >= n_info:  # termination: only a = 0 branches allowed
            branch[:, 1] = -np.inf
        c0 = branch[src0, a_of]
        c1 = branch[src1, a_of]
        pick1 = c1 > c0
        metric = np.where(pick1, c1, c0)
        choice[i] = (np.where(pick1, src1, src0).astype(np.uint8) << 1) | a_of
        top = metric.max()
        if np.isfinite(top):
            metric = metric - top  # keep magnitudes bounded
    # backtrack from the all-zero terminated state
    s = 0
    decisions = np.empty(steps, dtype=np.uint8)
    for i in range(steps - 1, -1, -1):
        packed = int(choice[i, s])
        a = packed & 1
        prev = packed >> 1
        decisions[i] = _SYS[prev, a]  # emitted systematic bit = info bit
        s = prev
    return decisions[:n_info]
