"""Gray-labelled QAM mapping and max-log soft demapping.

Bit-to-point tables for QPSK/16QAM/64QAM live in data files; all maps have
unit mean symbol energy.  LLR sign convention: positive means bit 0.
"""

from dataclasses import dataclass
from importlib import resources

import numpy as np

__all__ = ["ModulationScheme", "scheme_for_qm", "map_qam", "demap_hard", "soft_demap"]


@dataclass(frozen=True)
class ModulationScheme:
    qm: int
    points: np.ndarray        # constellation, indexed by the bit label as an integer
    labels: np.ndarray        # bit matrix [2^qm, qm], labels[i] = bits of point i
    # subsets[i][b]: indices of points whose bit i equals b
    subsets: tuple

    @property
    def n_points(self) -> int:
        return 1 << self.qm


def _load_scheme(name: str, qm: int) -> ModulationScheme:
    text = resources.files("ofdm_fama.data").joinpath(f"gray_{name}.csv").read_text()
    points = np.zeros(1 << qm, dtype=complex)
    for line in text.splitlines()[1:]:
        bits, re, im = line.split(",")
        points[int(bits, 2)] = float(re) + 1j * float(im)
    idx = np.arange(1 << qm)
    labels = (idx[:, None] >> np.arange(qm - 1, -1, -1)) & 1
    subsets = tuple(
        tuple(np.nonzero(labels[:, i] == b)[0] for b in (0, 1)) for i in range(qm)
    )
    return ModulationScheme(qm=qm, points=points, labels=labels, subsets=subsets)


_SCHEMES = {}


def scheme_for_qm(qm: int) -> ModulationScheme:
    names = {2: "qpsk", 4: "16qam", 6: "64qam"}
    if qm not in names:
        raise ValueError(f"unsupported modulation order {qm}")
    if qm not in _SCHEMES:
        _SCHEMES[qm] = _load_scheme(names[qm], qm)
    return _SCHEMES[qm]


def map_qam(bits: np.ndarray, qm: int) -> np.ndarray:
    """Map a bit vector (length divisible by qm) to constellation symbols."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size % qm:
        raise ValueError("bit count not divisible by modulation order")
    scheme = scheme_for_qm(qm)
    weights = 1 << np.arange(qm - 1, -1, -1)
    idx = bits.reshape(-1, qm) @ weights
    return scheme.points[idx]


def demap_hard(symbols: np.ndarray, qm: int) -> np.ndarray:
    """Nearest-point decisions back to bits; exact inverse of map_qam."""
    scheme = scheme_for_qm(qm)
    d = np.abs(np.asarray(symbols).reshape(-1, 1) - scheme.points[None, :])
    idx = np.argmin(d, axis=1)
    return scheme.labels[idx].reshape(-1)


def soft_demap(symbols: np.ndarray, qm: int, post_sinr) -> np.ndarray:
    """Max-log LLRs scaled by the per-symbol post-equalization SINR.

    LLR_i = sinr * (min_{bit i = 1} |x - p|^2 - min_{bit i = 0} |x - p|^2),
    so a confident bit 0 gives a large positive LLR.  `post_sinr` is a scalar
    or per-symbol array.
    """
    scheme = scheme_for_qm(qm)
    x = np.asarray(symbols).reshape(-1)
    sinr = np.broadcast_to(np.asarray(post_sinr, dtype=float), x.shape)
    d2 = np.abs(x[:, None] - scheme.points[None, :]) ** 2
    llr = np.empty((x.size, qm))
    for i in range(qm):
        m0 = d2[:, scheme.subsets[i][0]].min(axis=1)
        m1 = d2[:, scheme.subsets[i][1]].min(axis=1)
        llr[:, i] = m1 - m0
    return (llr * sinr[:, None]).reshape(-1)
