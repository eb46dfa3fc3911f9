"""Transmit chain: numerology, resource grid, pilots, OFDM modulation.

One subframe carries 14 OFDM symbols over 72 used subcarriers (6 PRB x 12).
One full symbol column holds pilots; the other 936 resource elements carry
data.  The 10/9 cyclic-prefix pattern makes a subframe exactly 1920 samples
(1 ms at 1.92 MHz).
"""

from dataclasses import dataclass

import numpy as np

from .coding import encode
from .mcs import McsEntry
from .modulation import map_qam
from .scrambling import scramble

__all__ = [
    "Numerology",
    "ResourceGrid",
    "DATA",
    "PILOT",
    "default_numerology",
    "used_subcarrier_bins",
    "assemble_grid",
    "extract_data",
    "ofdm_modulate",
    "transmit_subframe",
]

# Resource-element tags.
EMPTY, DATA, PILOT = 0, 1, 2


def used_subcarrier_bins(nfft: int, n_used: int) -> np.ndarray:
    """FFT bin of each grid column: subcarriers straddle DC, DC unused."""
    if n_used >= nfft:
        raise ValueError("used subcarriers must fit inside the FFT with a DC gap")
    half = n_used // 2
    offsets = np.concatenate((np.arange(-half, 0), np.arange(1, half + 1)))
    return offsets % nfft


@dataclass(frozen=True)
class Numerology:
    nfft: int = 128
    n_prb: int = 6
    n_sc_rb: int = 12
    n_symb: int = 14
    scs_hz: float = 15e3
    # long CP on symbols 0 and 7, short elsewhere; tiles 1 ms exactly
    cp_lengths: tuple = (10, 9, 9, 9, 9, 9, 9, 10, 9, 9, 9, 9, 9, 9)
    pilot_symbol: int = 2

    def __post_init__(self):
        if len(self.cp_lengths) != self.n_symb:
            raise ValueError("one CP length per symbol required")

    @property
    def n_used(self) -> int:
        return self.n_prb * self.n_sc_rb

    @property
    def n_re_total(self) -> int:
        return self.n_symb * self.n_used

    @property
    def n_data(self) -> int:
        return self.n_re_total - self.n_used  # one pilot column

    @property
    def sample_rate_hz(self) -> float:
        return self.nfft * self.scs_hz

    @property
    def subframe_samples(self) -> int:
        return sum(self.cp_lengths) + self.n_symb * self.nfft

    def symbol_start_samples(self) -> np.ndarray:
        """Sample index where each symbol (including its CP) begins."""
        per_symbol = np.asarray(self.cp_lengths) + self.nfft
        return np.concatenate(([0], np.cumsum(per_symbol)[:-1]))

    def used_bins(self) -> np.ndarray:
        return used_subcarrier_bins(self.nfft, self.n_used)


def default_numerology() -> Numerology:
    return Numerology()


@dataclass
class ResourceGrid:
    symbols: np.ndarray  # complex [n_symb, n_used]
    mask: np.ndarray     # int tags, same shape

    def data_values(self) -> np.ndarray:
        return self.symbols[self.mask == DATA]  # frequency fastest, then time


def _data_order_index(num: Numerology):
    """(symbol, subcarrier) indices of data REs, frequency fastest then time."""
    ns, ms = np.meshgrid(np.arange(num.n_symb), np.arange(num.n_used), indexing="ij")
    keep = ns != num.pilot_symbol
    return ns[keep], ms[keep]


def pilot_values(pilot_seed: int, num: Numerology) -> np.ndarray:
    """Known QPSK pilot column derived from a seed."""
    rng = np.random.default_rng(np.random.SeedSequence((int(pilot_seed), 0x70A5)))
    bits = rng.integers(0, 2, size=2 * num.n_used)
    return map_qam(bits, 2)


def assemble_grid(data_symbols: np.ndarray, pilot_seed: int, num: Numerology) -> ResourceGrid:
    """Place 936 data symbols and the seeded pilot column into a grid."""
    data_symbols = np.asarray(data_symbols)
    if data_symbols.size != num.n_data:
        raise ValueError(f"expected {num.n_data} data symbols, got {data_symbols.size}")
    symbols = np.zeros((num.n_symb, num.n_used), dtype=complex)
    mask = np.full((num.n_symb, num.n_used), DATA, dtype=np.int8)
    mask[num.pilot_symbol, :] = PILOT
    symbols[num.pilot_symbol, :] = pilot_values(pilot_seed, num)
    ns, ms = _data_order_index(num)
    symbols[ns, ms] = data_symbols
    return ResourceGrid(symbols=symbols, mask=mask)


def extract_data(grid: ResourceGrid, num: Numerology) -> np.ndarray:
    """Data REs in the same frequency-then-time order used by assemble_grid."""
    ns, ms = _data_order_index(num)
    return grid.symbols[ns, ms]


def ofdm_modulate(grid: ResourceGrid, num: Numerology) -> np.ndarray:
    """Unitary-IFFT modulation with per-symbol CP; output length 1920."""
    bins = num.used_bins()
    out = np.empty(num.subframe_samples, dtype=complex)
    pos = 0
    scale = np.sqrt(num.nfft)
    for n in range(num.n_symb):
        spectrum = np.zeros(num.nfft, dtype=complex)
        spectrum[bins] = grid.symbols[n]
        body = np.fft.ifft(spectrum) * scale
        cp = num.cp_lengths[n]
        out[pos:pos + cp] = body[-cp:]
        out[pos + cp:pos + cp + num.nfft] = body
        pos += cp + num.nfft
    return out


def transmit_subframe(info_bits: np.ndarray, mcs: McsEntry, codec: str,
                      user_id: int, num: Numerology) -> ResourceGrid:
    """Full per-user TX chain: encode, scramble, map, assemble."""
    n_b = num.n_data * mcs.qm
    coded = encode(codec, np.asarray(info_bits, dtype=np.uint8), n_b)
    scrambled = scramble(coded, user_id)
    return assemble_grid(map_qam(scrambled, mcs.qm), user_id, num)
