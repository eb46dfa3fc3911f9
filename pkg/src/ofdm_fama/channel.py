"""Correlated fading channels: block fading and tapped-delay-line profiles.

Every tap carries an N-port vector with the aperture covariance sigma^2 *
Sigma, scaled by the tap power.  Time evolution is a Jakes-spectrum
sum-of-sinusoids per eigen-process, colored across ports through the
covariance eigen basis, so replay is exact given the RNG stream and the
ensemble temporal autocorrelation is J0(2 pi f_D tau).
"""

from dataclasses import dataclass

import numpy as np

from .geometry import SpatialModel, sample_correlated_batch
from .phy_tx import used_subcarrier_bins

__all__ = [
    "TapProfile",
    "load_tap_profile",
    "ChannelRealization",
    "gen_block_fading",
    "gen_tdl",
    "to_frequency",
]

# Arrival angles per sum-of-sinusoids process; >= 32 keeps the process
# close to Gaussian while staying cheap to advance.
JAKES_ANGLES = 32


@dataclass(frozen=True)
class TapProfile:
    delays_s: np.ndarray   # nondecreasing, seconds
    powers: np.ndarray     # linear, sums to 1

    def __post_init__(self):
        d = np.asarray(self.delays_s, dtype=float)
        p = np.asarray(self.powers, dtype=float)
        if d.size == 0 or d.size != p.size:
            raise ValueError("profile needs matching, nonempty delay/power lists")
        if (d < 0).any() or (np.diff(d) < 0).any():
            raise ValueError("delays must be nonnegative and nondecreasing")
        if abs(p.sum() - 1.0) > 1e-9 or (p < 0).any():
            raise ValueError("powers must be nonnegative and sum to 1")
        object.__setattr__(self, "delays_s", d)
        object.__setattr__(self, "powers", p)

    @classmethod
    def single_tap(cls):
        return cls(delays_s=np.zeros(1), powers=np.ones(1))


def load_tap_profile(path) -> TapProfile:
    """Read `delay_ns power_db` lines ('#' comments), normalize, sort by delay."""
    delays, powers_db = [], []
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 2:
                raise ValueError(f"bad profile line: {raw.rstrip()}")
            delays.append(float(fields[0]) * 1e-9)
            powers_db.append(float(fields[1]))
    powers = 10.0 ** (np.asarray(powers_db) / 10.0)
    order = np.argsort(np.asarray(delays), kind="stable")
    return TapProfile(
        delays_s=np.asarray(delays)[order],
        powers=(powers / powers.sum())[order],
    )


@dataclass
class ChannelRealization:
    """Per-(tx, port, tap) gains, frozen (block) or evolving in time (tdl)."""

    mode: str                     # "block" | "tdl"
    num_tx: int
    n_ports: int
    tap_delay_samples: np.ndarray
    tap_powers: np.ndarray
    doppler_hz: float
    gains: np.ndarray = None      # block mode: [tx, port] at the single tap
    # tdl sum-of-sinusoids parameters, shapes [tx, tap, N, JAKES_ANGLES]
    sos_omega: np.ndarray = None
    sos_amp: np.ndarray = None
    coloring: np.ndarray = None   # [port, N] = gain * U sqrt(Lambda)

    def tap_gains(self, times) -> np.ndarray:
        """Gains sampled at `times` (seconds): [tx, port, tap, n_times]."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.mode == "block":
            out = self.gains[:, :, None, None]
            return np.broadcast_to(out, out.shape[:3] + (times.size,)).copy()
        if self.doppler_hz == 0.0:
            z = np.sum(self.sos_amp, axis=3)[..., None]  # static: phase = 0
            g = np.einsum("pl,utlc->uptc", self.coloring, z)
            g = g * np.sqrt(self.tap_powers)[None, None, :, None]
            return np.broadcast_to(g, g.shape[:3] + (times.size,)).copy()
        # i.i.d. processes z[tx, tap, proc, time], then color across ports
        phase = self.sos_omega[..., None] * times
        z = np.einsum("utlm,utlmc->utlc", self.sos_amp, np.exp(1j * phase))
        g = np.einsum("pl,utlc->uptc", self.coloring, z)
        return g * np.sqrt(self.tap_powers)[None, None, :, None]


def gen_block_fading(model: SpatialModel, num_tx: int, rng) -> ChannelRealization:
    """One independent correlated draw per transmit antenna; flat in time."""
    if num_tx < 1:
        raise ValueError("num_tx must be >= 1")
    return ChannelRealization(
        mode="block",
        num_tx=num_tx,
        n_ports=model.geometry.n_ports,
        tap_delay_samples=np.zeros(1, dtype=int),
        tap_powers=np.ones(1),
        doppler_hz=0.0,
        gains=sample_correlated_batch(model, num_tx, rng),
    )


def gen_tdl(model: SpatialModel, profile: TapProfile, num_tx: int,
            doppler_hz: float, sample_rate: float, duration: float,
            rng) -> ChannelRealization:
    """TDL realization with Jakes evolution; delays quantized to samples."""
    if doppler_hz < 0:
        raise ValueError("doppler_hz must be nonnegative")
    if num_tx < 1:
        raise ValueError("num_tx must be >= 1")
    if duration < 1e-3:
        raise ValueError("duration must cover at least one subframe")
    if model.eigvals is None:
        raise ValueError("model has no eigen basis; call eigendecompose first")
    n = model.geometry.n_ports
    n_taps = profile.powers.size
    m = JAKES_ANGLES
    # one rotation offset plus M phases per (tx, tap, eigen-process); the
    # random rotation makes the ensemble autocorrelation exactly J0
    rot = rng.uniform(size=(num_tx, n_taps, n, 1))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(num_tx, n_taps, n, m))
    theta = 2.0 * np.pi * (np.arange(m) + rot) / m
    return ChannelRealization(
        mode="tdl",
        num_tx=num_tx,
        n_ports=n,
        tap_delay_samples=np.rint(profile.delays_s * sample_rate).astype(int),
        tap_powers=profile.powers.copy(),
        doppler_hz=float(doppler_hz),
        sos_omega=2.0 * np.pi * doppler_hz * np.cos(theta),
        sos_amp=np.exp(1j * phases) / np.sqrt(m),
        coloring=model.gain * (model.eigvecs * np.sqrt(model.eigvals)),
    )


def to_frequency(ch: ChannelRealization, nfft: int, n_used: int,
                 symbol_times) -> np.ndarray:
    """Per-subcarrier response at each symbol: [tx, port, symbol, subcarrier].

    Sampled-tap model: H[b] = sum_tap g_tap * exp(-2j pi b d_tap / nfft)
    evaluated on the FFT bins carrying the used subcarriers.
    """
    if n_used > nfft:
        raise ValueError("more used subcarriers than FFT bins")
    bins = used_subcarrier_bins(nfft, n_used)
    times = np.atleast_1d(np.asarray(symbol_times, dtype=float))
    gains = ch.tap_gains(times)  # [tx, port, tap, time]
    twiddle = np.exp(-2j * np.pi * np.outer(ch.tap_delay_samples, bins) / nfft)
    return np.einsum("upac,am->upcm", gains, twiddle)
