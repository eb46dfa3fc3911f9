"""Receive chain: OFDM demodulation, channel estimation, IRC equalization.

The equalizer is MMSE interference-rejection combining across the RF-chain
branches: w = h^H (h h^H + Sigma_hat)^-1 with the amplitude renormalized so
beta * w * h = 1.  The subframe figure of merit is the average SINR
1 / mean(|beta w residual|^2) over the data REs.
"""

from dataclasses import dataclass

import numpy as np

from .phy_tx import DATA, Numerology, ResourceGrid, _data_order_index

__all__ = [
    "RxBranchData",
    "IrcState",
    "ofdm_demodulate",
    "estimate_channel",
    "irc_weights",
    "estimate_interference_cov",
    "equalize_subframe",
    "per_port_sinr",
    "SINR_CAP",
]

SINR_CAP = 1e12

# Diagonal loading for the pilot-residual covariance: eps * trace / N_RF.
_LOADING_EPS = 1e-6


def ofdm_demodulate(time_samples: np.ndarray, num: Numerology) -> ResourceGrid:
    """Exact inverse of ofdm_modulate (unitary FFT, CP stripped)."""
    time_samples = np.asarray(time_samples)
    if time_samples.size != num.subframe_samples:
        raise ValueError(f"expected {num.subframe_samples} samples")
    bins = num.used_bins()
    symbols = np.empty((num.n_symb, num.n_used), dtype=complex)
    scale = np.sqrt(num.nfft)
    pos = 0
    for n in range(num.n_symb):
        pos += num.cp_lengths[n]
        spectrum = np.fft.fft(time_samples[pos:pos + num.nfft]) / scale
        symbols[n] = spectrum[bins]
        pos += num.nfft
    mask = np.full((num.n_symb, num.n_used), DATA, dtype=np.int8)
    mask[num.pilot_symbol, :] = 2
    return ResourceGrid(symbols=symbols, mask=mask)


def estimate_channel(received: np.ndarray, pilots: np.ndarray, mode: str,
                     num: Numerology, truth: np.ndarray = None) -> np.ndarray:
    """Channel grid [n_symb, n_used] for one branch.

    "ideal" returns the genie truth.  "least_squares" divides the received
    pilot column by the known pilots and holds the per-subcarrier estimate
    across time (every subcarrier carries a pilot, so no frequency
    interpolation is needed).
    """
    if mode == "ideal":
        if truth is None:
            raise ValueError("ideal estimation requires the true response")
        return np.asarray(truth).copy()
    if mode != "least_squares":
        raise ValueError(f"unknown estimation mode {mode!r}")
    col = np.asarray(received)[num.pilot_symbol, :] / np.asarray(pilots)
    return np.broadcast_to(col, (num.n_symb, num.n_used)).copy()


def irc_weights(h_vec: np.ndarray, sigma_hat: np.ndarray):
    """IRC combining weights: w = h^H (h h^H + Sigma_hat)^-1, beta = 1/|w h|."""
    h = np.asarray(h_vec, dtype=complex).reshape(-1)
    s = np.atleast_2d(np.asarray(sigma_hat, dtype=complex))
    try:
        w = np.conj(np.linalg.solve(s + np.outer(h, np.conj(h)), h))
    except np.linalg.LinAlgError as e:
        raise ValueError("singular interference covariance") from e
    wh = abs(w @ h)
    if wh == 0:
        raise ValueError("degenerate channel: w.h = 0")
    return w, 1.0 / wh


@dataclass
class IrcState:
    cov_mode: str           # "fixed" | "dynamic"
    sigma_hat: np.ndarray   # [N_RF, N_RF] Hermitian PD
    noise_var: float


def estimate_interference_cov(mode: str, branch_data=None, *, users: int = None,
                              gain: float = 1.0, sigma_selected: np.ndarray = None,
                              noise_var: float) -> IrcState:
    """Interference-plus-noise covariance across the RF chains.

    "fixed": the ensemble closed form (U-1) sigma^2 Sigma_selected +
    noise_var I.  "dynamic": pilot-residual sample covariance plus diagonal
    loading eps*trace/N_RF.
    """
    if mode == "fixed":
        if users is None or sigma_selected is None:
            raise ValueError("fixed mode needs users and the selected-port covariance")
        sigma_selected = np.asarray(sigma_selected, dtype=complex)
        n_rf = sigma_selected.shape[0]
        sig = (users - 1) * gain**2 * sigma_selected + noise_var * np.eye(n_rf)
        return IrcState(cov_mode="fixed", sigma_hat=sig, noise_var=noise_var)
    if mode != "dynamic":
        raise ValueError(f"unknown covariance mode {mode!r}")
    resid = branch_data.pilot_residuals()  # [N_RF, N_RS]
    n_rf, n_rs = resid.shape
    if n_rs == 0:
        raise ValueError("dynamic covariance estimation needs pilot observations")
    sig = (resid @ resid.conj().T) / n_rs
    sig = sig + (_LOADING_EPS * np.trace(sig).real / n_rf) * np.eye(n_rf)
    return IrcState(cov_mode="dynamic", sigma_hat=sig, noise_var=noise_var)


@dataclass
class RxBranchData:
    """Extracted per-chain subframe data, all in the shared data-RE order."""

    y: np.ndarray        # [N_RF, 936] received data REs
    h: np.ndarray        # [N_RF, 936] desired-channel estimates at data REs
    y_pilot: np.ndarray  # [N_RF, 72] received pilot REs
    h_pilot: np.ndarray  # [N_RF, 72] channel estimates at pilot REs
    x_pilot: np.ndarray  # [72] known pilot symbols

    @classmethod
    def from_grids(cls, received, channel, num: Numerology, pilots):
        """Build from per-chain received/channel grids [N_RF, n_symb, n_used]."""
        received = np.asarray(received)
        channel = np.asarray(channel)
        ns, ms = _data_order_index(num)
        return cls(
            y=received[:, ns, ms],
            h=channel[:, ns, ms],
            y_pilot=received[:, num.pilot_symbol, :],
            h_pilot=channel[:, num.pilot_symbol, :],
            x_pilot=np.asarray(pilots),
        )

    def pilot_residuals(self) -> np.ndarray:
        return self.y_pilot - self.h_pilot * self.x_pilot[None, :]


def equalize_subframe(branch_data: RxBranchData, irc: IrcState,
                      x_true: np.ndarray = None):
    """IRC-equalize all data REs.

    Returns (x_hat[936], avg_sinr, post_sinr[936]).  avg_sinr inverts the
    mean residual power: the genie residual x_hat - x_true when x_true is
    given (calibration), else the Sigma_hat-predicted error power (blind).
    post_sinr is the blind per-RE prediction used by the soft demapper.

    Implementation: with u = Sigma_hat^-1 h and g = h^H u (real, positive)
    the matrix-inversion identity collapses beta w to u^H / g, so
    x_hat = u^H y / g, beta w h = 1 exactly, and the predicted residual
    power per RE is 1/g.
    """
    h = branch_data.h           # [N_RF, L]
    y = branch_data.y
    u = np.linalg.solve(irc.sigma_hat, h)           # [N_RF, L]
    g = np.einsum("kl,kl->l", np.conj(h), u).real   # h^H Sigma^-1 h per RE
    g = np.maximum(g, 1.0 / SINR_CAP)
    x_hat = np.einsum("kl,kl->l", np.conj(u), y) / g
    post_sinr = np.minimum(g, SINR_CAP)
    if x_true is not None:
        resid_power = np.mean(np.abs(x_hat - np.asarray(x_true)) ** 2)
    else:
        resid_power = np.mean(1.0 / g)
    avg_sinr = SINR_CAP if resid_power <= 0 else min(1.0 / resid_power, SINR_CAP)
    return x_hat, avg_sinr, post_sinr


def per_port_sinr(branch_data: RxBranchData, cap: float = SINR_CAP) -> np.ndarray:
    """Measured per-chain (per-port) subframe SINR from pilot residuals.

    Single-branch form of the subframe average: the interference-plus-noise
    power at chain k is the mean pilot-residual power, and the SINR inverts
    the mean per-RE inverse |h|^2-to-power ratio over the data REs.
    """
    p = np.mean(np.abs(branch_data.pilot_residuals()) ** 2, axis=1)  # [N_RF]
    h2 = np.abs(branch_data.h) ** 2
    h2 = np.maximum(h2, 1.0 / cap)
    inv = np.mean(p[:, None] / h2, axis=1)
    return np.minimum(1.0 / np.maximum(inv, 1.0 / cap), cap)
