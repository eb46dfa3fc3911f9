"""Semi-analytical rate engine for the running stage.

Draws block-fading channel realizations with best-port selection, then
evaluates outage rate, achievable mutual information (AMI), and cutoff rate
from the post-IRC statistics.  A symmetric grid search on top locates the
port count N* beyond which adding ports buys less than a threshold rate.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import FasGeometry, build_covariance, eigendecompose
from .modulation import ModulationScheme, scheme_for_qm
from .phy_tx import Numerology, default_numerology
from .rng import stream

__all__ = [
    "RateSample",
    "NStarResult",
    "CRITERIA",
    "target_sinr",
    "draw_rate_samples",
    "outage_rate",
    "ami",
    "cutoff_rate",
    "evaluate_criterion",
    "approximate_n_star",
]

CRITERIA = ("outage_rate", "ami", "cutoff_rate")

DEFAULT_NUM_SAMPLES = 10_000
DEFAULT_MC_POINTS = 64

# Candidate grids past 20x20 are outside the regime of interest; reaching
# the cap without the rate flattening indicates a misconfiguration.
N_STAR_CAP = 20

_CHUNK = 512
_LN2 = math.log(2.0)


@dataclass
class RateSample:
    """One channel realization reduced to its post-selection statistics."""

    avg_sinr: float       # post-IRC subframe SINR, linear
    h: np.ndarray         # desired channel at the selected ports
    sigma_hat: np.ndarray # interference-plus-noise covariance at those ports
    seed: tuple           # (master_seed, realization index) for symbol draws


@dataclass(frozen=True)
class NStarResult:
    n_star: int
    n1: int
    n2: int
    history: tuple  # (n1, value) per evaluated candidate


def target_sinr(se: float) -> float:
    """Linear SINR a modulation-and-coding SE needs: 2^se - 1."""
    if se < 0:
        raise ValueError("spectral efficiency must be nonnegative")
    return 2.0 ** se - 1.0


def draw_rate_samples(geometry: FasGeometry, n_rf: int, users: int,
                      snr_db: float, num_samples: int = DEFAULT_NUM_SAMPLES,
                      master_seed: int = 0) -> list:
    """Monte-Carlo rate samples for one FAS configuration.

    Each realization draws U correlated port-gain vectors (one per BS
    antenna), selects the min(n_rf, N) ports with highest per-port SINR, and
    records the desired channel, the exact interference-plus-noise
    covariance, and the resulting post-IRC SINR h^H Sigma^-1 h.

    Realization i always consumes its own RNG stream keyed by (master_seed,
    i), independent of the geometry, so sweeps over port counts reuse common
    random numbers.
    """
    if users < 1:
        raise ValueError("users must be >= 1")
    if num_samples < 1:
        raise ValueError("need at least one sample")
    model = eigendecompose(build_covariance(geometry))
    n = geometry.n_ports
    n_sel = min(n_rf, n)
    noise_var = 10.0 ** (-snr_db / 10.0)
    coloring = (model.eigvecs * np.sqrt(model.eigvals)).T  # [N, N], right factor
    samples = []
    for start in range(0, num_samples, _CHUNK):
        count = min(_CHUNK, num_samples - start)
        z = np.empty((count, users, 2 * n))
        for i in range(count):
            z[i] = stream(master_seed, "rates", start + i).standard_normal((users, 2 * n))
        alpha = (z[..., 0::2] + 1j * z[..., 1::2]) / np.sqrt(2.0)
        g = alpha @ coloring                                  # [count, U, N]
        p_des = np.abs(g[:, 0, :]) ** 2
        p_int = np.sum(np.abs(g[:, 1:, :]) ** 2, axis=1) + noise_var
        order = np.argsort(-p_des / p_int, axis=1)[:, :n_sel]  # [count, n_sel]
        h = np.take_along_axis(g[:, 0, :], order, axis=1)
        hi = np.take_along_axis(g[:, 1:, :], order[:, None, :], axis=2)
        sigma = np.einsum("sud,sue->sde", hi, hi.conj())
        sigma[:, np.arange(n_sel), np.arange(n_sel)] += noise_var
        v = np.linalg.solve(np.linalg.cholesky(sigma), h[..., None])[..., 0]
        a = np.sum(np.abs(v) ** 2, axis=1)
        for i in range(count):
            samples.append(RateSample(avg_sinr=float(a[i]), h=h[i],
                                      sigma_hat=sigma[i],
                                      seed=(master_seed, start + i)))
    return samples


def outage_rate(samples, gamma: float, users: int, tbs: int,
                num: Numerology):
    """(p_out, outage rate, multiplexing gain) at target SINR gamma.

    p_out is the fraction of realizations whose subframe-average SINR falls
    below gamma; the rate assumes the BS keeps transmitting tbs bits per
    subframe to each of the U users.
    """
    if len(samples) == 0:
        raise ValueError("need at least one sample")
    sinr = np.array([s.avg_sinr for s in samples])
    p_out = float(np.mean(sinr < gamma))
    m = users * (1.0 - p_out)
    c_gamma = m * tbs / num.n_re_total
    return p_out, c_gamma, m


def _whitened_sinr(samples) -> np.ndarray:
    """h^H Sigma^-1 h per sample, recomputed from the stored pair."""
    h = np.stack([s.h for s in samples])
    sigma = np.stack([s.sigma_hat for s in samples])
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise ValueError("interference covariance not positive definite") from exc
    v = np.linalg.solve(chol, h[..., None])[..., 0]
    return np.sum(np.abs(v) ** 2, axis=1)


def _symbol_noise(samples, mc_points: int) -> np.ndarray:
    """CN(0,1) draws [n_samples, mc_points], one stream per realization."""
    out = np.empty((len(samples), mc_points), dtype=complex)
    for i, s in enumerate(samples):
        rng = stream(s.seed[0], "metric", s.seed[1])
        z = rng.standard_normal(2 * mc_points)
        out[i] = (z[0::2] + 1j * z[1::2]) / np.sqrt(2.0)
    return out


def _log_likelihoods(a, zeta, points):
    """log p(y|x) up to an x-independent constant, shape [S, mc, x0, x].

    Whitening the IRC model by the covariance factor reduces each
    realization to a scalar channel y = sqrt(a) x0 + zeta with unit-variance
    noise, so the exponent is -|sqrt(a)(x0 - x) + zeta|^2 and the |zeta|^2
    term common to all x drops out.
    """
    diff = points[:, None] - points[None, :]          # x0 - x
    t = np.sqrt(a)[:, None, None, None]
    cross = (diff.real[None, None] * zeta.real[:, :, None, None]
             + diff.imag[None, None] * zeta.imag[:, :, None, None])
    return -(t * t * np.abs(diff)[None, None] ** 2 + 2.0 * t * cross)


def _lse(x, axis):
    m = np.max(x, axis=axis, keepdims=True)
    return np.squeeze(m + np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)),
                      axis=axis)


def _scheme(scheme) -> ModulationScheme:
    return scheme_for_qm(scheme) if isinstance(scheme, (int, np.integer)) else scheme


def ami(samples, scheme, mc_points: int = DEFAULT_MC_POINTS) -> float:
    """Achievable mutual information per user, bits per symbol.

    Bit-interleaved mutual information of the post-IRC channel under the
    Gaussian interference-plus-noise likelihood; Monte Carlo over the noise
    with an exact average over the transmitted point and both bit values.
    """
    scheme = _scheme(scheme)
    qm = scheme.qm
    a = _whitened_sinr(samples)
    zeta = _symbol_noise(samples, mc_points)
    bits = scheme.labels  # [P, qm]
    total = 0.0
    count = 0
    for start in range(0, len(samples), _CHUNK):
        sl = slice(start, min(start + _CHUNK, len(samples)))
        logp = _log_likelihoods(a[sl], zeta[sl], scheme.points)
        den = _lse(logp, axis=3)                      # [S, mc, x0]
        for i in range(qm):
            num0 = _lse(logp[..., bits[:, i] == 0], axis=3)
            num1 = _lse(logp[..., bits[:, i] == 1], axis=3)
            num = np.where(bits[:, i][None, None, :] == 0, num0, num1)
            total += np.sum(num - den) / _LN2
        count += logp.shape[0] * logp.shape[1] * logp.shape[2]
    return float(np.clip(qm + total / count, 0.0, qm))


def cutoff_rate(samples, scheme, mc_points: int = DEFAULT_MC_POINTS):
    """(average Bhattacharyya factor B, cutoff rate qm*(1 - log2(1+B)))."""
    scheme = _scheme(scheme)
    qm = scheme.qm
    a = _whitened_sinr(samples)
    zeta = _symbol_noise(samples, mc_points)
    bits = scheme.labels
    total = 0.0
    count = 0
    for start in range(0, len(samples), _CHUNK):
        sl = slice(start, min(start + _CHUNK, len(samples)))
        logp = _log_likelihoods(a[sl], zeta[sl], scheme.points)
        for i in range(qm):
            lse0 = _lse(logp[..., bits[:, i] == 0], axis=3)
            lse1 = _lse(logp[..., bits[:, i] == 1], axis=3)
            own = np.where(bits[:, i][None, None, :] == 0, lse0, lse1)
            other = np.where(bits[:, i][None, None, :] == 0, lse1, lse0)
            total += np.sum(np.exp(0.5 * (other - own)))
        count += logp.shape[0] * logp.shape[1] * logp.shape[2]
    b = float(np.clip(total / (count * qm), 0.0, 1.0))
    return b, qm * (1.0 - math.log2(1.0 + b))


def evaluate_criterion(criterion: str, samples, users: int,
                       criterion_args: dict, num: Numerology = None) -> float:
    """Scalar rate (bit/s/Hz) for one sample set under the named criterion.

    outage_rate needs {"gamma", "tbs"}; ami and cutoff_rate need {"qm"} and
    accept {"mc_points"}.
    """
    if criterion == "outage_rate":
        num = default_numerology() if num is None else num
        _, c_gamma, _ = outage_rate(samples, criterion_args["gamma"], users,
                                    criterion_args["tbs"], num)
        return c_gamma
    mc = criterion_args.get("mc_points", DEFAULT_MC_POINTS)
    if criterion == "ami":
        return ami(samples, criterion_args["qm"], mc)
    if criterion == "cutoff_rate":
        return cutoff_rate(samples, criterion_args["qm"], mc)[1]
    raise ValueError(f"unknown criterion {criterion!r}")


def approximate_n_star(w, n_rf: int, users: int, eps_c: float,
                       criterion: str, criterion_args: dict,
                       snr_db: float = 35.0,
                       num_samples: int = DEFAULT_NUM_SAMPLES,
                       master_seed: int = 0) -> NStarResult:
    """Smallest symmetric grid where one more row/column of ports adds
    less than eps_c bit/s/Hz.

    Walks N1 = N2 upward from floor(sqrt(n_rf)), evaluating the criterion
    with common random numbers so successive estimates share their noise,
    and stops at the first increment <= eps_c.
    """
    if eps_c <= 0:
        raise ValueError("eps_c must be positive")
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    w1, w2 = (float(w[0]), float(w[1])) if np.ndim(w) else (float(w), float(w))

    def rate_at(n1):
        geo = FasGeometry(n1, n1, w1, w2)
        samples = draw_rate_samples(geo, n_rf, users, snr_db,
                                    num_samples, master_seed)
        return evaluate_criterion(criterion, samples, users, criterion_args)

    n1 = max(1, math.isqrt(n_rf))
    c_prev = rate_at(n1)
    history = [(n1, c_prev)]
    while True:
        n1 += 1
        if n1 > N_STAR_CAP:
            raise RuntimeError(
                f"rate never flattened by {N_STAR_CAP}x{N_STAR_CAP}; "
                "loosen eps_c or check the configuration")
        c_new = rate_at(n1)
        history.append((n1, c_new))
        if c_new - c_prev <= eps_c:
            break
        c_prev = c_new
    return NStarResult(n_star=n1 * n1, n1=n1, n2=n1, history=tuple(history))
