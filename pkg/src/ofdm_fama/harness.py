"""Multi-user link simulation loop, BLER sweeps, traces, and persistence.

One subframe simulates all U downlink streams; each user terminal then
receives the superposition at its own selected ports, equalizes, decodes,
and scores one transport block.  Users are independent receivers sharing
the same transmitted signals, so they can be evaluated concurrently.

All randomness flows through named, index-keyed streams of the master
seed, making every result a pure function of (config, master_seed).
"""

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, asdict, replace
from importlib import resources

import numpy as np

from ._version import __version__
from .channel import gen_block_fading, gen_tdl, load_tap_profile
from .coding import decode
from .geometry import FasGeometry, build_covariance, eigendecompose
from .mcs import mcs_entry
from .modulation import soft_demap
from .phy_rx import (RxBranchData, equalize_subframe, estimate_channel,
                     estimate_interference_cov, per_port_sinr)
from .phy_tx import (default_numerology, extract_data, pilot_values,
                     transmit_subframe, used_subcarrier_bins)
from .port_control import PortMap, step_stage
from .rng import parallel_map, stream
from .scrambling import gold_sequence

__all__ = [
    "SimConfig",
    "SubframeRecord",
    "RunResult",
    "run_link",
    "iter_subframes",
    "run_training_trace",
    "sweep_multiplexing_gain",
    "wilson_interval",
    "config_hash",
    "save_run",
]

CHANNELS = ("block", "tdl")
ESTIMATION_MODES = ("ideal", "least_squares")
PORT_SELECTION_MODES = ("genie", "trained")

# Early-stop settings for BLER sweeps: decide once the Wilson interval
# clears the threshold, but never on fewer blocks than this.
_MIN_DECISION_BLOCKS = 200
_SWEEP_CHUNK_SUBFRAMES = 25


@dataclass(frozen=True)
class SimConfig:
    """One link-simulation experiment; field names match the JSON schema.

    geometry is (N1, N2, W1, W2): the port grid and its aperture in
    wavelengths.  port_selection picks between per-subframe genie selection
    (the running-stage assumption) and the trained stage machine driven by
    pilot measurements under the configured strategy.  doppler_hz only
    applies to the tdl channel.
    """

    users: int
    geometry: tuple
    n_rf: int
    mcs_index: int
    channel: str = "block"
    doppler_hz: float = 0.0
    snr_db: float = 35.0
    channel_estimation: str = "ideal"
    cov_mode: str = "fixed"
    codec: str = "coded"
    strategy: str = "A"
    port_selection: str = "genie"
    num_subframes: int = 100
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "geometry", tuple(self.geometry))

    @property
    def fas_geometry(self) -> FasGeometry:
        n1, n2, w1, w2 = self.geometry
        return FasGeometry(int(n1), int(n2), float(w1), float(w2))


@dataclass(frozen=True)
class SubframeRecord:
    subframe: int
    user: int
    stage: str       # "genie" or the trained stage in effect this subframe
    ports: tuple
    avg_sinr: float  # subframe-average post-IRC SINR, linear
    block_ok: bool


@dataclass
class RunResult:
    config: SimConfig
    records: list
    bler: float
    mean_sinr: float
    throughput_bits: int
    config_hash: str
    code_version: str


def config_hash(config: SimConfig) -> str:
    text = json.dumps(asdict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


class _LinkEngine:
    """Per-run state: spatial model, TX cache, channels, port machines."""

    def __init__(self, config: SimConfig):
        self.cfg = config
        self.num = default_numerology()
        self.mcs = mcs_entry(config.mcs_index)
        self.model = eigendecompose(build_covariance(config.fas_geometry))
        self.noise_var = 10.0 ** (-config.snr_db / 10.0)
        self.n_ports = self.model.geometry.n_ports
        # uncoded mode fills every data RE, so the block is qm bits per RE
        self.tbs = (self.mcs.tbs if config.codec == "coded"
                    else self.num.n_data * self.mcs.qm)
        self.n_b = self.num.n_data * self.mcs.qm
        self.pilots = [pilot_values(u, self.num) for u in range(config.users)]
        self.descramble = [1.0 - 2.0 * gold_sequence(u, self.n_b)
                           for u in range(config.users)]
        self.bins = used_subcarrier_bins(self.num.nfft, self.num.n_used)
        self.symbol_times = self.num.symbol_start_samples() / self.num.sample_rate_hz
        self.subframe_s = self.num.subframe_samples / self.num.sample_rate_hz
        self.maps = None
        if config.port_selection == "trained":
            self.maps = [PortMap(n_ports=self.n_ports, n_rf=config.n_rf,
                                 strategy=config.strategy)
                         for _ in range(config.users)]
        self.channels = None
        self._static_taps = None  # tap gains cache for doppler-free tdl
        if config.channel == "tdl":
            profile = load_tap_profile(
                str(resources.files("ofdm_fama.data").joinpath("tdl_c.txt")))
            self.channels = [
                gen_tdl(self.model, profile, config.users, config.doppler_hz,
                        self.num.sample_rate_hz, 10.0,
                        stream(config.master_seed, "channel", u))
                for u in range(config.users)
            ]
            if config.doppler_hz == 0.0:
                self._static_taps = [ch.tap_gains(np.zeros(1)) for ch in self.channels]

    def _tap_gains(self, user: int, n_subframe: int) -> np.ndarray:
        """True tap gains at this subframe's symbol times [tx, port, tap, 14]."""
        cfg = self.cfg
        if cfg.channel == "block":
            ch = gen_block_fading(self.model, cfg.users,
                                  stream(cfg.master_seed, "channel", user, n_subframe))
            return ch.tap_gains(self.symbol_times)
        if self._static_taps is not None:
            g = self._static_taps[user]
            return np.broadcast_to(g, g.shape[:3] + (self.symbol_times.size,))
        times = n_subframe * self.subframe_s + self.symbol_times
        return self.channels[user].tap_gains(times)

    def _grid_channel(self, user: int, taps: np.ndarray, ports) -> np.ndarray:
        """Frequency response at the given ports [tx, len(ports), 14, 72]."""
        delays = (np.zeros(1, dtype=int) if self.cfg.channel == "block"
                  else self.channels[user].tap_delay_samples)
        twiddle = np.exp(-2j * np.pi * np.outer(delays, self.bins) / self.num.nfft)
        return np.einsum("upac,am->upcm", taps[:, ports], twiddle)

    def _genie_ports(self, user: int, taps: np.ndarray) -> np.ndarray:
        """Top-n_rf ports by true subframe-average SINR."""
        h_all = self._grid_channel(user, taps, slice(None))  # [tx, N, 14, 72]
        p = np.abs(h_all) ** 2
        own = p[user]
        other = p.sum(axis=0) - own + self.noise_var
        sinr = 1.0 / np.mean(other / np.maximum(own, 1e-30), axis=(1, 2))
        order = np.argsort(-sinr, kind="stable")
        return np.sort(order[:self.cfg.n_rf]), h_all

    def transmit(self, n_subframe: int):
        """All users' subframes: (grids, data symbols, info bits)."""
        cfg = self.cfg
        grids, data, info = [], [], []
        for u in range(cfg.users):
            bits = stream(cfg.master_seed, "tx_bits", u, n_subframe).integers(
                0, 2, self.tbs).astype(np.uint8)
            grid = transmit_subframe(bits, self.mcs, cfg.codec, u, self.num)
            grids.append(grid)
            data.append(extract_data(grid, self.num))
            info.append(bits)
        return grids, data, info

    def receive(self, user: int, n_subframe: int, grids, data, info):
        """One user's receive chain; returns (record, port measurements)."""
        cfg = self.cfg
        taps = self._tap_gains(user, n_subframe)
        if cfg.port_selection == "trained":
            pm = self.maps[user]
            stage, ports = pm.stage, np.asarray(pm.assignment, dtype=int)
            h_true = self._grid_channel(user, taps, ports)
        else:
            stage = "genie"
            ports, h_all = self._genie_ports(user, taps)
            h_true = h_all[:, ports]
        rng = stream(cfg.master_seed, "noise", user, n_subframe)
        shape = (cfg.n_rf, self.num.n_symb, self.num.n_used)
        noise = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
            * math.sqrt(self.noise_var / 2.0)
        x_grids = np.stack([g.symbols for g in grids])       # [tx, 14, 72]
        y = np.einsum("upcm,ucm->pcm", h_true, x_grids) + noise
        if cfg.channel_estimation == "ideal":
            h_est = h_true[user]
        else:
            h_est = np.stack([
                estimate_channel(y[k], self.pilots[user], "least_squares", self.num)
                for k in range(cfg.n_rf)])
        bd = RxBranchData.from_grids(y, h_est, self.num, self.pilots[user])
        if cfg.cov_mode == "fixed":
            sel_cov = self.model.sigma[np.ix_(ports, ports)]
            irc = estimate_interference_cov("fixed", users=cfg.users, gain=1.0,
                                            sigma_selected=sel_cov,
                                            noise_var=self.noise_var)
        else:
            irc = estimate_interference_cov("dynamic", bd, noise_var=self.noise_var)
        x_hat, avg_sinr, post = equalize_subframe(bd, irc, x_true=data[user])
        llr = soft_demap(x_hat, self.mcs.qm, post) * self.descramble[user]
        decoded = decode(cfg.codec, llr, self.tbs)
        record = SubframeRecord(
            subframe=n_subframe,
            user=user,
            stage=stage,
            ports=tuple(int(p) for p in ports),
            avg_sinr=float(avg_sinr),
            block_ok=bool(np.array_equal(decoded, info[user])),
        )
        return record, per_port_sinr(bd)

    def step(self, n_subframe: int, evaluate_users=None) -> list:
        users = range(self.cfg.users) if evaluate_users is None else evaluate_users
        grids, data, info = self.transmit(n_subframe)
        results = parallel_map(
            lambda u: self.receive(u, n_subframe, grids, data, info), users)
        records = []
        for u, (record, measured) in zip(users, results):
            if self.maps is not None:
                self.maps[u] = step_stage(self.maps[u], measured)
            records.append(record)
        return records


def iter_subframes(config: SimConfig, evaluate_users=None):
    """Yield per-subframe record lists; runs until the consumer stops."""
    engine = _LinkEngine(config)
    n = 0
    while True:
        yield engine.step(n, evaluate_users)
        n += 1


def run_link(config: SimConfig) -> RunResult:
    """Simulate config.num_subframes subframes, scoring every user."""
    engine = _LinkEngine(config)
    records = []
    for n in range(config.num_subframes):
        records.extend(engine.step(n))
    ok = sum(r.block_ok for r in records)
    return RunResult(
        config=config,
        records=records,
        bler=(len(records) - ok) / len(records),
        mean_sinr=float(np.mean([r.avg_sinr for r in records])),
        throughput_bits=ok * engine.tbs,
        config_hash=config_hash(config),
        code_version=__version__,
    )


def run_training_trace(config: SimConfig, num_subframes: int = 40) -> list:
    """Trace user 0 through training and running stages.

    Returns one SubframeRecord per subframe with the stage in effect, the
    assigned ports, the measured subframe SINR, and the block outcome.
    """
    cfg = replace(config, port_selection="trained", num_subframes=num_subframes)
    engine = _LinkEngine(cfg)
    return [engine.step(n, evaluate_users=(0,))[0] for n in range(num_subframes)]


def wilson_interval(errors: int, blocks: int, z: float = 1.96):
    """Wilson score interval for a binomial error rate."""
    if blocks <= 0:
        return 0.0, 1.0
    p = errors / blocks
    z2 = z * z
    denom = 1.0 + z2 / blocks
    center = (p + z2 / (2.0 * blocks)) / denom
    half = z * math.sqrt(p * (1.0 - p) / blocks + z2 / (4.0 * blocks * blocks)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def measure_bler(config: SimConfig, threshold: float, max_blocks: int):
    """(bler, errors, blocks) with Wilson early stopping around threshold."""
    errors = blocks = 0
    gen = iter_subframes(config)
    while blocks < max_blocks:
        for _ in range(_SWEEP_CHUNK_SUBFRAMES):
            for r in next(gen):
                blocks += 1
                errors += not r.block_ok
        lo, hi = wilson_interval(errors, blocks)
        if blocks >= _MIN_DECISION_BLOCKS and (lo > threshold or hi < threshold):
            break
    return errors / blocks, errors, blocks


def sweep_multiplexing_gain(base_config: SimConfig, mcs_list, u_range,
                            bler_threshold: float = 1e-2,
                            max_blocks: int = None) -> list:
    """Largest user count whose BLER stays at or below the threshold.

    Binary search over u_range per MCS (BLER is monotone in U up to noise);
    each decision point accumulates blocks until the Wilson interval clears
    the threshold or the block budget is reached (default 100/threshold).
    Returns one dict per MCS: {mcs_index, se, gain, bler, blocks}.
    """
    if not 0.0 < bler_threshold <= 1.0:
        raise ValueError("bler_threshold must be in (0, 1]")
    if max_blocks is None:
        max_blocks = math.ceil(100.0 / bler_threshold)
    candidates = sorted(u_range)
    table = []
    for mcs_index in mcs_list:
        lo, hi, best = 0, len(candidates) - 1, None
        while lo <= hi:
            mid = (lo + hi) // 2
            cfg = replace(base_config, users=candidates[mid], mcs_index=mcs_index)
            bler, _, blocks = measure_bler(cfg, bler_threshold, max_blocks)
            if bler <= bler_threshold:
                best = (candidates[mid], bler, blocks)
                lo = mid + 1
            else:
                hi = mid - 1
        gain, bler, blocks = best if best else (0, 1.0, 0)
        table.append({"mcs_index": mcs_index, "se": mcs_entry(mcs_index).se,
                      "gain": gain, "bler": bler, "blocks": blocks})
    return table


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, tuple):
        return "|".join(str(v) for v in value)
    return str(value)


def save_rows(rows, columns, path):
    """Write dict rows to CSV with a fixed column order; no timestamps."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(row[c]) for c in columns])
    return path


def save_run(result: RunResult, out_dir: str, runid: str):
    """Persist a run as <runid>_<confighash>.csv plus a JSON summary."""
    base = f"{runid}_{result.config_hash}"
    csv_path = os.path.join(out_dir, base + ".csv")
    columns = ("subframe", "user", "stage", "ports", "avg_sinr", "block_ok")
    save_rows([asdict(r) for r in result.records], columns, csv_path)
    summary = {
        "runid": runid,
        "config": asdict(result.config),
        "config_hash": result.config_hash,
        "blocks": len(result.records),
        "bler": result.bler,
        "mean_sinr": result.mean_sinr,
        "throughput_bits": result.throughput_bits,
        "code_version": result.code_version,
    }
    json_path = os.path.join(out_dir, base + ".json")
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path
