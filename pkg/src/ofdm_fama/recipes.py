"""Reproduction recipes: deterministic CSV generators for every shipped study.

Each recipe pins its seeds and Monte-Carlo budgets, writes one CSV with a
documented column set into the output directory, and returns the paths.
Running a recipe twice yields byte-identical files.  `quick` cuts the
Monte-Carlo budgets 10x for smoke runs; where a recipe emits a tolerance
column, the quick tolerance is relaxed 3x to match the smaller budget.
"""

from dataclasses import dataclass, replace

import numpy as np

from .channel import TapProfile, gen_tdl, to_frequency
from .coding import decode
from .geometry import FasGeometry, build_covariance, eigendecompose, \
    sample_correlated_batch
from .harness import SimConfig, run_link, run_training_trace, save_rows, \
    sweep_multiplexing_gain
from .mcs import mcs_entry
from .modulation import soft_demap
from .phy_rx import IrcState, RxBranchData, equalize_subframe, irc_weights, \
    ofdm_demodulate
from .phy_tx import default_numerology, ofdm_modulate, pilot_values, \
    transmit_subframe
from .port_control import SinrTable, select_running, training_length
from .rates import ami, approximate_n_star, cutoff_rate, draw_rate_samples, \
    outage_rate, target_sinr
from .rng import stream
from .scrambling import gold_sequence

__all__ = ["ReproRecipe", "RECIPES", "list_recipes", "run_recipe"]


@dataclass(frozen=True)
class ReproRecipe:
    name: str
    description: str
    runtime_class: str  # "seconds" | "minutes" | "hour"
    columns: tuple
    build: callable     # (out_dir, quick) -> [paths]


def _out(out_dir, name, rows, columns):
    return [save_rows(rows, columns, f"{out_dir}/{name}.csv")]


# -- covariance_fidelity ------------------------------------------------------

def _build_covariance_fidelity(out_dir, quick):
    samples = 20_000 if quick else 200_000
    tol = 0.06 if quick else 0.02
    geo = FasGeometry(4, 4, 2.0, 2.0)
    model = eigendecompose(build_covariance(geo))
    g = sample_correlated_batch(model, samples, stream(101, "misc", 0))
    emp = g.T @ g.conj() / samples  # emp[k, l] = E[g_k conj(g_l)]
    err = float(np.max(np.abs(emp - model.sigma)))
    rows = [{"n1": 4, "n2": 4, "w1": 2.0, "w2": 2.0, "samples": samples,
             "max_abs_err": err, "tol": tol}]
    return _out(out_dir, "covariance_fidelity", rows,
                ("n1", "n2", "w1", "w2", "samples", "max_abs_err", "tol"))


# -- structural_checks --------------------------------------------------------

def _noiseless_chain_errors(codec):
    num = default_numerology()
    mcs = mcs_entry(7)
    tbs = mcs.tbs if codec == "coded" else num.n_data * mcs.qm
    bits = stream(5, "tx_bits", 0, 0).integers(0, 2, tbs).astype(np.uint8)
    grid = transmit_subframe(bits, mcs, codec, 0, num)
    rx = ofdm_demodulate(ofdm_modulate(grid, num), num)
    h = np.ones((1, num.n_symb, num.n_used), dtype=complex)
    bd = RxBranchData.from_grids(rx.symbols[None], h, num, pilot_values(0, num))
    irc = IrcState(cov_mode="fixed", sigma_hat=np.eye(1) * 1e-12, noise_var=1e-12)
    x_hat, _, post = equalize_subframe(bd, irc)
    descramble = 1.0 - 2.0 * gold_sequence(0, num.n_data * mcs.qm)
    llr = soft_demap(x_hat, mcs.qm, post) * descramble
    return int(np.count_nonzero(decode(codec, llr, tbs) != bits))


def _build_structural_checks(out_dir, quick):
    del quick  # exact checks, no Monte-Carlo budget
    num = default_numerology()
    geo = FasGeometry(4, 4, 2.0, 2.0)
    model = build_covariance(geo)
    eig = eigendecompose(model)
    recon = (eig.eigvecs * eig.eigvals) @ eig.eigvecs.conj().T
    rng = stream(7, "misc", 1)
    grid = transmit_subframe(
        rng.integers(0, 2, mcs_entry(7).tbs).astype(np.uint8),
        mcs_entry(7), "coded", 0, num)
    rt = ofdm_demodulate(ofdm_modulate(grid, num), num)
    rows = [
        {"check": "sigma_unit_diag_err",
         "value": float(np.max(np.abs(np.diag(model.sigma) - 1.0))),
         "threshold": 0.0},
        {"check": "sigma_min_eigenvalue",
         "value": float(np.min(np.linalg.eigvalsh(model.sigma))),
         "threshold": -1e-9},
        {"check": "eigen_reconstruction_err",
         "value": float(np.max(np.abs(recon - model.sigma))),
         "threshold": 1e-8},
        {"check": "ofdm_roundtrip_err",
         "value": float(np.max(np.abs(rt.symbols - grid.symbols))),
         "threshold": 1e-10},
        {"check": "grid_data_re_count",
         "value": float(num.n_data), "threshold": 936.0},
        {"check": "noiseless_chain_bit_errors_uncoded",
         "value": float(_noiseless_chain_errors("uncoded")), "threshold": 0.0},
        {"check": "noiseless_chain_bit_errors_coded",
         "value": float(_noiseless_chain_errors("coded")), "threshold": 0.0},
    ]
    return _out(out_dir, "structural_checks", rows,
                ("check", "value", "threshold"))


# -- oracle_equivalence -------------------------------------------------------

def _build_oracle_equivalence(out_dir, quick):
    instances = 100 if quick else 1000
    rng = stream(23, "misc", 0)

    # (a) the solve-based equalizer path against the explicit weight formula
    irc_err = 0.0
    for _ in range(instances):
        n_rf, n_re = 4, 8
        h = (rng.standard_normal((n_rf, n_re)) + 1j * rng.standard_normal((n_rf, n_re)))
        y = (rng.standard_normal((n_rf, n_re)) + 1j * rng.standard_normal((n_rf, n_re)))
        a = rng.standard_normal((n_rf, n_rf)) + 1j * rng.standard_normal((n_rf, n_rf))
        sigma = a @ a.conj().T + 0.1 * np.eye(n_rf)
        bd = RxBranchData(y=y, h=h, y_pilot=y[:, :2], h_pilot=h[:, :2],
                          x_pilot=np.ones(2))
        irc = IrcState(cov_mode="fixed", sigma_hat=sigma, noise_var=0.1)
        x_hat, _, _ = equalize_subframe(bd, irc)
        for l in range(n_re):
            w, beta = irc_weights(h[:, l], sigma)
            ref = beta * (w @ y[:, l])
            irc_err = max(irc_err, abs(x_hat[l] - ref) / max(abs(ref), 1e-30))

    # (b) running-stage selection against a plain sort
    mismatches = 0
    for _ in range(instances):
        n = int(rng.integers(4, 40))
        n_rf = int(rng.integers(1, min(n, 8) + 1))
        gamma = rng.standard_normal(n) ** 2
        gamma[rng.integers(0, n)] = gamma[0]  # inject ties
        table = SinrTable(gamma=gamma, measured=np.ones(n, dtype=bool))
        got = select_running(table, n_rf)
        want = np.sort(sorted(range(n), key=lambda k: (-gamma[k], k))[:n_rf])
        mismatches += int(not np.array_equal(np.sort(got), want))

    # (c) tap-line frequency response against a direct DFT
    num = default_numerology()
    geo = FasGeometry(3, 3, 1.0, 1.0)
    model = eigendecompose(build_covariance(geo))
    profile = TapProfile(delays_s=np.array([0.0, 1.5e-6, 3.1e-6]),
                         powers=np.array([0.5, 0.3, 0.2]))
    ch = gen_tdl(model, profile, 2, 40.0, num.sample_rate_hz, 1.0,
                 stream(23, "channel", 0))
    times = np.array([0.0, 3e-4])
    h = to_frequency(ch, num.nfft, num.n_used, times)
    gains = ch.tap_gains(times)
    bins = num.used_bins()
    dft_err = 0.0
    for m, b in enumerate(bins):
        direct = np.zeros((2, 9, 2), dtype=complex)
        for a_i, d in enumerate(ch.tap_delay_samples):
            direct += gains[:, :, a_i, :] * np.exp(-2j * np.pi * b * d / num.nfft)
        dft_err = max(dft_err, float(np.max(np.abs(h[:, :, :, m] - direct))))

    rows = [
        {"check": "irc_vs_weight_formula", "instances": instances,
         "value": irc_err, "threshold": 1e-9},
        {"check": "selection_vs_full_sort", "instances": instances,
         "value": float(mismatches), "threshold": 0.0},
        {"check": "freq_response_vs_dft", "instances": len(bins),
         "value": dft_err, "threshold": 1e-12},
    ]
    return _out(out_dir, "oracle_equivalence", rows,
                ("check", "instances", "value", "threshold"))


# -- training_lengths ---------------------------------------------------------

def _build_training_lengths(out_dir, quick):
    del quick
    rows = []
    for n in (4, 9, 16, 36, 64, 100, 144, 196, 256):
        for n_rf in (2, 3, 4, 8, 16):
            if n_rf > n:
                continue
            for strategy in ("A", "B"):
                rows.append({"n_ports": n, "n_rf": n_rf, "strategy": strategy,
                             "length": training_length(n, n_rf, strategy)})
    return _out(out_dir, "training_lengths", rows,
                ("n_ports", "n_rf", "strategy", "length"))


# -- outage_anchor ------------------------------------------------------------

def _build_outage_anchor(out_dir, quick):
    samples = 1000 if quick else 10_000
    num = default_numerology()
    geo = FasGeometry(2, 2, 2.0, 2.0)
    s = draw_rate_samples(geo, 4, 4, 35.0, num_samples=samples, master_seed=2024)
    gamma = 10.0 ** 0.5  # 5 dB
    tbs = 1872           # uncoded QPSK payload
    p_out, c_gamma, m = outage_rate(s, gamma, 4, tbs, num)
    rows = [{"gamma_db": 5.0, "n1": 2, "n2": 2, "w1": 2.0, "w2": 2.0,
             "n_rf": 4, "users": 4, "snr_db": 35.0, "samples": samples,
             "seed": 2024, "p_out": p_out, "c_gamma": c_gamma, "m_gain": m}]
    return _out(out_dir, "outage_anchor", rows,
                ("gamma_db", "n1", "n2", "w1", "w2", "n_rf", "users", "snr_db",
                 "samples", "seed", "p_out", "c_gamma", "m_gain"))


# -- table2_nstar -------------------------------------------------------------

def _build_table2_nstar(out_dir, quick):
    samples = 1000 if quick else 10_000
    res = approximate_n_star((2.0, 2.0), 4, 6, 0.02, "cutoff_rate", {"qm": 2},
                             snr_db=35.0, num_samples=samples, master_seed=123)
    rows = [{"n1": n1, "n2": n1, "rate": rate,
             "is_n_star": int(n1 == res.n1)}
            for n1, rate in res.history]
    return _out(out_dir, "table2_nstar", rows, ("n1", "n2", "rate", "is_n_star"))


# -- rate_bounds --------------------------------------------------------------

def _build_rate_bounds(out_dir, quick):
    samples = 1000 if quick else 10_000
    rows = []
    for n in (2, 4):
        for users in (2, 4, 6):
            for qm in (2, 4):
                geo = FasGeometry(n, n, 2.0, 2.0)
                s = draw_rate_samples(geo, 4, users, 35.0, num_samples=samples,
                                      master_seed=55)
                rows.append({"n1": n, "n2": n, "w1": 2.0, "w2": 2.0,
                             "users": users, "n_rf": 4, "qm": qm,
                             "snr_db": 35.0, "samples": samples, "seed": 55,
                             "ami": ami(s, qm),
                             "cutoff": cutoff_rate(s, qm)[1]})
    # single-user high-SNR limit: both metrics approach the QPSK ceiling
    geo = FasGeometry(2, 2, 2.0, 2.0)
    s = draw_rate_samples(geo, 4, 1, 35.0, num_samples=samples, master_seed=55)
    rows.append({"n1": 2, "n2": 2, "w1": 2.0, "w2": 2.0, "users": 1, "n_rf": 4,
                 "qm": 2, "snr_db": 35.0, "samples": samples, "seed": 55,
                 "ami": ami(s, 2), "cutoff": cutoff_rate(s, 2)[1]})
    return _out(out_dir, "rate_bounds", rows,
                ("n1", "n2", "w1", "w2", "users", "n_rf", "qm", "snr_db",
                 "samples", "seed", "ami", "cutoff"))


# -- fig2_rate_surface --------------------------------------------------------

def _build_fig2_rate_surface(out_dir, quick):
    samples = 1000 if quick else 10_000
    num = default_numerology()
    gamma = 10.0 ** 0.5  # uncoded QPSK convention, 5 dB target
    tbs = 1872
    rows = []
    for n1 in (2, 4, 6, 8, 10, 12):
        for n2 in (2, 4, 6, 8, 10, 12):
            geo = FasGeometry(n1, n2, 2.0, 2.0)
            s = draw_rate_samples(geo, 4, 6, 35.0, num_samples=samples,
                                  master_seed=77)
            _, c_gamma, _ = outage_rate(s, gamma, 6, tbs, num)
            rows.append({"n1": n1, "n2": n2, "w1": 2.0, "w2": 2.0, "users": 6,
                         "n_rf": 4, "qm": 2, "gamma_db": 5.0,
                         "samples": samples, "seed": 77,
                         "outage_rate": c_gamma,
                         "ami": ami(s, 2),
                         "cutoff": cutoff_rate(s, 2)[1]})
    return _out(out_dir, "fig2_rate_surface", rows,
                ("n1", "n2", "w1", "w2", "users", "n_rf", "qm", "gamma_db",
                 "samples", "seed", "outage_rate", "ami", "cutoff"))


# -- fig4_bler_vs_n -----------------------------------------------------------

def _build_fig4_bler_vs_n(out_dir, quick):
    subframes = 13 if quick else 125  # 8 users -> 104 / 1000 blocks
    rows = []
    for mcs_index in (3, 7):
        for w in (2.0, 5.0):
            for n in (2, 4, 8):
                cfg = SimConfig(users=8, geometry=(n, n, w, w), n_rf=4,
                                mcs_index=mcs_index, codec="coded",
                                num_subframes=subframes, master_seed=42)
                r = run_link(cfg)
                blocks = len(r.records)
                errors = sum(1 for rec in r.records if not rec.block_ok)
                rows.append({"mcs_index": mcs_index, "codec": "coded",
                             "w1": w, "w2": w, "n1": n, "n2": n, "users": 8,
                             "n_rf": 4, "seed": 42, "blocks": blocks,
                             "errors": errors, "bler": r.bler})
    return _out(out_dir, "fig4_bler_vs_n", rows,
                ("mcs_index", "codec", "w1", "w2", "n1", "n2", "users", "n_rf",
                 "seed", "blocks", "errors", "bler"))


# -- fig6_gain_vs_se ----------------------------------------------------------

def _build_fig6_gain_vs_se(out_dir, quick):
    samples = 1000 if quick else 10_000
    num = default_numerology()
    mcs_indices = (0, 4, 7, 10, 13, 16)
    rows = []
    for system, n in (("fas", 12), ("fpa", 2)):
        for users in (4, 8, 16, 24, 30):
            geo = FasGeometry(n, n, 5.0, 5.0)
            s = draw_rate_samples(geo, 4, users, 35.0, num_samples=samples,
                                  master_seed=7)
            for mcs_index in mcs_indices:
                e = mcs_entry(mcs_index)
                gamma = target_sinr(e.se)
                p_out, _, m = outage_rate(s, gamma, users, e.tbs, num)
                rows.append({"system": system, "n1": n, "n2": n, "w1": 5.0,
                             "w2": 5.0, "n_rf": 4, "users": users,
                             "mcs_index": mcs_index, "se": e.se,
                             "gamma": gamma, "samples": samples, "seed": 7,
                             "p_out": p_out, "m_gain": m})
    return _out(out_dir, "fig6_gain_vs_se", rows,
                ("system", "n1", "n2", "w1", "w2", "n_rf", "users",
                 "mcs_index", "se", "gamma", "samples", "seed", "p_out",
                 "m_gain"))


# -- mobility_gain ------------------------------------------------------------

def _build_mobility_gain(out_dir, quick):
    max_blocks = 1000 if quick else 10_000
    base = SimConfig(users=1, geometry=(4, 4, 5.0, 5.0), n_rf=4, mcs_index=13,
                     channel="tdl", channel_estimation="least_squares",
                     cov_mode="fixed", codec="coded", master_seed=31)
    rows = []
    for doppler in (0.0, 300.0):
        cfg = replace(base, doppler_hz=doppler)
        table = sweep_multiplexing_gain(cfg, [13], range(1, 7),
                                        bler_threshold=1e-2,
                                        max_blocks=max_blocks)
        for entry in table:
            rows.append({"doppler_hz": doppler, "mcs_index": entry["mcs_index"],
                         "se": entry["se"], "threshold": 1e-2,
                         "gain": entry["gain"], "bler": entry["bler"],
                         "blocks": entry["blocks"]})
    return _out(out_dir, "mobility_gain", rows,
                ("doppler_hz", "mcs_index", "se", "threshold", "gain", "bler",
                 "blocks"))


# -- fig11_training -----------------------------------------------------------

def _build_fig11_training(out_dir, quick):
    seeds = range(10) if quick else range(100)
    rows = []
    for strategy in ("A", "B"):
        for seed in seeds:
            # ideal per-user estimation: superposed pilots would otherwise
            # swamp the per-port measurements at this user count
            cfg = SimConfig(users=5, geometry=(8, 8, 2.0, 2.0), n_rf=4,
                            mcs_index=3, channel="tdl", doppler_hz=0.0,
                            channel_estimation="ideal",
                            cov_mode="fixed", codec="coded",
                            strategy=strategy, port_selection="trained",
                            master_seed=seed)
            for rec in run_training_trace(cfg, num_subframes=40):
                rows.append({"strategy": strategy, "seed": seed,
                             "subframe": rec.subframe, "stage": rec.stage,
                             "ports": rec.ports, "avg_sinr": rec.avg_sinr,
                             "block_ok": rec.block_ok})
    return _out(out_dir, "fig11_training", rows,
                ("strategy", "seed", "subframe", "stage", "ports", "avg_sinr",
                 "block_ok"))


RECIPES = {r.name: r for r in (
    ReproRecipe(
        name="covariance_fidelity",
        description="Empirical covariance of 4x4 correlated draws vs the "
                    "closed form; quick: 10x fewer samples, tol 0.02 -> 0.06.",
        runtime_class="seconds",
        columns=("n1", "n2", "w1", "w2", "samples", "max_abs_err", "tol"),
        build=_build_covariance_fidelity),
    ReproRecipe(
        name="structural_checks",
        description="Exact invariants: unit diagonal, PSD, eigen "
                    "reconstruction, OFDM round trip, noiseless chain.",
        runtime_class="seconds",
        columns=("check", "value", "threshold"),
        build=_build_structural_checks),
    ReproRecipe(
        name="oracle_equivalence",
        description="Equalizer vs weight formula, selection vs full sort, "
                    "frequency response vs direct DFT; quick: 100 instances.",
        runtime_class="seconds",
        columns=("check", "instances", "value", "threshold"),
        build=_build_oracle_equivalence),
    ReproRecipe(
        name="training_lengths",
        description="Training-stage length for both strategies over an "
                    "(N <= 256, N_RF) grid.",
        runtime_class="seconds",
        columns=("n_ports", "n_rf", "strategy", "length"),
        build=_build_training_lengths),
    ReproRecipe(
        name="outage_anchor",
        description="5 dB outage at N=2x2, W=[2,2], N_RF=4, U=4, 35 dB; "
                    "quick: 1e3 samples (else 1e4).",
        runtime_class="seconds",
        columns=("gamma_db", "n1", "n2", "w1", "w2", "n_rf", "users",
                 "snr_db", "samples", "seed", "p_out", "c_gamma", "m_gain"),
        build=_build_outage_anchor),
    ReproRecipe(
        name="table2_nstar",
        description="Symmetric port-count search under the cutoff-rate "
                    "criterion (W=[2,2], N_RF=4, U=6, eps 0.02); quick: 1e3 "
                    "samples widens the +-1 match to +-3.",
        runtime_class="minutes",
        columns=("n1", "n2", "rate", "is_n_star"),
        build=_build_table2_nstar),
    ReproRecipe(
        name="rate_bounds",
        description="AMI and cutoff rate across 12 configurations plus the "
                    "single-user high-SNR limit; quick: 1e3 samples.",
        runtime_class="minutes",
        columns=("n1", "n2", "w1", "w2", "users", "n_rf", "qm", "snr_db",
                 "samples", "seed", "ami", "cutoff"),
        build=_build_rate_bounds),
    ReproRecipe(
        name="fig2_rate_surface",
        description="Outage rate, AMI, cutoff rate over the (N1, N2) grid "
                    "at W=[2,2], U=6; quick: 1e3 samples.",
        runtime_class="minutes",
        columns=("n1", "n2", "w1", "w2", "users", "n_rf", "qm", "gamma_db",
                 "samples", "seed", "outage_rate", "ami", "cutoff"),
        build=_build_fig2_rate_surface),
    ReproRecipe(
        name="fig4_bler_vs_n",
        description="Link BLER vs port count for MCS 3/7, W in {2,5}, U=8, "
                    "N_RF=4, block fading; quick: ~100 blocks per point "
                    "(else 1000).",
        runtime_class="minutes",
        columns=("mcs_index", "codec", "w1", "w2", "n1", "n2", "users",
                 "n_rf", "seed", "blocks", "errors", "bler"),
        build=_build_fig4_bler_vs_n),
    ReproRecipe(
        name="fig6_gain_vs_se",
        description="Outage-based multiplexing gain vs user count for a "
                    "12x12 fluid array and a 4-port fixed array (W=[5,5], "
                    "N_RF=4) across MCS targets; quick: 1e3 samples.",
        runtime_class="minutes",
        columns=("system", "n1", "n2", "w1", "w2", "n_rf", "users",
                 "mcs_index", "se", "gamma", "samples", "seed", "p_out",
                 "m_gain"),
        build=_build_fig6_gain_vs_se),
    ReproRecipe(
        name="mobility_gain",
        description="Practical multiplexing gain at MCS 13 over TDL at "
                    "Doppler 0 and 300 Hz; quick: block budget 1e3 "
                    "(else 1e4).",
        runtime_class="minutes",
        columns=("doppler_hz", "mcs_index", "se", "threshold", "gain",
                 "bler", "blocks"),
        build=_build_mobility_gain),
    ReproRecipe(
        name="fig11_training",
        description="40-subframe training traces for strategies A and B "
                    "(N=8x8, W=[2,2], N_RF=4, U=5, TDL); quick: 10 seeds "
                    "(else 100).",
        runtime_class="minutes",
        columns=("strategy", "seed", "subframe", "stage", "ports",
                 "avg_sinr", "block_ok"),
        build=_build_fig11_training),
)}


def list_recipes() -> list:
    return [RECIPES[name] for name in sorted(RECIPES)]


def run_recipe(name: str, out_dir: str, quick: bool = False) -> list:
    if name not in RECIPES:
        raise KeyError(f"unknown recipe {name!r}")
    return RECIPES[name].build(out_dir, quick)
