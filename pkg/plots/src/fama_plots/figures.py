"""Figure builders, one per result CSV, keyed by recipe name.

Every builder draws onto a supplied matplotlib Figure from a validated
Table and nothing else, so rendering is a pure function of the CSV bytes.
All grouping iterates in sorted order to keep artist order deterministic.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["FigureSpec", "FIGURES"]


@dataclass(frozen=True)
class FigureSpec:
    name: str
    csv: str
    required: tuple
    builder: callable
    title: str


def _unique(values):
    return sorted(set(values.tolist()))


def _grid_label(n1, n2):
    return f"{int(n1)}x{int(n2)}"


# -- threshold-table figures --------------------------------------------------


def _check_bars(table, fig, value_col="value"):
    """Horizontal bars of measured values with per-check threshold ticks."""
    ax = fig.add_subplot(111)
    checks = [str(c) for c in table["check"]]
    values = table[value_col]
    y = np.arange(len(checks))
    ax.barh(y, np.maximum(values, 0.0), color="#4878a8")
    for i, (v, t) in enumerate(zip(values, table["threshold"])):
        ax.text(0.99, i, f"value {v:.3g} / threshold {t:.3g}",
                ha="right", va="center", fontsize=8,
                transform=ax.get_yaxis_transform())
    ax.set_yticks(y, checks, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("measured value")


def build_structural_checks(table, fig):
    _check_bars(table, fig)


def build_oracle_equivalence(table, fig):
    _check_bars(table, fig)


def build_covariance_fidelity(table, fig):
    ax = fig.add_subplot(111)
    labels = [_grid_label(a, b) for a, b in zip(table["n1"], table["n2"])]
    x = np.arange(len(labels))
    ax.bar(x, table["max_abs_err"], width=0.5, color="#4878a8",
           label="max abs error")
    ax.plot(x, table["tol"], "r--", label="tolerance")
    ax.set_xticks(x, labels)
    ax.set_xlabel("port grid")
    ax.set_ylabel("covariance error")
    ax.legend()


# -- port-control figures -----------------------------------------------------


def build_training_lengths(table, fig):
    ax = fig.add_subplot(111)
    for strategy in _unique(table["strategy"]):
        for n_rf in _unique(table["n_rf"]):
            mask = table.rows_where(strategy=strategy, n_rf=n_rf)
            if not mask.any():
                continue
            order = np.argsort(table["n_ports"][mask])
            ax.plot(table["n_ports"][mask][order], table["length"][mask][order],
                    marker="o", markersize=3,
                    label=f"{strategy}, $N_{{RF}}$={int(n_rf)}")
    ax.set_xlabel("ports $N$")
    ax.set_ylabel("training subframes")
    ax.legend(fontsize=7, ncols=2)


def build_fig11_training(table, fig):
    ax = fig.add_subplot(111)
    for strategy in _unique(table["strategy"]):
        mask = table.rows_where(strategy=strategy)
        subframes = _unique(table["subframe"][mask])
        mean_sinr = [float(np.mean(table["avg_sinr"][mask & (table["subframe"] == s)]))
                     for s in subframes]
        ax.plot(subframes, 10.0 * np.log10(np.maximum(mean_sinr, 1e-12)),
                marker=".", label=f"strategy {strategy}")
        running = mask & (table["stage"] == "running")
        if running.any():
            ax.axvline(float(np.min(table["subframe"][running])),
                       linestyle=":", color="gray", linewidth=1)
    ax.set_xlabel("subframe")
    ax.set_ylabel("mean post-IRC SINR (dB)")
    ax.legend()


# -- rate figures -------------------------------------------------------------


def build_outage_anchor(table, fig):
    ax = fig.add_subplot(111)
    labels = ("p_out", "c_gamma", "m_gain")
    x = np.arange(len(labels))
    values = [float(table[c][0]) for c in labels]
    ax.bar(x, values, width=0.5, color=("#a84848", "#4878a8", "#48a878"))
    for i, v in enumerate(values):
        ax.text(i, v, f"{v:.4g}", ha="center", va="bottom", fontsize=8)
    ax.set_xticks(x, labels)
    ax.set_title(f"target {float(table['gamma_db'][0]):g} dB, "
                 f"N={_grid_label(table['n1'][0], table['n2'][0])}, "
                 f"U={int(table['users'][0])}", fontsize=9)


def build_table2_nstar(table, fig):
    ax = fig.add_subplot(111)
    order = np.argsort(table["n1"])
    ax.plot(table["n1"][order], table["rate"][order], marker="o")
    star = table["is_n_star"] == 1.0
    if star.any():
        n1 = float(table["n1"][star][0])
        ax.plot(n1, float(table["rate"][star][0]), "r*", markersize=14,
                label=f"$N^*$ = {_grid_label(n1, n1)}")
        ax.legend()
    ax.set_xlabel("grid side $n_1 = n_2$")
    ax.set_ylabel("cutoff rate (bits/symbol)")


def build_rate_bounds(table, fig):
    ax = fig.add_subplot(111)
    for n1 in _unique(table["n1"]):
        for qm in _unique(table["qm"]):
            mask = table.rows_where(n1=n1, qm=qm) & (table["users"] > 1)
            if not mask.any():
                continue
            order = np.argsort(table["users"][mask])
            users = table["users"][mask][order]
            label = f"N={_grid_label(n1, n1)}, $Q_m$={int(qm)}"
            line, = ax.plot(users, table["ami"][mask][order], marker="o",
                            label=label + " AMI")
            ax.plot(users, table["cutoff"][mask][order], marker="s",
                    linestyle="--", color=line.get_color(),
                    label=label + " cutoff")
    ax.set_xlabel("users $U$")
    ax.set_ylabel("rate (bits/symbol)")
    ax.legend(fontsize=6, ncols=2)


def build_fig2_rate_surface(table, fig):
    n1s, n2s = _unique(table["n1"]), _unique(table["n2"])
    for panel, metric in enumerate(("outage_rate", "ami", "cutoff")):
        ax = fig.add_subplot(1, 3, panel + 1, projection="3d")
        z = np.full((len(n1s), len(n2s)), np.nan)
        for i, a in enumerate(n1s):
            for j, b in enumerate(n2s):
                mask = table.rows_where(n1=a, n2=b)
                if mask.any():
                    z[i, j] = float(table[metric][mask][0])
        xx, yy = np.meshgrid(n2s, n1s)
        ax.plot_surface(xx, yy, z, cmap="viridis", edgecolor="k",
                        linewidth=0.2)
        ax.set_xlabel("$N_2$", fontsize=8)
        ax.set_ylabel("$N_1$", fontsize=8)
        ax.set_title(metric, fontsize=9)
        ax.tick_params(labelsize=7)


def build_fig6_gain_vs_se(table, fig):
    ax = fig.add_subplot(111)
    for system in _unique(table["system"]):
        mask = table.rows_where(system=system)
        ses = _unique(table["se"][mask])
        envelope = [float(np.max(table["m_gain"][mask & (table["se"] == s)]))
                    for s in ses]
        n1 = table["n1"][mask][0]
        ax.plot(ses, envelope, marker="o",
                label=f"{str(system).upper()} ({_grid_label(n1, n1)})")
    ax.set_xlabel("spectral efficiency (bits/s/Hz)")
    ax.set_ylabel("multiplexing gain envelope")
    ax.legend()


def build_mobility_gain(table, fig):
    ax = fig.add_subplot(111)
    dopplers = _unique(table["doppler_hz"])
    gains = [float(table["gain"][table.rows_where(doppler_hz=d)][0])
             for d in dopplers]
    x = np.arange(len(dopplers))
    ax.bar(x, gains, width=0.5, color="#4878a8")
    ax.set_xticks(x, [f"{d:g} Hz" for d in dopplers])
    ax.set_xlabel("Doppler")
    ax.set_ylabel("multiplexing gain")
    ax.set_yticks(range(0, int(max(gains)) + 2))


def build_fig4_bler_vs_n(table, fig):
    """Log-BLER against total port count, one line per (W, MCS)."""
    ax = fig.add_subplot(111)
    for w1 in _unique(table["w1"]):
        for mcs in _unique(table["mcs_index"]):
            mask = table.rows_where(w1=w1, mcs_index=mcs)
            if not mask.any():
                continue
            ports = table["n1"][mask] * table["n2"][mask]
            order = np.argsort(ports)
            bler = table["bler"][mask][order]
            floor = 0.5 / float(np.max(table["blocks"][mask]))
            ax.semilogy(ports[order], np.maximum(bler, floor), marker="o",
                        label=f"W={w1:g}$\\lambda$, MCS {int(mcs)}")
    ax.set_xlabel("ports $N$")
    ax.set_ylabel("BLER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)


FIGURES = {spec.name: spec for spec in (
    FigureSpec("covariance_fidelity", "covariance_fidelity.csv",
               ("n1", "n2", "max_abs_err", "tol"),
               build_covariance_fidelity, "Correlated-draw covariance error"),
    FigureSpec("structural_checks", "structural_checks.csv",
               ("check", "value", "threshold"),
               build_structural_checks, "Structural invariants"),
    FigureSpec("oracle_equivalence", "oracle_equivalence.csv",
               ("check", "instances", "value", "threshold"),
               build_oracle_equivalence, "Oracle equivalence"),
    FigureSpec("training_lengths", "training_lengths.csv",
               ("n_ports", "n_rf", "strategy", "length"),
               build_training_lengths, "Training length vs port count"),
    FigureSpec("outage_anchor", "outage_anchor.csv",
               ("gamma_db", "n1", "n2", "users", "p_out", "c_gamma", "m_gain"),
               build_outage_anchor, "Outage anchor"),
    FigureSpec("table2_nstar", "table2_nstar.csv",
               ("n1", "n2", "rate", "is_n_star"),
               build_table2_nstar, "Sufficient port count search"),
    FigureSpec("rate_bounds", "rate_bounds.csv",
               ("n1", "n2", "users", "qm", "ami", "cutoff"),
               build_rate_bounds, "AMI and cutoff rate"),
    FigureSpec("fig2_rate_surface", "fig2_rate_surface.csv",
               ("n1", "n2", "outage_rate", "ami", "cutoff"),
               build_fig2_rate_surface, "Rates over the port grid"),
    FigureSpec("fig4_bler_vs_n", "fig4_bler_vs_n.csv",
               ("mcs_index", "w1", "n1", "n2", "blocks", "bler"),
               build_fig4_bler_vs_n, "BLER vs port count"),
    FigureSpec("fig6_gain_vs_se", "fig6_gain_vs_se.csv",
               ("system", "n1", "users", "se", "m_gain"),
               build_fig6_gain_vs_se, "Gain envelope vs spectral efficiency"),
    FigureSpec("mobility_gain", "mobility_gain.csv",
               ("doppler_hz", "gain", "bler"),
               build_mobility_gain, "Gain under mobility"),
    FigureSpec("fig11_training", "fig11_training.csv",
               ("strategy", "seed", "subframe", "stage", "avg_sinr"),
               build_fig11_training, "Training traces"),
)}
