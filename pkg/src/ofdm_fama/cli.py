"""Command-line driver: simulate, rates, optimize-n, train-demo, recipes.

Thin sequential wrapper over the harness and rate evaluators.  Exit code 0
on success, 2 on configuration or argument validation errors.
"""

import argparse
import sys
from dataclasses import replace

import numpy as np

from .config import load_config
from .geometry import FasGeometry
from .harness import SimConfig, run_link, run_training_trace, save_rows, save_run
from .phy_tx import default_numerology
from .rates import approximate_n_star, draw_rate_samples, evaluate_criterion
from .recipes import list_recipes, run_recipe

__all__ = ["main"]

_CRITERIA = {"outage": "outage_rate", "ami": "ami", "cutoff": "cutoff_rate"}


def _int_pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated values")
    return int(parts[0]), int(parts[1])


def _float_pair(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated values")
    return float(parts[0]), float(parts[1])


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ofdm-fama",
        description="Link-level simulator and rate analysis for fluid-antenna "
                    "multiple access over OFDM.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one link simulation from a JSON config")
    p.add_argument("--config", required=True, help="JSON config path")
    p.add_argument("--seed", type=int, default=None, help="override master_seed")
    p.add_argument("--quick", action="store_true", help="cut subframes 10x")
    p.add_argument("--out-dir", default="runs")
    p.add_argument("--runid", default="run")

    p = sub.add_parser("rates", help="semi-analytic rate criterion on drawn samples")
    p.add_argument("--criterion", required=True, choices=sorted(_CRITERIA))
    p.add_argument("--w", type=_float_pair, default=(2.0, 2.0), metavar="W1,W2")
    p.add_argument("--n", type=_int_pair, default=(4, 4), metavar="N1,N2")
    p.add_argument("--nrf", type=int, default=4)
    p.add_argument("--u", type=int, default=4)
    p.add_argument("--qm", type=int, default=2, help="bits per symbol (ami/cutoff)")
    p.add_argument("--gamma-db", type=float, default=None, help="outage target, dB")
    p.add_argument("--tbs", type=int, default=None, help="transport block size bits")
    p.add_argument("--snr-db", type=float, default=35.0)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--mc", type=int, default=64, help="noise draws per sample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=None, help="also write a one-row CSV here")

    p = sub.add_parser("optimize-n", help="search the smallest sufficient port grid")
    p.add_argument("--w", type=_float_pair, default=(2.0, 2.0), metavar="W1,W2")
    p.add_argument("--nrf", type=int, default=4)
    p.add_argument("--u", type=int, default=6)
    p.add_argument("--eps", type=float, default=0.02)
    p.add_argument("--criterion", choices=sorted(_CRITERIA), default="cutoff")
    p.add_argument("--qm", type=int, default=2)
    p.add_argument("--gamma-db", type=float, default=None)
    p.add_argument("--tbs", type=int, default=None)
    p.add_argument("--snr-db", type=float, default=35.0)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=None, help="also write the search history here")

    p = sub.add_parser("train-demo", help="trace the port-selection stage machine")
    p.add_argument("--strategy", required=True, choices=("A", "B"))
    p.add_argument("--n", type=_int_pair, default=(8, 8), metavar="N1,N2")
    p.add_argument("--w", type=_float_pair, default=(2.0, 2.0), metavar="W1,W2")
    p.add_argument("--nrf", type=int, default=4)
    p.add_argument("--u", type=int, default=5)
    p.add_argument("--mcs", type=int, default=3)
    p.add_argument("--subframes", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=None, help="also write the trace CSV here")

    p = sub.add_parser("recipes", help="list or run reproduction recipes")
    p.add_argument("action", choices=("list", "run"))
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--quick", action="store_true", help="10x smaller budgets")
    p.add_argument("--out-dir", default="runs")
    return parser


def _cmd_simulate(args) -> int:
    try:
        config, diagnostics = load_config(args.config)
    except OSError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return 2
    if diagnostics:
        for message in diagnostics:
            print(message, file=sys.stderr)
        return 2
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.quick:
        config = replace(config, num_subframes=max(1, config.num_subframes // 10))
    result = run_link(config)
    csv_path, json_path = save_run(result, args.out_dir, args.runid)
    sinr_db = 10.0 * np.log10(max(result.mean_sinr, 1e-30))
    print(f"blocks={len(result.records)} bler={result.bler:.6g} "
          f"mean_sinr_db={sinr_db:.2f} throughput_bits={result.throughput_bits}")
    print(csv_path)
    print(json_path)
    return 0


def _criterion_args(args) -> dict:
    """Evaluator kwargs from CLI flags; raises ValueError when incomplete."""
    name = _CRITERIA[args.criterion]
    if name == "outage_rate":
        if args.gamma_db is None or args.tbs is None:
            raise ValueError("outage criterion needs --gamma-db and --tbs")
        return {"gamma": 10.0 ** (args.gamma_db / 10.0), "tbs": args.tbs}
    crit = {"qm": args.qm}
    if getattr(args, "mc", None):
        crit["mc_points"] = args.mc
    return crit


def _cmd_rates(args) -> int:
    try:
        crit = _criterion_args(args)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return 2
    name = _CRITERIA[args.criterion]
    n1, n2 = args.n
    w1, w2 = args.w
    geo = FasGeometry(n1, n2, w1, w2)
    samples = draw_rate_samples(geo, args.nrf, args.u, args.snr_db,
                                num_samples=args.samples, master_seed=args.seed)
    num = default_numerology()
    value = evaluate_criterion(name, samples, args.u, crit, num)
    groups = np.array_split(np.arange(len(samples)), 10)
    vals = [evaluate_criterion(name, [samples[i] for i in g], args.u, crit, num)
            for g in groups if len(g)]
    stderr = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    print(f"{name}={value:.6g} stderr={stderr:.3g}")
    if args.out_dir:
        row = {"criterion": name, "w1": w1, "w2": w2, "n1": n1, "n2": n2,
               "n_rf": args.nrf, "users": args.u, "value": value,
               "stderr": stderr, "seed": args.seed}
        path = save_rows([row], tuple(row), f"{args.out_dir}/rates_{name}.csv")
        print(path)
    return 0


def _cmd_optimize_n(args) -> int:
    try:
        crit = _criterion_args(args)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return 2
    result = approximate_n_star(args.w, args.nrf, args.u, args.eps,
                                _CRITERIA[args.criterion], crit,
                                snr_db=args.snr_db, num_samples=args.samples,
                                master_seed=args.seed)
    print(f"n_star={result.n1}x{result.n2} ports={result.n_star}")
    for n1, value in result.history:
        print(f"  {n1}x{n1}: {value:.4f}")
    if args.out_dir:
        rows = [{"n1": n1, "n2": n1, "rate": value,
                 "is_n_star": int(n1 == result.n1)}
                for n1, value in result.history]
        path = save_rows(rows, ("n1", "n2", "rate", "is_n_star"),
                         f"{args.out_dir}/optimize_n.csv")
        print(path)
    return 0


def _cmd_train_demo(args) -> int:
    n1, n2 = args.n
    w1, w2 = args.w
    config = SimConfig(users=args.u, geometry=(n1, n2, w1, w2), n_rf=args.nrf,
                       mcs_index=args.mcs, channel="tdl", doppler_hz=0.0,
                       channel_estimation="ideal", cov_mode="fixed",
                       codec="coded", strategy=args.strategy,
                       port_selection="trained", master_seed=args.seed)
    if args.strategy == "B" and args.nrf < 2:
        print("strategy B training needs at least 2 RF chains", file=sys.stderr)
        return 2
    trace = run_training_trace(config, num_subframes=args.subframes)
    flip = next((r.subframe for r in trace if r.stage == "running"), None)
    stages = {}
    for r in trace:
        stages.setdefault(r.stage, []).append(r.avg_sinr)
    for stage, sinrs in stages.items():
        db = 10.0 * np.log10(max(float(np.mean(sinrs)), 1e-30))
        print(f"{stage}: {len(sinrs)} subframes, mean sinr {db:.2f} dB")
    print(f"running stage starts at subframe {flip}")
    if args.out_dir:
        rows = [{"subframe": r.subframe, "stage": r.stage, "ports": r.ports,
                 "avg_sinr": r.avg_sinr, "block_ok": r.block_ok} for r in trace]
        path = save_rows(rows, ("subframe", "stage", "ports", "avg_sinr",
                                "block_ok"),
                         f"{args.out_dir}/train_demo_{args.strategy}.csv")
        print(path)
    return 0


def _cmd_recipes(args) -> int:
    if args.action == "list":
        for recipe in list_recipes():
            print(f"{recipe.name:22s} [{recipe.runtime_class}] {recipe.description}")
        return 0
    if not args.name:
        print("recipes run needs a recipe name", file=sys.stderr)
        return 2
    try:
        paths = run_recipe(args.name, args.out_dir, quick=args.quick)
    except KeyError as e:
        print(e.args[0], file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "simulate": _cmd_simulate,
        "rates": _cmd_rates,
        "optimize-n": _cmd_optimize_n,
        "train-demo": _cmd_train_demo,
        "recipes": _cmd_recipes,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
