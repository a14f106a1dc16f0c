"""Command-line surface.

Subcommands::

    paspc params enumerate --v 10 --t 3 --m 4 [--json|--csv]
    paspc rates sweep --m 4 --snr-start 15 --snr-stop 30 --step 0.5
                      [--gamma G] [--csv PATH] [--plot PATH | --no-plot]
    paspc rates crossing --v 10 --t 3 --s 77 --m 4 [--snr-lo L --snr-hi H]
    paspc sim run --config cfg.json [--seed S]
    paspc sim operating-point --config cfg.json [--seed S]

Report paths that write delimited output also render a matplotlib figure
alongside it (suppress with --no-plot / omit the plot path in the config).
The worker count is taken from the PASPC_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .analysis import CrossingNotFoundError, crossing_point, rate_sweep, write_rate_csv
from .pipeline import FeasibilityError, enumerate_feasible
from .simulate import (
    BudgetExceededError,
    ConfigError,
    SimConfig,
    find_operating_point,
    operating_point_json,
    run_montecarlo,
    write_sim_csv,
)

ENUM_COLUMNS = ["gamma", "s", "n_c", "k_c", "n", "gamma_n", "R"]


def _enum_rows(params_list):
    for p in params_list:
        yield {
            "gamma": round(p.gamma, 4),
            "s": p.s,
            "n_c": p.n_c,
            "k_c": p.k_c,
            "n": p.n,
            "gamma_n": p.gamma_n,
            "R": round(p.rate, 4),
        }


def _cmd_params_enumerate(args) -> int:
    feasible = enumerate_feasible(args.v, args.t, args.m)
    rows = list(_enum_rows(feasible))
    if args.json:
        print(json.dumps(rows, indent=2))
    elif args.csv:
        print(",".join(ENUM_COLUMNS))
        for r in rows:
            print(",".join(f"{r[c]:.4f}" if c in ("gamma", "R") else str(r[c]) for c in ENUM_COLUMNS))
    else:
        widths = {c: max(len(c), 8) for c in ENUM_COLUMNS}
        print("  ".join(c.rjust(widths[c]) for c in ENUM_COLUMNS))
        for r in rows:
            cells = [
                f"{r[c]:.4f}".rjust(widths[c]) if c in ("gamma", "R") else str(r[c]).rjust(widths[c])
                for c in ENUM_COLUMNS
            ]
            print("  ".join(cells))
        print(f"# {len(rows)} feasible shortenings for (v={args.v}, t={args.t}, m={args.m})")
    if args.json or args.csv:
        print(f"feasible count: {len(rows)}", file=sys.stderr)
    return 0


def _cmd_rates_sweep(args) -> int:
    if args.step <= 0:
        raise ConfigError("--step must be positive")
    n_steps = int(round((args.snr_stop - args.snr_start) / args.step))
    grid = [args.snr_start + i * args.step for i in range(n_steps + 1)]
    points = rate_sweep(args.m, grid, gamma=args.gamma)
    if args.csv:
        with open(args.csv, "w", newline="") as fp:
            write_rate_csv(points, fp)
        print(f"wrote {args.csv}", file=sys.stderr)
    else:
        write_rate_csv(points, sys.stdout)
    plot_path = args.plot
    if plot_path is None and args.csv and not args.no_plot:
        plot_path = args.csv.rsplit(".", 1)[0] + ".png"
    if plot_path and not args.no_plot:
        from .plotting import plot_rate_curves

        plot_rate_curves(points, plot_path, gamma=args.gamma)
        print(f"wrote {plot_path}", file=sys.stderr)
    return 0


def _cmd_rates_crossing(args) -> int:
    from .pipeline import derive_frame_params

    params = derive_frame_params(args.v, args.t, args.s, args.m)
    try:
        snr = crossing_point(params, snr_lo=args.snr_lo, snr_hi=args.snr_hi)
    except CrossingNotFoundError as exc:
        print("none")
        print(str(exc), file=sys.stderr)
        return 0
    print(f"{snr:.2f}")
    return 0


def _load_config(args) -> SimConfig:
    with open(args.config) as fp:
        cfg = SimConfig.from_json(fp.read())
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _cmd_sim_run(args) -> int:
    cfg = _load_config(args)
    result = run_montecarlo(cfg)
    payload = result.to_json()
    if cfg.output_json:
        with open(cfg.output_json, "w") as fp:
            fp.write(payload + "\n")
        print(f"wrote {cfg.output_json}", file=sys.stderr)
    else:
        print(payload)
    if cfg.output_csv:
        with open(cfg.output_csv, "w", newline="") as fp:
            write_sim_csv(result, fp)
        print(f"wrote {cfg.output_csv}", file=sys.stderr)
    plot_path = cfg.output_plot
    if plot_path is None and cfg.output_csv:
        plot_path = cfg.output_csv.rsplit(".", 1)[0] + ".png"
    if plot_path:
        from .plotting import plot_sim_result

        plot_sim_result(result, plot_path, target_pe=cfg.target_pe)
        print(f"wrote {plot_path}", file=sys.stderr)
    return 0


def _cmd_sim_operating_point(args) -> int:
    cfg = _load_config(args)
    op = find_operating_point(cfg)
    payload = operating_point_json(op)
    if cfg.output_json:
        with open(cfg.output_json, "w") as fp:
            fp.write(payload + "\n")
        print(f"wrote {cfg.output_json}", file=sys.stderr)
    else:
        print(payload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paspc", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="group", required=True)

    p_params = sub.add_parser("params", help="component-code feasibility")
    params_sub = p_params.add_subparsers(dest="cmd", required=True)
    p_enum = params_sub.add_parser("enumerate", help="feasible shortenings table")
    p_enum.add_argument("--v", type=int, required=True)
    p_enum.add_argument("--t", type=int, required=True)
    p_enum.add_argument("--m", type=int, required=True)
    fmt = p_enum.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    p_enum.set_defaults(func=_cmd_params_enumerate)

    p_rates = sub.add_parser("rates", help="achievable-rate analysis")
    rates_sub = p_rates.add_subparsers(dest="cmd", required=True)
    p_sweep = rates_sub.add_parser("sweep", help="rate-curve sweep (CSV + figure)")
    p_sweep.add_argument("--m", type=int, required=True)
    p_sweep.add_argument("--snr-start", type=float, required=True)
    p_sweep.add_argument("--snr-stop", type=float, required=True)
    p_sweep.add_argument("--step", type=float, required=True)
    p_sweep.add_argument("--gamma", type=float, default=0.0,
                         help="sign-information fraction for the efficiency column")
    p_sweep.add_argument("--csv", type=str, default=None, help="CSV output path (default stdout)")
    p_sweep.add_argument("--plot", type=str, default=None, help="figure output path")
    p_sweep.add_argument("--no-plot", action="store_true")
    p_sweep.set_defaults(func=_cmd_rates_sweep)

    p_cross = rates_sub.add_parser("crossing", help="efficiency/rate crossing SNR")
    p_cross.add_argument("--v", type=int, required=True)
    p_cross.add_argument("--t", type=int, required=True)
    p_cross.add_argument("--s", type=int, required=True)
    p_cross.add_argument("--m", type=int, required=True)
    p_cross.add_argument("--snr-lo", type=float, default=15.0)
    p_cross.add_argument("--snr-hi", type=float, default=30.0)
    p_cross.set_defaults(func=_cmd_rates_crossing)

    p_sim = sub.add_parser("sim", help="Monte Carlo measurement")
    sim_sub = p_sim.add_subparsers(dest="cmd", required=True)
    p_run = sim_sub.add_parser("run", help="block-error sweep from a config file")
    p_run.add_argument("--config", type=str, required=True)
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.set_defaults(func=_cmd_sim_run)

    p_op = sim_sub.add_parser("operating-point", help="minimum SNR meeting the target")
    p_op.add_argument("--config", type=str, required=True)
    p_op.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_op.set_defaults(func=_cmd_sim_operating_point)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FeasibilityError, ValueError, BudgetExceededError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
