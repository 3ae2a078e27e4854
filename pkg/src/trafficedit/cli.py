"""Command line entry point.

Subcommands:
    simulate  run a scenario (optionally from a config) and export trajectories
    edit      run keyframe edits from a config file
    bench     wall-clock characterization of search and refinement
    plan      plan a user path through way-points

Examples:
    trafficedit simulate --scenario curvy_road --out out/sim --seed 1
    trafficedit edit --config examples/teaser.json --out out/teaser
    trafficedit bench --scenario curvy_road --out out/bench
    trafficedit plan --scenario curvy_road --waypoints "5,0;80,7;160,3.5" --out out/plan
"""

from __future__ import annotations

import argparse
import json
import sys

from trafficedit import orchestrator
from trafficedit.orchestrator import BenchGuardError, RunConfig


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _parse_waypoints(text: str) -> list:
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        x, y = chunk.split(",")
        points.append((float(x), float(y)))
    return points


def _load_config(args, require_config: bool = False) -> RunConfig:
    if args.config:
        config = RunConfig.from_file(args.config)
    elif require_config:
        raise ValueError("this subcommand needs --config")
    else:
        config = RunConfig(scenario=args.scenario, duration=args.duration)
    if args.scenario:
        config.scenario = args.scenario
    if args.seed is not None:
        config.seed = args.seed
    if args.dt is not None:
        config.dt = args.dt
    if args.dtt is not None:
        config.lattice_dt = args.dtt
    if args.iters is not None:
        config.iters = args.iters
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trafficedit", description=__doc__.split("\n", 1)[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_based=True):
        p.add_argument("--scenario", help="bundled scenario name or file path")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--dt", type=float, default=None, help="simulation timestep (s)")
        p.add_argument("--dtt", type=float, default=None, help="lattice timestep (s)")
        p.add_argument("--iters", type=int, default=None, help="gradient iterations")
        if config_based:
            p.add_argument("--config", help="run configuration JSON")
            p.add_argument("--duration", type=float, default=12.0)

    p_sim = sub.add_parser("simulate", help="simulate and export trajectories")
    common(p_sim)

    p_edit = sub.add_parser("edit", help="apply keyframe edits from a config")
    common(p_edit)

    p_bench = sub.add_parser("bench", help="timing characterization")
    p_bench.add_argument("--scenario", default="curvy_road")
    p_bench.add_argument("--out", required=True)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--iters", type=int, default=100)
    p_bench.add_argument("--dt", type=str, default=None, help="comma list of simulation timesteps")
    p_bench.add_argument("--dtt", type=str, default=None, help="comma list of lattice timesteps")
    p_bench.add_argument(
        "--allow-fine-lattice",
        action="store_true",
        help="permit lattice timesteps at or below 0.1 s despite the memory cost",
    )

    p_plan = sub.add_parser("plan", help="plan a user path through way-points")
    p_plan.add_argument("--scenario", required=True)
    p_plan.add_argument("--waypoints", required=True, help='semicolon-separated "x,y" pairs')
    p_plan.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            config = _load_config(args)
            config.edits = []
            metrics = orchestrator.run(config, args.out)
            print(f"simulated {metrics['frames']} frames in {metrics['sim_seconds']:.3f} s -> {args.out}")
        elif args.command == "edit":
            config = _load_config(args, require_config=True)
            metrics = orchestrator.run(config, args.out)
            for e in metrics["edits"]:
                status = "met" if e["met"] else "unmet"
                err = max(e["keyframe_errors_m"])
                print(f"edit {e['vehicle']} @ {e['time']} s: {status} (error {err:.3f} m, {e['iterations']} iters)")
        elif args.command == "bench":
            results = orchestrator.bench(
                args.scenario,
                args.out,
                search_dtt=_float_list(args.dtt) if args.dtt else orchestrator.BENCH_SEARCH_DTT,
                adjoint_dt=_float_list(args.dt) if args.dt else orchestrator.BENCH_ADJOINT_DT,
                iters=args.iters,
                allow_fine_lattice=args.allow_fine_lattice,
                seed=args.seed,
            )
            print(f"{'lattice dt (s)':>15} {'search time (s)':>16}")
            for row in results["search"]:
                print(f"{row['lattice_dt']:>15} {row['seconds']:>16.3f}")
            print(f"{'sim dt (s)':>15} {'adjoint time (s)':>16}")
            for row in results["adjoint"]:
                print(f"{row['dt']:>15} {row['seconds']:>16.3f}")
        elif args.command == "plan":
            result = orchestrator.plan(args.scenario, _parse_waypoints(args.waypoints), args.out)
            print(f"planned path {result['path_id']} length {result['length']:.1f} m -> {args.out}")
    except BenchGuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - single CLI boundary
        print(f"error [{args.command}]: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
