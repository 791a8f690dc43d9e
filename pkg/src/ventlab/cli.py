"""Command line entry points: run, heatmap, serve, calibrate."""

from __future__ import annotations

import argparse
import sys

from .errors import ScenarioError, SolverFault, StabilityError
from .scenario import available_scenarios, load_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ventlab",
        description="Indoor CO2 simulator, virtual sensor service, and ventilation game.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="headless batch simulation writing a probe trace CSV")
    run.add_argument("--scenario", required=True, help="bundled name or path to a scenario file")
    run.add_argument("--minutes", type=float, required=True, help="simulated duration")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--sample-every", type=float, default=10.0, help="trace cadence, seconds")
    run.add_argument("--snapshot-every", type=float, default=None,
                     help="also save field snapshots at this cadence, seconds")

    hm = sub.add_parser("heatmap", help="export a probe-grid heatmap from a trace")
    hm.add_argument("--trace", required=True, help="trace CSV produced by `run`")
    hm.add_argument("--t", type=float, required=True, help="time of interest, seconds")
    hm.add_argument("--height", required=True, choices=["G", "T", "C"])
    hm.add_argument("--out", default=None, help="output directory (default: next to trace)")

    srv = sub.add_parser("serve", help="HTTP service for the interactive game")
    srv.add_argument("--scenario", required=True)
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--seed", type=int, default=0)
    srv.add_argument("--time-scale", type=float, default=1.0,
                     help="simulated seconds per wall second")
    srv.add_argument("--tick", type=float, default=0.25, help="wall seconds per tick")
    srv.add_argument("--log-dir", default=None, help="write per-session event logs here")
    srv.add_argument("--ui", default=None, help="static directory to serve at /")

    cal = sub.add_parser("calibrate", help="sweep emission/mixing scales against the pilot target")
    cal.add_argument("--scenario", default="pilot-office")
    cal.add_argument("--target-ppm", type=float, default=1635.0)
    cal.add_argument("--target-minutes", type=float, default=90.0)
    cal.add_argument("--window-minutes", type=float, default=15.0)
    cal.add_argument("--out", default=None, help="write calibration.json here")

    ls = sub.add_parser("scenarios", help="list bundled scenarios")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "scenarios":
            for name in available_scenarios():
                print(name)
            return 0

        if args.command == "run":
            from .batch import run_headless

            scenario = load_scenario(args.scenario)
            result = run_headless(
                scenario,
                duration_s=args.minutes * 60.0,
                out_dir=args.out,
                sample_every_s=args.sample_every,
                snapshot_every_s=args.snapshot_every,
            )
            print(f"wrote {result['rows_written']} samples to {result['trace']}")
            return 0

        if args.command == "heatmap":
            from .batch import render_heatmap

            result = render_heatmap(args.trace, args.t, args.height, args.out)
            print(f"wrote {result['csv']} and {result['png']}")
            return 0

        if args.command == "calibrate":
            from .batch import calibrate

            scenario = load_scenario(args.scenario)
            summary = calibrate(
                scenario,
                target_ppm=args.target_ppm,
                target_minutes=args.target_minutes,
                window_minutes=args.window_minutes,
                out_dir=args.out,
            )
            best = summary["best"]
            print(
                f"best: emission x{best['emission_scale']}, diffusivity "
                f"x{best['diffusivity_scale']} -> {best['corner_max_at_target']} ppm "
                f"({'bracket PASS' if best['bracket_ok'] else 'bracket MISS'})"
            )
            return 0 if best["bracket_ok"] else 1

        if args.command == "serve":
            import uvicorn

            from .service import create_app

            scenario = load_scenario(args.scenario)
            app = create_app(
                scenario=scenario,
                seed=args.seed,
                time_scale=args.time_scale,
                tick_wall_s=args.tick,
                log_dir=args.log_dir,
                ui_dir=args.ui,
            )
            uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
            return 0
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except (StabilityError, SolverFault) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
