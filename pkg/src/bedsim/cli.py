"""Command-line entry point.

Exit codes: 0 converged / success, 2 run finished without converging,
3 weight gate rejected activation, 4 validation or configuration error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys

from .errors import BedsimError, GateRejectedError
from .plant import builtin_profiles, get_profile, load_profile
from .runner import export_run, load_scenario, render_heatmap, run
from .server import DEFAULT_PORT, DEFAULT_WS_PORT, MattressServer

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_GATE_REJECTED = 3
EXIT_INVALID = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bedsim",
        description="Pressure-mattress uniform-support simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario headlessly")
    p_run.add_argument("--scenario", required=True, help="scenario JSON file")
    p_run.add_argument("--csv", metavar="DIR", help="export pressures/extensions/trace/report")
    p_run.add_argument("--heatmap", action="store_true", help="print a text pressure heatmap")

    p_serve = sub.add_parser("serve", help="run the tick loop and host remote consoles")
    p_serve.add_argument("--scenario", required=True)
    p_serve.add_argument("--port", type=int, default=DEFAULT_PORT)
    p_serve.add_argument("--ws-port", type=int, default=DEFAULT_WS_PORT)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--fast", action="store_true", help="tick unthrottled")
    p_serve.add_argument("--max-ticks", type=int, default=None,
                         help="stop after this many ticks (default: run forever)")

    p_profile = sub.add_parser("profile", help="body profile utilities")
    profile_sub = p_profile.add_subparsers(dest="profile_command", required=True)
    p_validate = profile_sub.add_parser("validate", help="check a profile file")
    p_validate.add_argument("file")
    profile_sub.add_parser("list", help="list built-in profiles")

    return parser


def _seed_override() -> int | None:
    raw = os.environ.get("BEDSIM_SEED")
    return int(raw) if raw else None


def _fail(message: str, code: int) -> int:
    print(json.dumps({"error": message}), file=sys.stderr)
    return code


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    try:
        report, sim = run(scenario, seed=_seed_override())
    except GateRejectedError as exc:
        return _fail(f"gate_rejected: {exc}", EXIT_GATE_REJECTED)
    if args.csv:
        export_run(report, sim, args.csv)
    if args.heatmap:
        print(render_heatmap(sim.forces.values))
    summary = report.to_dict()
    del summary["trace"]
    print(json.dumps(summary, indent=2))
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _cmd_serve(args) -> int:
    scenario = load_scenario(args.scenario)
    from .runner import build_simulation

    sim = build_simulation(scenario, seed=_seed_override())
    server = MattressServer(
        sim,
        host=args.host,
        port=args.port,
        ws_port=args.ws_port,
        fast=args.fast,
        max_ticks=args.max_ticks,
    )
    try:
        asyncio.run(server.serve())
    except KeyboardInterrupt:
        pass
    except OSError as exc:
        return _fail(f"startup failed: {exc}", EXIT_INVALID)
    return EXIT_OK


def _cmd_profile(args) -> int:
    if args.profile_command == "list":
        for name in builtin_profiles():
            profile = get_profile(name)
            contact = int((profile.clearance == 0).sum())
            print(f"{name}\t{profile.weight:g} kgf\t{contact} contact cells")
        return EXIT_OK
    profile = load_profile(args.file)
    contact = int((profile.clearance == 0).sum())
    print(f"ok: {profile.name} ({profile.weight:g} kgf, "
          f"{profile.grid.rows}x{profile.grid.cols}, {contact} contact cells)")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "serve":
            return _cmd_serve(args)
        return _cmd_profile(args)
    except BedsimError as exc:
        return _fail(str(exc), EXIT_INVALID)


if __name__ == "__main__":
    sys.exit(main())
