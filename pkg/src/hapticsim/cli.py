"""Command-line runner: run scenarios, validate files, serve the device,
bridge to the browser UI.

Any extra ``--key.path=value`` flag overrides the matching scenario key
(dotted path, flags win), e.g. ``--rates.clock=wall --duration=1s``.
The default endpoint host:port can also come from HAPTICSIM_ENDPOINT.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .protocol.device import VirtualStylusDevice
from .protocol.script import StylusScript, ScriptSegment, script_from_dict
from .protocol.server import HapticServer
from .runtime import run as run_session
from .scenario import (
    ScenarioError,
    build_setup,
    load_scenario,
    parse_duration,
    validate_scenario_dict,
)
from .scenefile import validate_scene_dict


def default_endpoint():
    raw = os.environ.get("HAPTICSIM_ENDPOINT", "127.0.0.1:4640")
    host, _, port = raw.partition(":")
    return host or "127.0.0.1", int(port or 4640)


def bundled_scenario_path(name: str = "scenario_cube_vs_wall.json") -> Path:
    return Path(resources.files("hapticsim.data") / name)


def _print_diags(diags, stream=None) -> None:
    for path, msg in diags:
        print(f"  {path or '/'}: {msg}", file=stream or sys.stdout)


def cmd_run(args, overrides) -> int:
    try:
        scenario = load_scenario(args.scenario, overrides)
        setup = build_setup(scenario)
    except ScenarioError as exc:
        print("scenario validation failed:", file=sys.stderr)
        _print_diags(exc.diagnostics, sys.stderr)
        return 2

    try:
        result = run_session(setup)
    except Exception as exc:  # runtime failure: report and signal
        print(f"run failed: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(args.out_dir) if args.out_dir else Path.cwd()
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = scenario.outputs
    report_path = out_dir / outputs.get("report", "report.json")
    report_path.write_text(result.report.to_json())
    wrote = [str(report_path)]
    if result.trajectory is not None:
        traj_path = out_dir / outputs.get("trajectory", "trajectory.jsonl")
        traj_path.write_text(result.trajectory.to_jsonl())
        wrote.append(str(traj_path))

    r = result.report
    print(f"ticks: haptic={r.haptic_ticks} proximity={r.proximity_ticks} snapshots={r.snapshots}")
    print(f"poses: committed={r.committed} rejected={r.rejected} drive_errors={r.drive_errors}")
    print(f"force: max={r.max_force:.3f} N mean={r.mean_force:.3f} N")
    if r.min_distance is not None:
        print(f"min committed distance: {r.min_distance:.6f} m")
    print("wrote: " + ", ".join(wrote))
    return 0


def _detect_kind(data: dict) -> str:
    if "scene" in data and "entity" in data:
        return "scenario"
    if "entities" in data:
        return "scene"
    if "segments" in data and "root" in data:
        return "mannequin"
    if "joints" in data:
        return "robot"
    return "scenario"


def cmd_validate(args, overrides) -> int:
    path = Path(args.path)
    if not path.exists():
        print(f"file not found: {path}", file=sys.stderr)
        return 2
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        print(f"not valid JSON: {exc}", file=sys.stderr)
        return 2

    kind = args.kind or _detect_kind(data)
    if kind == "scenario":
        diags = validate_scenario_dict(data, path.parent)
    elif kind == "scene":
        diags = validate_scene_dict(data)
    elif kind == "robot":
        diags = _validate_model(data, "robot")
    else:
        diags = _validate_model(data, "mannequin")

    if diags:
        print(f"{len(diags)} problem(s) in {path} ({kind}):")
        _print_diags(diags)
        return 2
    print(f"{path} ({kind}): ok")
    return 0


def _validate_model(data: dict, kind: str) -> list:
    from .scenario import _mannequin_checks, _robot_checks
    diags: list = []
    if kind == "robot":
        _robot_checks(data, "", diags)
        loader = __import__("hapticsim.entities.robots", fromlist=["robot_from_dict"]).robot_from_dict
    else:
        _mannequin_checks(data, "", diags)
        loader = __import__("hapticsim.entities.mannequin", fromlist=["mannequin_from_dict"]).mannequin_from_dict
    try:
        loader(data)
    except (ValueError, KeyError, TypeError) as exc:
        diags.append(("", str(exc)))
    return diags


def _default_serve_script() -> StylusScript:
    return StylusScript(segments=(
        ScriptSegment(kind="sinusoid", duration=3600.0,
                      params={"base": (0.0, 0.0, 0.0), "amplitude": (0.05, 0.04, 0.04),
                              "frequency": 0.2}),
    ))


def cmd_serve(args, overrides) -> int:
    if args.script:
        with open(args.script) as f:
            script = script_from_dict(json.load(f))
    else:
        script = _default_serve_script()
    host, port = default_endpoint()
    host = args.host or host
    port = args.port if args.port is not None else port
    device = VirtualStylusDevice(script=script)
    try:
        server = HapticServer(device, host=host, port=port)
    except RuntimeError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    print(f"haptic server on {server.endpoint[0]}:{server.endpoint[1]} "
          f"({device.haptic_hz} Hz, ctrl-c to stop)")
    duration = parse_duration(args.duration) if args.duration else None
    try:
        server.run_wall(duration)
    finally:
        server.close()
    return 0


def cmd_bridge(args, overrides) -> int:
    from .bridge import serve_bridge
    try:
        scenario = load_scenario(args.scenario, overrides)
        setup = build_setup(scenario)
    except ScenarioError as exc:
        print("scenario validation failed:", file=sys.stderr)
        _print_diags(exc.diagnostics, sys.stderr)
        return 2
    duration = parse_duration(args.duration) if args.duration else None
    return serve_bridge(setup, host=args.host, port=args.ws_port, duration=duration,
                        static_dir=args.static_dir)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hapticsim",
                                     description="haptic manipulation kernel")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario, write report and trajectory")
    p_run.add_argument("scenario", help="scenario JSON path (use 'bundled:cube-vs-wall' for the fixture)")
    p_run.add_argument("--out-dir", help="directory for outputs (default: cwd)")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="validate a scenario/scene/robot/mannequin file")
    p_val.add_argument("path")
    p_val.add_argument("--kind", choices=["scenario", "scene", "robot", "mannequin"],
                       help="force the file kind instead of auto-detecting")
    p_val.set_defaults(func=cmd_validate)

    p_serve = sub.add_parser("serve", help="run the protocol server standalone (wall clock)")
    p_serve.add_argument("--script", help="stylus script JSON (default: slow sinusoid)")
    p_serve.add_argument("--host")
    p_serve.add_argument("--port", type=int)
    p_serve.add_argument("--duration", help="stop after this long (e.g. 10s); default: run forever")
    p_serve.set_defaults(func=cmd_serve)

    p_bridge = sub.add_parser("bridge", help="live session with a WebSocket UI bridge")
    p_bridge.add_argument("scenario")
    p_bridge.add_argument("--host", default="127.0.0.1")
    p_bridge.add_argument("--ws-port", type=int, default=8765)
    p_bridge.add_argument("--duration", help="stop after this long; default: run forever")
    p_bridge.add_argument("--static-dir", help="serve this directory over HTTP for the UI bundle")
    p_bridge.set_defaults(func=cmd_bridge)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    overrides = []
    for item in extras:
        if item.startswith("--") and "=" in item:
            overrides.append(item)
        else:
            parser.error(f"unrecognized argument: {item}")
    if getattr(args, "scenario", None) == "bundled:cube-vs-wall":
        args.scenario = str(bundled_scenario_path())
    return args.func(args, overrides)


if __name__ == "__main__":
    sys.exit(main())
