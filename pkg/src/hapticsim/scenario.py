"""Scenario files: one JSON document wiring a whole run together.

Schema (paths are resolved relative to the scenario file):

    {
      "scene": "scene.json",
      "entity": {"id": "cube",
                 "pivot": "self_origin" | "geometric_center"
                          | {"user_frame": {"position": ..., "quaternion": ...}}},
      "robot": {"file": "robot.json", "q0": [..],
                "force_branch": 0},                              # optional; force_branch
                                                                 # pins an analytic IK branch
      "mannequin": {"file": "mannequin.json", "target": "right",
                    "trunk_locked": false},                      # optional
      "force": {"class": "penetration_proportional", "margin": 0.005,
                "stiffness": 200.0, "damping": 5.0,
                "constant_magnitude": 2.0, "mass_scale": 1.0},
      "rates": {"haptic_hz": 1000, "proximity_hz": 100,
                "publish_hz": 10, "clock": "simulated"},
      "mapping": {"frame": "world" | "screen" | {"user": <pose>},
                  "scale": "rough" | "medium" | "fine" | "screen_adaptive",
                  "scale_levels": {"rough": 10.0, "medium": 1.0, "fine": 0.1},
                  "camera": <pose>, "viewport_extent": 3.2},
      "stylus": "external" | {"script": {"segments": [...], "button": [[tick, "press"], ...]}},
      "trajectory": {"mode": "auto_distance" | "auto_time" | "manual", "value": 0.1},
      "duration": 2.0,
      "serve": {"host": "127.0.0.1", "port": 0},                 # optional
      "outputs": {"report": "report.json", "trajectory": "trajectory.jsonl"}
    }

CLI flags mirror these keys 1:1 as dotted paths (``--force.stiffness=300``,
``--rates.clock=wall``, ``--duration=1s``); flags win over the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .entities.mannequin import mannequin_from_dict
from .entities.robots import robot_from_dict
from .entities.solids import PivotMode
from .forcefield import ForceClass, ForceParams
from .mapping import DeviceSpec, FrameMode, ScaleMode, WorkspaceMapping
from .protocol.script import script_from_dict
from .runtime import MannequinDriver, RateConfig, RobotDriver, RunSetup, SolidDriver
from .scenefile import load_scene, validate_scene_dict
from .transforms import pose_from_dict

FORCE_CLASS_NAMES = {
    "constant_contact": ForceClass.CONSTANT_CONTACT,
    "penetration_proportional": ForceClass.PENETRATION_PROPORTIONAL,
    "spring_damper": ForceClass.SPRING_DAMPER,
}


class ScenarioError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(f"{path}: {msg}" for path, msg in self.diagnostics[:5])
        more = "" if len(self.diagnostics) <= 5 else f" (+{len(self.diagnostics) - 5} more)"
        super().__init__(f"invalid scenario: {lines}{more}")


# ---------------------------------------------------------------------------
# Dotted-path overrides (CLI flags)
# ---------------------------------------------------------------------------

def parse_duration(value) -> float:
    """Accept plain seconds or strings like '10s', '500ms', '2min'."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    for suffix, mult in (("ms", 1e-3), ("min", 60.0), ("s", 1.0)):
        if text.endswith(suffix):
            return float(text[: -len(suffix)]) * mult
    return float(text)


def apply_overrides(data: dict, overrides) -> dict:
    """Merge ``key.path=value`` strings into a scenario dict (flags win)."""
    out = json.loads(json.dumps(data))  # deep copy
    for item in overrides:
        if "=" not in item:
            raise ScenarioError([(item, "override must look like key.path=value")])
        key, _, raw = item.partition("=")
        key = key.lstrip("-")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ScenarioError([(key, f"cannot override through non-object {part!r}")])
        node[parts[-1]] = value
    return out


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_scenario_dict(data, base_dir: Path) -> list:
    """Exhaustive diagnostics as (json_pointer, message) pairs."""
    diags: list = []
    if not isinstance(data, dict):
        return [("", "scenario must be a JSON object")]

    scene_rel = data.get("scene")
    scene_ids: set = set()
    if not scene_rel or not isinstance(scene_rel, str):
        diags.append(("/scene", "scenario needs a scene file path"))
    else:
        scene_path = base_dir / scene_rel
        if not scene_path.exists():
            diags.append(("/scene", f"scene file not found: {scene_path}"))
        else:
            try:
                scene_data = json.loads(scene_path.read_text())
            except json.JSONDecodeError as exc:
                diags.append(("/scene", f"scene file is not valid JSON: {exc}"))
            else:
                for path, msg in validate_scene_dict(scene_data):
                    diags.append((f"/scene{path}", msg))
                if isinstance(scene_data, dict) and isinstance(scene_data.get("entities"), list):
                    scene_ids = {e.get("id") for e in scene_data["entities"]
                                 if isinstance(e, dict)}

    entity = data.get("entity")
    if not isinstance(entity, dict) or not entity.get("id"):
        diags.append(("/entity", "scenario needs an entity selection with an id"))
    elif scene_ids and entity["id"] not in scene_ids:
        diags.append(("/entity/id", f"entity {entity['id']!r} not present in the scene"))
    if isinstance(entity, dict):
        pivot = entity.get("pivot", "self_origin")
        if isinstance(pivot, str):
            if pivot not in ("self_origin", "geometric_center"):
                diags.append(("/entity/pivot", f"unknown pivot {pivot!r}"))
        elif not (isinstance(pivot, dict) and "user_frame" in pivot):
            diags.append(("/entity/pivot", "pivot must be a name or {'user_frame': pose}"))

    for section, loader, checks in (
        ("robot", robot_from_dict, _robot_checks),
        ("mannequin", mannequin_from_dict, _mannequin_checks),
    ):
        sd = data.get(section)
        if sd is None:
            continue
        if not isinstance(sd, dict) or "file" not in sd:
            diags.append((f"/{section}", f"needs an object with a 'file' path"))
            continue
        file_path = base_dir / sd["file"]
        if not file_path.exists():
            diags.append((f"/{section}/file", f"file not found: {file_path}"))
            continue
        try:
            payload = json.loads(file_path.read_text())
            checks(payload, f"/{section}", diags)
            loader(payload)
        except (ValueError, KeyError, TypeError) as exc:
            diags.append((f"/{section}/file", f"invalid: {exc}"))

    force = data.get("force", {})
    if isinstance(force, dict):
        cls = force.get("class", "penetration_proportional")
        if cls not in FORCE_CLASS_NAMES:
            diags.append(("/force/class", f"unknown force class {cls!r}"))
        for key in ("margin", "stiffness", "damping", "constant_magnitude", "mass_scale"):
            if key in force and not isinstance(force[key], (int, float)):
                diags.append((f"/force/{key}", "must be a number"))
        if isinstance(force.get("margin"), (int, float)) and force["margin"] <= 0:
            diags.append(("/force/margin", "must be positive"))
    else:
        diags.append(("/force", "must be an object"))

    rates = data.get("rates", {})
    if isinstance(rates, dict):
        try:
            RateConfig(haptic_hz=int(rates.get("haptic_hz", 1000)),
                       proximity_hz=int(rates.get("proximity_hz", 100)),
                       publish_hz=int(rates.get("publish_hz", 10)),
                       clock=rates.get("clock", "simulated"))
        except (ValueError, TypeError) as exc:
            diags.append(("/rates", str(exc)))
    else:
        diags.append(("/rates", "must be an object"))

    mapping = data.get("mapping", {})
    if isinstance(mapping, dict):
        frame = mapping.get("frame", "world")
        if isinstance(frame, str):
            if frame not in ("world", "screen"):
                diags.append(("/mapping/frame", f"unknown frame {frame!r}"))
            elif frame == "screen" and "camera" not in mapping:
                diags.append(("/mapping/camera", "screen frame mode needs a camera pose"))
        elif not (isinstance(frame, dict) and "user" in frame):
            diags.append(("/mapping/frame", "frame must be a name or {'user': pose}"))
        scale = mapping.get("scale", "medium")
        if scale not in ("rough", "medium", "fine", "screen_adaptive"):
            diags.append(("/mapping/scale", f"unknown scale {scale!r}"))
        elif scale == "screen_adaptive":
            extent = mapping.get("viewport_extent")
            if not isinstance(extent, (int, float)) or extent <= 0:
                diags.append(("/mapping/viewport_extent",
                              "screen-adaptive scale needs a positive viewport extent"))
        levels = mapping.get("scale_levels", {})
        if isinstance(levels, dict):
            for name, value in levels.items():
                if not isinstance(value, (int, float)) or value <= 0:
                    diags.append((f"/mapping/scale_levels/{name}", "must be a positive number"))
    else:
        diags.append(("/mapping", "must be an object"))

    stylus = data.get("stylus", "external")
    if stylus != "external":
        if not (isinstance(stylus, dict) and "script" in stylus):
            diags.append(("/stylus", "must be 'external' or {'script': {...}}"))
        else:
            try:
                script = script_from_dict(stylus["script"])
            except (ValueError, KeyError, TypeError) as exc:
                diags.append(("/stylus/script", f"invalid: {exc}"))
            else:
                for seg_index, t_bad, pos in script.validate_workspace():
                    diags.append((f"/stylus/script/segments/{seg_index}",
                                  f"position {pos.tolist()} at t={t_bad:.3f}s leaves the workspace"))

    traj = data.get("trajectory")
    if traj is not None:
        if not isinstance(traj, dict) or traj.get("mode") not in ("manual", "auto_time", "auto_distance"):
            diags.append(("/trajectory/mode", "mode must be manual, auto_time, or auto_distance"))
        elif traj["mode"] != "manual":
            value = traj.get("value")
            if not isinstance(value, (int, float)) or value <= 0:
                diags.append(("/trajectory/value", "auto modes need a positive interval"))

    if "duration" in data:
        try:
            d = parse_duration(data["duration"])
            if d <= 0:
                diags.append(("/duration", "must be positive"))
        except (TypeError, ValueError):
            diags.append(("/duration", f"cannot parse duration {data['duration']!r}"))

    return diags


def _robot_checks(payload, prefix, diags):
    for i, jd in enumerate(payload.get("joints", [])):
        limits = jd.get("limits")
        if isinstance(limits, list) and len(limits) == 2 and limits[0] >= limits[1]:
            diags.append((f"{prefix}/joints/{i}/limits",
                          f"need lo < hi, got [{limits[0]}, {limits[1]}]"))


def _mannequin_checks(payload, prefix, diags):
    declared = payload.get("declared_dof")
    actual = sum(len(s.get("joints", [])) for s in payload.get("segments", []))
    if isinstance(declared, int) and declared != actual:
        diags.append((f"{prefix}/declared_dof",
                      f"header declares {declared} joints but the tree has {actual}"))


# ---------------------------------------------------------------------------
# Building a RunSetup
# ---------------------------------------------------------------------------

@dataclass
class Scenario:
    data: dict
    base_dir: Path

    @property
    def outputs(self) -> dict:
        return self.data.get("outputs", {})


def load_scenario(path, overrides=()) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ScenarioError([("/", f"scenario file not found: {path}")])
    except json.JSONDecodeError as exc:
        raise ScenarioError([("/", f"not valid JSON: {exc}")])
    data = apply_overrides(data, overrides)
    diags = validate_scenario_dict(data, path.parent)
    if diags:
        raise ScenarioError(diags)
    return Scenario(data=data, base_dir=path.parent)


def _pivot_from(entity_cfg: dict) -> PivotMode:
    pivot = entity_cfg.get("pivot", "self_origin")
    if pivot == "self_origin":
        return PivotMode.self_origin()
    if pivot == "geometric_center":
        return PivotMode.geometric_center()
    return PivotMode.user(pose_from_dict(pivot["user_frame"]))


def build_setup(scenario: Scenario) -> RunSetup:
    data = scenario.data
    base = scenario.base_dir
    entities, pairs = load_scene(base / data["scene"])
    entity_id = data["entity"]["id"]

    if "robot" in data:
        rd = data["robot"]
        model = robot_from_dict(json.loads((base / rd["file"]).read_text()))
        driver = RobotDriver(entity_id, model, q0=rd.get("q0"),
                             force_branch=rd.get("force_branch"))
    elif "mannequin" in data:
        md = data["mannequin"]
        model = mannequin_from_dict(json.loads((base / md["file"]).read_text()))
        if md.get("trunk_locked"):
            from .entities.mannequin import set_trunk_lock
            model = set_trunk_lock(model, True)
        driver = MannequinDriver(entity_id, model, target_mode=md.get("target", "right"))
    else:
        driver = SolidDriver(entity_id, _pivot_from(data["entity"]))

    force_cfg = data.get("force", {})
    params = ForceParams(
        margin=force_cfg.get("margin", 0.005),
        constant_magnitude=force_cfg.get("constant_magnitude", 2.0),
        stiffness=force_cfg.get("stiffness", 200.0),
        damping=force_cfg.get("damping", 5.0),
        mass_scale=force_cfg.get("mass_scale", 1.0),
    )
    force_class = FORCE_CLASS_NAMES[force_cfg.get("class", "penetration_proportional")]

    rates_cfg = data.get("rates", {})
    rates = RateConfig(
        haptic_hz=int(rates_cfg.get("haptic_hz", 1000)),
        proximity_hz=int(rates_cfg.get("proximity_hz", 100)),
        publish_hz=int(rates_cfg.get("publish_hz", 10)),
        clock=rates_cfg.get("clock", "simulated"),
    )

    mapping_cfg = data.get("mapping", {})
    frame = mapping_cfg.get("frame", "world")
    if frame == "world":
        frame_mode = FrameMode.world()
    elif frame == "screen":
        frame_mode = FrameMode.screen()
    else:
        frame_mode = FrameMode.user(pose_from_dict(frame["user"]))
    levels = dict(ScaleMode().levels)
    levels.update(mapping_cfg.get("scale_levels", {}))
    scale_mode = ScaleMode(kind=mapping_cfg.get("scale", "medium"), levels=levels)
    camera = pose_from_dict(mapping_cfg["camera"]) if "camera" in mapping_cfg else None
    viewport = mapping_cfg.get("viewport_extent")

    stylus = data.get("stylus", "external")
    script = None if stylus == "external" else script_from_dict(stylus["script"])

    traj_cfg = data.get("trajectory")
    trajectory = None
    if traj_cfg is not None:
        trajectory = (traj_cfg["mode"], traj_cfg.get("value"))

    serve_cfg = data.get("serve")
    serve = (serve_cfg.get("host", "127.0.0.1"), int(serve_cfg.get("port", 0))) if serve_cfg else None

    return RunSetup(
        entities=entities,
        driver=driver,
        check_pair=pairs[0] if pairs else None,
        mapping=WorkspaceMapping(frame_mode=frame_mode, scale_mode=scale_mode),
        camera=camera,
        viewport_extent=viewport,
        params=params,
        force_class=force_class,
        script=script,
        rates=rates,
        duration=parse_duration(data.get("duration", 1.0)),
        device_spec=DeviceSpec(),
        trajectory=trajectory,
        serve=serve,
    )
