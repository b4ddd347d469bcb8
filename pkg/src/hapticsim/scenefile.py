"""Scene description files: JSON schema, loading, exhaustive validation.

Schema (all lengths in meters, quaternions (w, x, y, z) unit to 1e-9):

    {
      "entities": [
        {"id": "cube",
         "kind": "solid" | "robot_link" | "mannequin_segment",
         "pose": {"position": [x, y, z], "quaternion": [w, x, y, z]},
         "shapes": [
            {"vertices": [[x, y, z], ...]},          # convex hull of the points
            {"box": {"extents": [ex, ey, ez],        # axis-aligned box shorthand
                     "center": [cx, cy, cz]}}
         ]},
        ...
      ],
      "check_groups": [
        {"group_a": ["cube"], "group_b": ["wall", "table"]},
        ...
      ]
    }

Validation returns every problem found (JSON-pointer path plus message),
never just the first.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .geometry import ENTITY_KINDS, CheckGroupPair, ConvexShape, SceneEntity
from .transforms import Pose, QUAT_NORM_TOL


class SceneError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(f"{path}: {msg}" for path, msg in self.diagnostics[:5])
        more = "" if len(self.diagnostics) <= 5 else f" (+{len(self.diagnostics) - 5} more)"
        super().__init__(f"invalid scene: {lines}{more}")


def _check_vec(value, length, path, diags) -> bool:
    arr = np.asarray(value, dtype=object)
    if not isinstance(value, (list, tuple)) or len(value) != length:
        diags.append((path, f"expected a list of {length} numbers"))
        return False
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        diags.append((path, "expected numeric values"))
        return False
    if not np.all(np.isfinite(arr)):
        diags.append((path, "values must be finite"))
        return False
    return True


def _validate_pose(data, path, diags) -> None:
    if not isinstance(data, dict):
        diags.append((path, "pose must be an object"))
        return
    if "position" in data:
        _check_vec(data["position"], 3, f"{path}/position", diags)
    if "quaternion" in data:
        if _check_vec(data["quaternion"], 4, f"{path}/quaternion", diags):
            n = float(np.linalg.norm(np.asarray(data["quaternion"], dtype=float)))
            if abs(n - 1.0) > QUAT_NORM_TOL:
                diags.append((f"{path}/quaternion", f"not a unit quaternion (norm {n})"))


def _validate_shape(data, path, diags) -> None:
    if not isinstance(data, dict):
        diags.append((path, "shape must be an object"))
        return
    if "vertices" in data:
        verts = data["vertices"]
        if not isinstance(verts, list) or len(verts) < 1:
            diags.append((f"{path}/vertices", "need at least one vertex"))
            return
        for i, v in enumerate(verts):
            _check_vec(v, 3, f"{path}/vertices/{i}", diags)
    elif "box" in data:
        box = data["box"]
        if not isinstance(box, dict) or "extents" not in box:
            diags.append((f"{path}/box", "box needs 'extents'"))
            return
        if _check_vec(box["extents"], 3, f"{path}/box/extents", diags):
            if any(e <= 0 for e in box["extents"]):
                diags.append((f"{path}/box/extents", "extents must be positive"))
        if "center" in box:
            _check_vec(box["center"], 3, f"{path}/box/center", diags)
    else:
        diags.append((path, "shape needs 'vertices' or 'box'"))


def validate_scene_dict(data) -> list:
    """All diagnostics, as (json_pointer, message) pairs; empty when valid."""
    diags: list = []
    if not isinstance(data, dict):
        return [("", "scene must be a JSON object")]
    entities = data.get("entities")
    ids = []
    if not isinstance(entities, list) or not entities:
        diags.append(("/entities", "need a non-empty entity list"))
        entities = []
    for i, ent in enumerate(entities):
        path = f"/entities/{i}"
        if not isinstance(ent, dict):
            diags.append((path, "entity must be an object"))
            continue
        eid = ent.get("id")
        if not eid or not isinstance(eid, str):
            diags.append((f"{path}/id", "entity needs a non-empty string id"))
        elif eid in ids:
            diags.append((f"{path}/id", f"duplicate entity id {eid!r}"))
        else:
            ids.append(eid)
        kind = ent.get("kind", "solid")
        if kind not in ENTITY_KINDS:
            diags.append((f"{path}/kind", f"unknown kind {kind!r} (one of {ENTITY_KINDS})"))
        if "pose" in ent:
            _validate_pose(ent["pose"], f"{path}/pose", diags)
        shapes = ent.get("shapes")
        if not isinstance(shapes, list) or not shapes:
            diags.append((f"{path}/shapes", "entity needs a non-empty shape list"))
        else:
            for k, shape in enumerate(shapes):
                _validate_shape(shape, f"{path}/shapes/{k}", diags)
    groups = data.get("check_groups", [])
    if not isinstance(groups, list):
        diags.append(("/check_groups", "must be a list"))
        groups = []
    for i, grp in enumerate(groups):
        path = f"/check_groups/{i}"
        if not isinstance(grp, dict):
            diags.append((path, "check group must be an object"))
            continue
        sides = {}
        for side in ("group_a", "group_b"):
            members = grp.get(side)
            if not isinstance(members, list) or not members:
                diags.append((f"{path}/{side}", "need a non-empty id list"))
                members = []
            for k, gid in enumerate(members):
                if gid not in ids:
                    diags.append((f"{path}/{side}/{k}", f"unknown entity id {gid!r}"))
            sides[side] = set(members)
        overlap = sides.get("group_a", set()) & sides.get("group_b", set())
        if overlap:
            diags.append((path, f"groups must be disjoint, both contain {sorted(overlap)}"))
    return diags


def _shape_from_dict(data: dict) -> ConvexShape:
    if "vertices" in data:
        return ConvexShape(np.asarray(data["vertices"], dtype=float))
    box = data["box"]
    return ConvexShape.box(box["extents"], box.get("center", (0.0, 0.0, 0.0)))


def scene_from_dict(data: dict):
    """(entities, check_pairs) from a validated scene dict; raises SceneError."""
    diags = validate_scene_dict(data)
    if diags:
        raise SceneError(diags)
    entities = []
    for ent in data["entities"]:
        pose_d = ent.get("pose", {})
        entities.append(SceneEntity(
            id=ent["id"],
            kind=ent.get("kind", "solid"),
            pose=Pose(position=pose_d.get("position", (0, 0, 0)),
                      orientation=pose_d.get("quaternion", (1, 0, 0, 0))),
            shapes=tuple(_shape_from_dict(s) for s in ent["shapes"]),
        ))
    pairs = [CheckGroupPair(group_a=frozenset(g["group_a"]), group_b=frozenset(g["group_b"]))
             for g in data.get("check_groups", [])]
    return entities, pairs


def load_scene(path):
    with open(Path(path)) as f:
        return scene_from_dict(json.load(f))
