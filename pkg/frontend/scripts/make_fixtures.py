"""Generate kernel-produced fixtures for the UI tests.

The UI never computes physics: every number its tests assert against is
emitted by the kernel here, in the exact bridge wire shape.
"""

import json
from pathlib import Path

from hapticsim.cli import bundled_scenario_path
from hapticsim.geometry import CheckGroupPair, ConvexShape, SceneEntity
from hapticsim.mapping import ScaleMode, WorkspaceMapping
from hapticsim.protocol.script import ScriptSegment, StylusScript
from hapticsim.runtime import RateConfig, RunSetup, Session, SolidDriver
from hapticsim.scenario import build_setup, load_scenario
from hapticsim.transforms import Pose

OUT = Path(__file__).parent.parent / "tests" / "fixtures"


def fixture_scene_readouts():
    """Run the bundled cube-vs-wall fixture; capture bridge-shaped events."""
    setup = build_setup(load_scenario(bundled_scenario_path()))
    session = Session(setup)
    captured = {}

    def observer(event):
        if event["type"] == "proximity" and 0 < event["distance"] < 0.01:
            captured.setdefault("proximity", event)
        if event["type"] == "force" and event["magnitude"] > 0:
            captured.setdefault("force", event)
        if event["type"] == "snapshot":
            captured["snapshot"] = event

    session.add_observer(observer)
    session.run()
    session.close()
    (OUT / "proximity_readout.json").write_text(json.dumps(captured["proximity"], indent=1))
    (OUT / "force_readout.json").write_text(json.dumps(captured["force"], indent=1))
    (OUT / "snapshot.json").write_text(json.dumps(captured["snapshot"], indent=1))


def fixture_trajectory_1m():
    """1 m constant-speed drag recorded at AutoDistance(0.1): 11 frames."""
    script = StylusScript(
        segments=(ScriptSegment(kind="line", duration=2.0,
                                params={"start": (-0.05, 0, 0), "end": (0.05, 0, 0)}),),
        button_events=((0, "press"),))
    entities = [
        SceneEntity(id="cube", shapes=(ConvexShape.box((0.2, 0.2, 0.2)),), pose=Pose.identity()),
        SceneEntity(id="far_wall", shapes=(ConvexShape.box((0.05, 1, 1)),),
                    pose=Pose.from_xyz(50.0, 0, 0)),
    ]
    setup = RunSetup(
        entities=entities, driver=SolidDriver("cube"),
        check_pair=CheckGroupPair(group_a=frozenset({"cube"}), group_b=frozenset({"far_wall"})),
        mapping=WorkspaceMapping(scale_mode=ScaleMode(kind="rough")),
        script=script, rates=RateConfig(), duration=2.0,
        trajectory=("auto_distance", 0.1))
    result = Session(setup).run()
    traj = result.trajectory
    payload = {
        "type": "trajectory",
        "mode": traj.mode,
        "value": traj.value,
        "frames": [{"t": f.t, "entity_id": f.entity_id,
                    "position": [float(c) for c in f.pose.position],
                    "quaternion": [float(c) for c in f.pose.orientation]}
                   for f in traj.frames],
    }
    (OUT / "trajectory_1m.json").write_text(json.dumps(payload, indent=1))


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    fixture_scene_readouts()
    fixture_trajectory_1m()
    print(f"fixtures written to {OUT}")
