import json
from importlib import resources

import numpy as np
import pytest

from hapticsim.entities.mannequin import (
    MannequinState,
    drive_mannequin,
    hand_pose,
    load_mannequin,
    mannequin_from_dict,
    segment_world_poses,
    set_trunk_lock,
)
from hapticsim.transforms import Pose


@pytest.fixture(scope="module")
def model():
    path = resources.files("hapticsim.data") / "mannequin56.json"
    return load_mannequin(path)


@pytest.fixture()
def neutral(model):
    return MannequinState(root_pose=Pose.identity(), q=model.neutral_q())


def test_sample_file_declares_56_dof(model):
    assert model.dof == 56
    assert model.declared_dof == 56


def test_tree_rooted_at_pelvis(model):
    assert model.root == "pelvis"
    poses = segment_world_poses(model, model.neutral_q())
    assert set(poses) == {s.name for s in model.segments}


def test_dof_mismatch_rejected(model):
    path = resources.files("hapticsim.data") / "mannequin56.json"
    data = json.loads(path.read_text())
    data["declared_dof"] = 55
    with pytest.raises(ValueError, match="55"):
        mannequin_from_dict(data)


def test_whole_body_translation(model, neutral):
    target = Pose.from_xyz(1.0, 2.0, 3.0)
    before = segment_world_poses(model, neutral.q, neutral.root_pose)
    report = drive_mannequin(model, "whole_body", target, neutral)
    after = segment_world_poses(model, report.state.q, report.state.root_pose)
    assert np.array_equal(report.state.q, neutral.q)
    shift = target.position
    for name in before:
        assert np.allclose(after[name].position, before[name].position + shift, atol=1e-12)


def test_trunk_lock_bit_identical(model, neutral):
    locked = set_trunk_lock(model, True)
    trunk_idx = [model.joint_index(n) for n in sorted(model.trunk_joint_names)]
    before = neutral.q[trunk_idx].copy()
    report = drive_mannequin(locked, "right", Pose.from_xyz(0.4, -0.4, 0.4), neutral)
    assert np.array_equal(report.state.q[trunk_idx], before)
    # and without the lock, the trunk participates
    report2 = drive_mannequin(model, "right", Pose.from_xyz(0.4, -0.4, 0.4), neutral)
    assert not np.array_equal(report2.state.q[trunk_idx], before)


def test_right_hand_reaches_sampled_targets(model, neutral):
    rng = np.random.default_rng(25)
    lo, hi = model.limit_arrays()
    chain = model.chain_joint_indices(model.end_effectors["right_hand"])
    hits = 0
    for _ in range(100):
        q_rand = neutral.q.copy()
        q_rand[chain] = rng.uniform(lo[chain], hi[chain])
        target = hand_pose(model, q_rand, "right_hand").position
        report = drive_mannequin(model, "right", Pose(position=target), neutral)
        assert report.iterations <= 200
        if report.residuals["right_hand"] <= 5e-3:
            hits += 1
    assert hits >= 95


def test_both_hands_shared_trunk(model, neutral):
    left = hand_pose(model, neutral.q, "left_hand").position + np.array([0.08, 0.03, 0.08])
    right = hand_pose(model, neutral.q, "right_hand").position + np.array([0.08, -0.03, 0.08])
    report = drive_mannequin(model, "both", (Pose(position=left), Pose(position=right)), neutral)
    assert report.converged
    assert report.residuals["left_hand"] <= 5e-3
    assert report.residuals["right_hand"] <= 5e-3


def test_unreachable_returns_best_effort(model, neutral):
    report = drive_mannequin(model, "right", Pose.from_xyz(5.0, 0, 0), neutral)
    assert not report.converged
    assert report.residuals["right_hand"] > 0.5
    lo, hi = model.limit_arrays()
    assert np.all(report.state.q >= lo - 1e-12)
    assert np.all(report.state.q <= hi + 1e-12)


def test_left_and_right_chains_differ(model):
    left = model.chain_joint_indices(model.end_effectors["left_hand"])
    right = model.chain_joint_indices(model.end_effectors["right_hand"])
    assert set(left) != set(right)
    shared = set(left) & set(right)
    trunk_idx = {model.joint_index(n) for n in model.trunk_joint_names}
    assert trunk_idx <= shared


def test_bad_tree_rejected():
    data = {
        "name": "broken", "declared_dof": 0, "root": "pelvis",
        "segments": [
            {"name": "pelvis", "parent": None, "joints": []},
            {"name": "arm", "parent": "ghost", "joints": []},
        ],
        "end_effectors": {"left_hand": "arm", "right_hand": "arm"},
    }
    with pytest.raises(ValueError, match="ghost"):
        mannequin_from_dict(data)
