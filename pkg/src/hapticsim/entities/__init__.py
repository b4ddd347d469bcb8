from .solids import PivotMode, geometric_center, move_solid, pivot_world_point
from .robots import (
    IkError,
    Joint,
    RobotModel,
    drive_robot,
    forward_kinematics,
    inverse_kinematics,
    jacobian,
    joint_limit_force,
    limit_force_cartesian,
    load_robot,
    planar_2r,
    planar_3r,
    robot_from_dict,
)
from .mannequin import (
    MannequinModel,
    MannequinState,
    drive_mannequin,
    hand_pose,
    load_mannequin,
    mannequin_from_dict,
    segment_world_poses,
)

__all__ = [
    "PivotMode", "geometric_center", "move_solid", "pivot_world_point",
    "Joint", "RobotModel", "IkError",
    "forward_kinematics", "inverse_kinematics", "jacobian",
    "joint_limit_force", "limit_force_cartesian", "drive_robot",
    "planar_2r", "planar_3r", "load_robot", "robot_from_dict",
    "MannequinModel", "MannequinState", "drive_mannequin", "hand_pose",
    "load_mannequin", "mannequin_from_dict", "segment_world_poses",
]
