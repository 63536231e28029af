"""Constant-curvature kinematics of the tendon-driven section."""

from continuum_dvs.kinematics.constant_curvature import (
    MM_PER_M,
    ArcParameters,
    RigidPose,
    RobotGeometry,
    TendonDisplacement,
    arc_to_pose,
    forward_kinematics,
    rot_y,
    rot_z,
    tendons_to_arc,
)

__all__ = [
    "MM_PER_M",
    "ArcParameters",
    "RigidPose",
    "RobotGeometry",
    "TendonDisplacement",
    "arc_to_pose",
    "forward_kinematics",
    "rot_y",
    "rot_z",
    "tendons_to_arc",
]
