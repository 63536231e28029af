"""Constant-curvature forward kinematics of a single tendon-driven section.

Two antagonistic tendon pairs sit 90 degrees apart at offset ``d`` from the
backbone. Tendon pair 1 bends toward the base x-axis, pair 2 toward the y-axis.
A joint state ``q = (q1, q2)`` in millimetres becomes a circular arc with

* bending plane ``phi = atan2(q2, q1)``
* curvature ``kappa = |q| / (d * L)`` (q converted to metres)
* arc length ``L``

and the arc becomes the tip (camera) pose

* ``R = Rz(phi) Ry(kappa L) Rz(-phi)``
* ``t = Rz(phi) [(1 - cos kappa L) / kappa, 0, sin(kappa L) / kappa]``

The camera looks along the tip's local +z axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from continuum_dvs.core.exceptions import ValidationError

MM_PER_M = 1000.0

STRAIGHT_THRESHOLD = 1e-6
"""Bend angles ``kappa * L`` below this use the series form of the translation."""

ORTHONORMAL_TOLERANCE = 1e-9


class RobotGeometry(BaseModel):
    """Physical parameters of the continuum section (SI units).

    Only ``backbone_length`` and ``tendon_offset`` enter the kinematic model;
    the remaining fields describe the prototype backbone.

    Attributes:
        backbone_length (float): Arc length L, metres.
        tendon_offset (float): Tendon distance d from the backbone axis, metres.
        backbone_radius (float): Backbone radius r, metres.
        youngs_modulus (float): Backbone Young's modulus E, pascals.
        density (float): Backbone density rho, kg/m^3.
    """

    model_config = ConfigDict(frozen=True)

    backbone_length: float = Field(default=0.4, gt=0)
    tendon_offset: float = Field(default=0.0018, gt=0)
    backbone_radius: float = Field(default=0.0009, gt=0)
    youngs_modulus: float = Field(default=207e9, gt=0)
    density: float = Field(default=7800.0, gt=0)


@dataclass(frozen=True)
class TendonDisplacement:
    """Joint state of the section in millimetres."""

    q1: float
    q2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.q1) and math.isfinite(self.q2)):
            raise ValidationError(
                "Tendon displacement must be finite",
                field="q",
                value=(self.q1, self.q2),
            )

    @classmethod
    def from_array(cls, values: NDArray[np.floating]) -> TendonDisplacement:
        """Build from a length-2 array ``[q1, q2]`` in millimetres."""
        return cls(float(values[0]), float(values[1]))

    def as_array(self) -> NDArray[np.float64]:
        """Return ``[q1, q2]`` as a float64 array."""
        return np.array([self.q1, self.q2], dtype=np.float64)

    def norm_inf(self) -> float:
        """Largest absolute component, millimetres."""
        return max(abs(self.q1), abs(self.q2))

    def within(self, limit_mm: float) -> bool:
        """Whether both components lie inside ``[-limit_mm, limit_mm]``."""
        return self.norm_inf() <= limit_mm

    def clamped(self, limit_mm: float) -> TendonDisplacement:
        """Return the state clamped componentwise to ``[-limit_mm, limit_mm]``."""
        return TendonDisplacement(
            min(max(self.q1, -limit_mm), limit_mm),
            min(max(self.q2, -limit_mm), limit_mm),
        )


@dataclass(frozen=True)
class ArcParameters:
    """Circular-arc description of the backbone.

    Attributes:
        curvature (float): kappa, 1/metres, non-negative.
        bending_plane (float): phi, radians, in (-pi, pi].
        arc_length (float): metres.
    """

    curvature: float
    bending_plane: float
    arc_length: float

    @property
    def bend_angle(self) -> float:
        """Total bend ``kappa * L`` in radians."""
        return self.curvature * self.arc_length


@dataclass(frozen=True)
class RigidPose:
    """Pose of the tip frame in the robot base frame.

    Attributes:
        rotation (NDArray[np.float64]): 3x3 rotation (base-from-tip).
        translation (NDArray[np.float64]): Tip position, metres.
    """

    rotation: NDArray[np.float64]
    translation: NDArray[np.float64]

    @classmethod
    def identity(cls, height: float = 0.0) -> RigidPose:
        """Unrotated pose at ``(0, 0, height)``."""
        return cls(np.eye(3), np.array([0.0, 0.0, height]))

    def is_orthonormal(self, tolerance: float = ORTHONORMAL_TOLERANCE) -> bool:
        """Check ``|R^T R - I|_inf < tol`` and ``det R = 1 +- tol``."""
        rotation = np.asarray(self.rotation, dtype=np.float64)
        if rotation.shape != (3, 3) or not np.all(np.isfinite(rotation)):
            return False
        gram_error = float(np.max(np.abs(rotation.T @ rotation - np.eye(3))))
        return (
            gram_error < tolerance
            and abs(float(np.linalg.det(rotation)) - 1.0) < tolerance
        )

    def validate(self) -> RigidPose:
        """Return self, or raise when the pose is degenerate.

        Raises:
            ValidationError: If the rotation is not orthonormal or the
                translation is not a finite 3-vector.
        """
        translation = np.asarray(self.translation, dtype=np.float64)
        if translation.shape != (3,) or not np.all(np.isfinite(translation)):
            raise ValidationError(
                "Pose translation must be a finite 3-vector",
                field="translation",
                value=translation,
            )
        if not self.is_orthonormal():
            raise ValidationError(
                "Pose rotation is not orthonormal", field="rotation", value=self.rotation
            )
        return self


def rot_z(angle: float) -> NDArray[np.float64]:
    """Rotation about the z-axis."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(angle: float) -> NDArray[np.float64]:
    """Rotation about the y-axis."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def tendons_to_arc(q: TendonDisplacement, geom: RobotGeometry) -> ArcParameters:
    """Map tendon displacements to arc parameters.

    Args:
        q (TendonDisplacement): Joint state, millimetres.
        geom (RobotGeometry): Section geometry.

    Returns:
        ArcParameters: ``kappa = |q| / (d L)``, ``phi = atan2(q2, q1)``, length L.
    """
    magnitude_m = math.hypot(q.q1, q.q2) / MM_PER_M
    if magnitude_m == 0.0:
        return ArcParameters(0.0, 0.0, geom.backbone_length)
    curvature = magnitude_m / (geom.tendon_offset * geom.backbone_length)
    return ArcParameters(curvature, math.atan2(q.q2, q.q1), geom.backbone_length)


def _planar_tip(arc: ArcParameters) -> tuple[float, float]:
    """In-plane tip offset ``(x, z)`` of the arc before rotating by phi."""
    length = arc.arc_length
    theta = arc.bend_angle
    if theta < STRAIGHT_THRESHOLD:
        # Series of (1 - cos t)/k and sin(t)/k with k = t / L
        theta_sq = theta * theta
        return length * theta * (0.5 - theta_sq / 24.0), length * (1.0 - theta_sq / 6.0)
    half_sin = math.sin(0.5 * theta)
    return 2.0 * half_sin * half_sin / arc.curvature, math.sin(theta) / arc.curvature


def arc_to_pose(arc: ArcParameters) -> RigidPose:
    """Tip pose of a constant-curvature arc.

    Args:
        arc (ArcParameters): Arc to evaluate.

    Returns:
        RigidPose: Tip rotation and translation in the base frame.
    """
    x, z = _planar_tip(arc)
    spin = rot_z(arc.bending_plane)
    translation = spin @ np.array([x, 0.0, z])
    rotation = spin @ rot_y(arc.bend_angle) @ spin.T
    return RigidPose(rotation=rotation, translation=translation)


def forward_kinematics(q: TendonDisplacement, geom: RobotGeometry) -> RigidPose:
    """Tip (camera) pose for a joint state.

    Args:
        q (TendonDisplacement): Joint state, millimetres.
        geom (RobotGeometry): Section geometry.

    Returns:
        RigidPose: Pose of the tip frame.
    """
    return arc_to_pose(tendons_to_arc(q, geom))
