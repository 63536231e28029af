"""Ray-cast rendering of a single textured plane.

The scene is one fronto-parallel plane at ``z = home_height + plane_distance`` in
the robot base frame, i.e. ``plane_distance`` metres in front of the camera when
the robot is straight. The target texture is centred on the base z-axis and
spans ``[-halfwidth, halfwidth]`` along x; its extent along y follows the
texture aspect ratio. Texture columns run along +x and rows along +y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from continuum_dvs.core.exceptions import ValidationError
from continuum_dvs.kinematics import RigidPose
from continuum_dvs.scene.camera import CameraIntrinsics
from continuum_dvs.scene.sampling import ImageBuffer, as_image, bilinear_sample

# Rays closer to parallel than this never reach the plane
_MIN_DIRECTION_Z = 1e-12


@dataclass(frozen=True)
class PlanarScene:
    """A textured plane facing the straight robot.

    Attributes:
        target_texture (ImageBuffer): RGB texture in [0, 1].
        plane_distance (float): Stand-off D from the home camera, metres.
        plane_halfwidth (float): Half the physical texture width, metres.
        home_height (float): Camera height when straight (the backbone length L).
        background (tuple[float, float, float]): Colour of rays missing the texture.
    """

    target_texture: ImageBuffer
    plane_distance: float = 0.5
    plane_halfwidth: float = 0.25
    home_height: float = 0.4
    background: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "target_texture", as_image(self.target_texture, field="target_texture")
        )
        if self.plane_distance <= 0 or self.plane_halfwidth <= 0:
            raise ValidationError(
                "Plane distance and halfwidth must be positive",
                field="plane",
                value=(self.plane_distance, self.plane_halfwidth),
            )

    @property
    def plane_z(self) -> float:
        """Height of the plane in the base frame."""
        return self.home_height + self.plane_distance

    @property
    def plane_halfheight(self) -> float:
        """Half the physical texture height, from the texture aspect ratio."""
        height, width = self.target_texture.shape[:2]
        return self.plane_halfwidth * height / width

    def covers_home_view(self, intr: CameraIntrinsics) -> bool:
        """Whether the straight-robot view lies strictly inside the texture."""
        return (
            intr.footprint_width(self.plane_distance) / 2.0 < self.plane_halfwidth
            and intr.footprint_height(self.plane_distance) / 2.0 < self.plane_halfheight
        )


def render(scene: PlanarScene, camera_pose: RigidPose, intr: CameraIntrinsics) -> ImageBuffer:
    """Render the camera view of the scene.

    Args:
        scene (PlanarScene): Plane and texture.
        camera_pose (RigidPose): Camera pose in the base frame (optical axis = +z).
        intr (CameraIntrinsics): Pinhole intrinsics.

    Returns:
        ImageBuffer: ``(height_px, width_px, 3)`` raster in [0, 1].
    """
    pose = camera_pose.validate()
    rotation = np.asarray(pose.rotation, dtype=np.float64)
    origin = np.asarray(pose.translation, dtype=np.float64)

    directions = intr.ray_directions() @ rotation.T
    dz = directions[..., 2]
    forward = dz > _MIN_DIRECTION_Z
    distance = np.where(forward, (scene.plane_z - origin[2]) / np.where(forward, dz, 1.0), -1.0)
    hits = forward & (distance > 0.0)

    hit_x = origin[0] + distance * directions[..., 0]
    hit_y = origin[1] + distance * directions[..., 1]
    halfwidth = scene.plane_halfwidth
    halfheight = scene.plane_halfheight
    inside = hits & (np.abs(hit_x) <= halfwidth) & (np.abs(hit_y) <= halfheight)

    texture = scene.target_texture
    tex_height, tex_width = texture.shape[:2]
    u = (hit_x + halfwidth) / (2.0 * halfwidth) * tex_width - 0.5
    v = (hit_y + halfheight) / (2.0 * halfheight) * tex_height - 0.5

    image = np.empty((intr.height_px, intr.width_px, 3), dtype=np.float64)
    image[...] = np.asarray(scene.background, dtype=np.float64)
    image[inside] = bilinear_sample(texture, u[inside], v[inside])
    return np.clip(image, 0.0, 1.0)
