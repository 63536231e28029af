"""Constant-curvature forward kinematics."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from continuum_dvs.core.exceptions import ValidationError
from continuum_dvs.kinematics import (
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
from continuum_dvs.kinematics.constant_curvature import STRAIGHT_THRESHOLD

pytestmark = pytest.mark.unit

DEFAULT = RobotGeometry()
actuation = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


def _integrated_tip(curvature: float, phi: float, length: float, steps: int = 400) -> np.ndarray:
    """RK4 integration of the planar arc ``x' = sin(k s), z' = cos(k s)``, rotated by phi."""
    h = length / steps

    def slope(s: float) -> np.ndarray:
        return np.array([math.sin(curvature * s), math.cos(curvature * s)])

    point = np.zeros(2)
    for i in range(steps):
        s = i * h
        k1 = slope(s)
        k2 = slope(s + h / 2)
        k3 = slope(s + h / 2)
        k4 = slope(s + h)
        point = point + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return rot_z(phi) @ np.array([point[0], 0.0, point[1]])


class TestTendonsToArc:
    def test_zero_displacement_is_straight(self) -> None:
        arc = tendons_to_arc(TendonDisplacement(0.0, 0.0), DEFAULT)
        assert arc.curvature == 0.0
        assert arc.bending_plane == 0.0
        assert arc.arc_length == pytest.approx(0.4)

    def test_one_millimetre_on_first_tendon(self) -> None:
        arc = tendons_to_arc(TendonDisplacement(1.0, 0.0), DEFAULT)
        assert arc.curvature == pytest.approx(1.3889, abs=1e-4)
        assert arc.bending_plane == 0.0

    def test_second_tendon_bends_in_quarter_plane(self) -> None:
        arc = tendons_to_arc(TendonDisplacement(0.0, 1.0), DEFAULT)
        assert arc.curvature == pytest.approx(1.3889, abs=1e-4)
        assert arc.bending_plane == pytest.approx(math.pi / 2)

    def test_negative_first_tendon_maps_to_pi(self) -> None:
        arc = tendons_to_arc(TendonDisplacement(-2.0, 0.0), DEFAULT)
        assert arc.bending_plane == pytest.approx(math.pi)

    def test_non_finite_displacement_rejected(self) -> None:
        with pytest.raises(ValidationError):
            TendonDisplacement(math.nan, 0.0)


class TestArcToPose:
    def test_straight_arc(self) -> None:
        pose = arc_to_pose(ArcParameters(0.0, 0.0, 0.4))
        np.testing.assert_allclose(pose.translation, [0.0, 0.0, 0.4], atol=1e-15)
        np.testing.assert_allclose(pose.rotation, np.eye(3), atol=1e-15)

    def test_one_millimetre_tip_position(self) -> None:
        pose = arc_to_pose(ArcParameters(1.3889, 0.0, 0.4))
        np.testing.assert_allclose(pose.translation, [0.1083, 0.0, 0.3797], atol=1e-4)

    def test_rotation_is_bend_about_y_in_zero_plane(self) -> None:
        pose = arc_to_pose(ArcParameters(1.0, 0.0, 0.4))
        np.testing.assert_allclose(pose.rotation, rot_y(0.4), atol=1e-12)

    def test_continuous_across_straightness_threshold(self) -> None:
        length = 0.4
        below = arc_to_pose(ArcParameters(STRAIGHT_THRESHOLD * 0.999999 / length, 0.7, length))
        above = arc_to_pose(ArcParameters(STRAIGHT_THRESHOLD * 1.000001 / length, 0.7, length))
        assert np.max(np.abs(below.translation - above.translation)) < 1e-9
        assert np.max(np.abs(below.rotation - above.rotation)) < 1e-9

    @pytest.mark.parametrize("theta", [1e-9, 1e-7, 5e-7, 2e-6, 1e-5])
    def test_series_matches_closed_form_near_zero(self, theta: float) -> None:
        length = 0.4
        pose = arc_to_pose(ArcParameters(theta / length, 0.0, length))
        kappa = theta / length
        expected_x = 2.0 * math.sin(theta / 2.0) ** 2 / kappa
        assert pose.translation[0] == pytest.approx(expected_x, abs=1e-12)
        assert pose.translation[2] == pytest.approx(length, abs=1e-9)


class TestForwardKinematics:
    def test_home_pose(self) -> None:
        pose = forward_kinematics(TendonDisplacement(0.0, 0.0), DEFAULT)
        np.testing.assert_allclose(pose.translation, [0.0, 0.0, 0.4])
        np.testing.assert_allclose(pose.rotation, np.eye(3))

    def test_matches_numeric_arc_integration(self) -> None:
        rng = np.random.default_rng(0)
        for q1, q2 in rng.uniform(-10.0, 10.0, size=(100, 2)):
            q = TendonDisplacement(float(q1), float(q2))
            arc = tendons_to_arc(q, DEFAULT)
            pose = forward_kinematics(q, DEFAULT)
            oracle = _integrated_tip(arc.curvature, arc.bending_plane, arc.arc_length)
            np.testing.assert_allclose(pose.translation, oracle, atol=1e-6)
            # Tip tangent is the third column of the rotation
            theta = arc.bend_angle
            tangent = rot_z(arc.bending_plane) @ np.array([math.sin(theta), 0.0, math.cos(theta)])
            np.testing.assert_allclose(pose.rotation[:, 2], tangent, atol=1e-6)

    @given(q1=actuation, q2=actuation)
    def test_rotation_is_orthonormal(self, q1: float, q2: float) -> None:
        pose = forward_kinematics(TendonDisplacement(q1, q2), DEFAULT)
        assert pose.is_orthonormal()

    @given(q1=actuation, q2=actuation, theta=st.floats(min_value=-math.pi, max_value=math.pi))
    def test_equivariant_under_joint_plane_rotation(self, q1: float, q2: float, theta: float) -> None:
        spin = rot_z(theta)
        rotated = spin[:2, :2] @ np.array([q1, q2])
        base = forward_kinematics(TendonDisplacement(q1, q2), DEFAULT)
        turned = forward_kinematics(TendonDisplacement.from_array(rotated), DEFAULT)
        np.testing.assert_allclose(turned.translation, spin @ base.translation, atol=1e-9)
        np.testing.assert_allclose(turned.rotation, spin @ base.rotation @ spin.T, atol=1e-9)

    def test_bends_toward_first_tendon_axis(self) -> None:
        pose = forward_kinematics(TendonDisplacement(4.0, -3.0), DEFAULT)
        assert pose.translation[0] > 0.0
        assert pose.translation[1] < 0.0
        assert pose.translation[2] < 0.4


class TestRigidPose:
    def test_identity_validates(self) -> None:
        pose = RigidPose.identity(0.4)
        assert pose.validate() is pose

    def test_scaled_rotation_rejected(self) -> None:
        with pytest.raises(ValidationError, match="orthonormal"):
            RigidPose(2.0 * np.eye(3), np.zeros(3)).validate()

    def test_reflection_rejected(self) -> None:
        with pytest.raises(ValidationError):
            RigidPose(np.diag([1.0, 1.0, -1.0]), np.zeros(3)).validate()

    def test_non_finite_translation_rejected(self) -> None:
        with pytest.raises(ValidationError, match="translation"):
            RigidPose(np.eye(3), np.array([0.0, np.inf, 0.0])).validate()


class TestTendonDisplacement:
    def test_clamped_to_limit(self) -> None:
        q = TendonDisplacement(12.0, -11.0).clamped(10.0)
        assert (q.q1, q.q2) == (10.0, -10.0)

    def test_within_limit_is_inclusive(self) -> None:
        assert TendonDisplacement(10.0, -10.0).within(10.0)
        assert not TendonDisplacement(10.0001, 0.0).within(10.0)
