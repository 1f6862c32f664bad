"""Canonical-frame geometry: parametric/implicit forms and helpers."""

import numpy as np
import pytest

from supertoroid.errors import DegenerateMeanSuperellipse
from supertoroid.geometry import (Intrinsics, Pose, Region, SupertoroidModel,
                                  SurfaceParams, bounding_box,
                                  canonical_to_world, classify,
                                  cross_section_halfwidth, implicit_value,
                                  mean_superellipse_point,
                                  mean_superellipse_radius,
                                  mean_superellipse_value,
                                  section_angle_from_polar, signed_pow,
                                  surface_point, world_to_canonical)

TORUS = Intrinsics(1, 1, 1, 2, 1, 1)


def random_intrinsics(rng, eps_lo=0.3, eps_hi=2.4, a4_lo=1.1, a4_hi=4.0):
    return Intrinsics(
        a1=rng.uniform(0.5, 1.5),
        a2=rng.uniform(0.5, 1.5),
        a3=rng.uniform(0.3, 1.2),
        a4=rng.uniform(a4_lo, a4_hi),
        eps1=rng.uniform(eps_lo, eps_hi),
        eps2=rng.uniform(eps_lo, eps_hi),
    )


class TestSignedPow:
    def test_negative_base(self):
        assert signed_pow(-0.5, 2.0) == pytest.approx(-0.25, abs=1e-15)

    def test_zero_base(self):
        assert signed_pow(0.0, 0.3) == 0.0

    def test_unit_base(self):
        for e in (0.2, 1.0, 2.5, 7.0):
            assert signed_pow(1.0, e) == 1.0

    def test_odd_symmetry_exact(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-3, 3, size=200)
        e = rng.uniform(0.1, 3.0, size=200)
        assert np.array_equal(signed_pow(-x, e), -signed_pow(x, e))


class TestSurfacePoint:
    def test_torus_outer_equator(self):
        np.testing.assert_allclose(surface_point(TORUS, 0.0, 0.0),
                                   [3, 0, 0], atol=1e-14)

    def test_torus_tube_top(self):
        np.testing.assert_allclose(surface_point(TORUS, np.pi / 2, 0.0),
                                   [2, 0, 1], atol=1e-14)

    def test_general_point_frozen(self):
        # independently evaluated from the parametric formula
        i = Intrinsics(1, 2, 0.5, 3, 0.8, 1.3)
        np.testing.assert_allclose(
            surface_point(i, 0.7, 1.1),
            [1.3622273737696393, 6.555138325346822, 0.351719234955059],
            rtol=1e-14)

    def test_symmetries(self):
        rng = np.random.default_rng(1)
        i = random_intrinsics(rng)
        eta = rng.uniform(-np.pi, np.pi, 50)
        omega = rng.uniform(-np.pi, np.pi, 50)
        p = surface_point(i, eta, omega)
        flip_y = surface_point(i, eta, -omega)
        np.testing.assert_allclose(flip_y * [1, -1, 1], p, atol=1e-12)
        flip_z = surface_point(i, -eta, omega)
        np.testing.assert_allclose(flip_z * [1, 1, -1], p, atol=1e-12)
        flip_x = surface_point(i, eta, np.pi - omega)
        np.testing.assert_allclose(flip_x * [-1, 1, 1], p, atol=1e-12)


class TestImplicit:
    def test_surface_points_have_unit_value(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            i = random_intrinsics(rng)
            eta = rng.uniform(-np.pi, np.pi, (64, 1))
            omega = rng.uniform(-np.pi, np.pi, (1, 64))
            f = implicit_value(i, surface_point(i, eta, omega))
            np.testing.assert_allclose(f, 1.0, atol=1e-8)

    def test_tube_centerline_is_zero(self):
        assert implicit_value(TORUS, [2, 0, 0]) == pytest.approx(0.0, abs=1e-14)

    def test_outside_value(self):
        assert implicit_value(TORUS, [4, 0, 0]) == pytest.approx(4.0, rel=1e-12)

    def test_origin_is_finite(self):
        assert implicit_value(TORUS, [0, 0, 0]) == pytest.approx(4.0)

    def test_sign_flip_invariance(self):
        rng = np.random.default_rng(3)
        i = random_intrinsics(rng)
        p = rng.uniform(-3, 3, (100, 3))
        f = implicit_value(i, p)
        for signs in ([-1, 1, 1], [1, -1, 1], [1, 1, -1]):
            np.testing.assert_allclose(implicit_value(i, p * signs), f,
                                       rtol=1e-12)


class TestClassify:
    def test_inside(self):
        assert classify(TORUS, [2.5, 0, 0], 1e-6) is Region.INSIDE

    def test_on_surface(self):
        assert classify(TORUS, [3, 0, 0], 1e-6) is Region.ON_SURFACE

    def test_hole_is_outside(self):
        assert classify(TORUS, [0, 0, 0], 1e-6) is Region.OUTSIDE

    def test_negative_tol_rejected(self):
        with pytest.raises(ValueError):
            classify(TORUS, [1, 0, 0], -1.0)


class TestMeanSuperellipse:
    def test_circular_radius(self):
        for omega in np.linspace(-np.pi, np.pi, 17):
            assert mean_superellipse_radius(TORUS, omega) == \
                pytest.approx(2.0, abs=1e-12)

    def test_axis_radius(self):
        i = Intrinsics(1, 2, 1, 3, 1, 1)
        assert mean_superellipse_radius(i, np.pi / 2) == pytest.approx(6.0)

    def test_radius_frozen(self):
        # independently evaluated from the radius formula
        i = Intrinsics(1, 2, 1, 3, 1, 0.7)
        assert mean_superellipse_radius(i, 0.9) == \
            pytest.approx(5.495545026150614, rel=1e-13)

    def test_value_on_off_circle(self):
        assert mean_superellipse_value(TORUS, [2, 0]) == pytest.approx(1.0)
        assert mean_superellipse_value(TORUS, [4, 0]) == pytest.approx(4.0)
        assert mean_superellipse_value(TORUS, [0, 0]) == 0.0

    def test_parametric_curve_has_unit_value(self):
        rng = np.random.default_rng(4)
        i = random_intrinsics(rng)
        for omega in np.linspace(-np.pi, np.pi, 33):
            q = mean_superellipse_point(i, omega)
            assert mean_superellipse_value(i, q) == pytest.approx(1.0,
                                                                  abs=1e-10)

    def test_degenerate_a4_rejected(self):
        flat = Intrinsics(1, 1, 1, 0.0, 1, 1)
        with pytest.raises(DegenerateMeanSuperellipse):
            mean_superellipse_radius(flat, 0.3)
        with pytest.raises(DegenerateMeanSuperellipse):
            mean_superellipse_value(flat, [1, 1])


class TestSectionAngle:
    def test_identity_when_circular(self):
        for omega in np.linspace(-3, 3, 25):
            assert section_angle_from_polar(TORUS, omega) == \
                pytest.approx(omega, abs=1e-12)

    def test_boundary_fixed_points(self):
        i = Intrinsics(1, 2, 1, 2, 1, 0.8)
        for omega in (0.0, np.pi / 2, -np.pi / 2, np.pi):
            assert section_angle_from_polar(i, omega) == \
                pytest.approx(omega, abs=1e-12)

    def test_frozen_value(self):
        # solved numerically: the parametric mean-superellipse point at the
        # returned angle lies on the ray at polar angle 0.5
        i = Intrinsics(1, 2, 1, 2, 1, 0.8)
        assert section_angle_from_polar(i, 0.5) == \
            pytest.approx(0.19496293720292093, abs=1e-12)

    def test_parametric_point_lies_on_ray(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            i = random_intrinsics(rng)
            omega_pi = rng.uniform(-np.pi, np.pi)
            omega_s = section_angle_from_polar(i, omega_pi)
            q = mean_superellipse_point(i, omega_s)
            assert np.arctan2(q[1], q[0]) == pytest.approx(omega_pi,
                                                           abs=1e-9)


class TestHalfwidth:
    def test_circular(self):
        for omega in np.linspace(-3, 3, 7):
            assert cross_section_halfwidth(TORUS, omega) == pytest.approx(1.0)

    def test_axis_value(self):
        i = Intrinsics(1, 2, 1, 2, 1, 1.3)
        assert cross_section_halfwidth(i, 0.0) == pytest.approx(1.0)

    def test_frozen_value(self):
        i = Intrinsics(1, 2, 1, 2, 1, 1.4)
        assert cross_section_halfwidth(i, 0.6) == \
            pytest.approx(1.179613791387339, rel=1e-13)


class TestFrames:
    def test_identity_pose(self):
        m = SupertoroidModel(TORUS, Pose.identity())
        np.testing.assert_allclose(world_to_canonical(m, [1, 2, 3]),
                                   [1, 2, 3])

    def test_pure_translation(self):
        m = SupertoroidModel(TORUS, Pose([1, 0, 0], [1, 0, 0, 0]))
        np.testing.assert_allclose(world_to_canonical(m, [1, 0, 0]),
                                   [0, 0, 0], atol=1e-15)

    def test_round_trip(self):
        rng = np.random.default_rng(6)
        q = rng.normal(size=4)
        m = SupertoroidModel(TORUS, Pose(rng.normal(size=3), q))
        p = rng.normal(size=(50, 3))
        np.testing.assert_allclose(
            world_to_canonical(m, canonical_to_world(m, p)), p, atol=1e-12)


class TestBoundingBox:
    def test_torus_box(self):
        np.testing.assert_allclose(bounding_box(TORUS),
                                   [[-3, 3], [-3, 3], [-1, 1]])

    def test_scaled_box(self):
        i = Intrinsics(1, 2, 0.5, 3, 1, 1)
        np.testing.assert_allclose(bounding_box(i),
                                   [[-4, 4], [-8, 8], [-0.5, 0.5]])

    def test_contains_random_samples(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            i = random_intrinsics(rng)
            eta = rng.uniform(-np.pi, np.pi, 2000)
            omega = rng.uniform(-np.pi, np.pi, 2000)
            p = surface_point(i, eta, omega)
            box = bounding_box(i)
            assert np.all(p >= box[:, 0] - 1e-12)
            assert np.all(p <= box[:, 1] + 1e-12)


class TestTypes:
    def test_intrinsics_validation(self):
        with pytest.raises(ValueError):
            Intrinsics(0, 1, 1, 2, 1, 1)
        with pytest.raises(ValueError):
            Intrinsics(1, 1, 1, -0.1, 1, 1)
        with pytest.raises(ValueError):
            Intrinsics(1, 1, 1, 2, 0.01, 1)
        with pytest.raises(ValueError):
            Intrinsics(1, 1, 1, 2, 1, 3.0)

    def test_a4_flags(self):
        assert Intrinsics(1, 1, 1, 2, 1, 1).has_hole
        assert Intrinsics(1, 1, 1, 0.5, 1, 1).is_apple_shaped
        assert not Intrinsics(1, 1, 1, 0.5, 1, 1).has_hole

    def test_pose_renormalizes_quaternion(self):
        pose = Pose([0, 0, 0], [2, 0, 0, 0])
        assert np.linalg.norm(pose.quaternion) == pytest.approx(1.0,
                                                                abs=1e-12)

    def test_surface_params_wrap(self):
        s = SurfaceParams(eta=3 * np.pi, omega=-3 * np.pi)
        assert -np.pi < s.eta <= np.pi
        assert -np.pi < s.omega <= np.pi
