"""Differential geometry: tangents, seam limits, normals, curvatures."""

import numpy as np
import pytest

from supertoroid.errors import CuspPoint, DegenerateMetric, SeamSingularity
from supertoroid.diffgeo import (fundamental_forms, local_frame, normal,
                                 normal_curvatures,
                                 normal_section_curvature,
                                 principal_and_mean_curvature,
                                 surface_normals, tangent_eta,
                                 tangent_omega, unit_tangents)
from supertoroid.geometry import Intrinsics, implicit_value, surface_point

TORUS = Intrinsics(1, 1, 1, 2, 1, 1)


def fd_tangents(i, eta, omega, h=1e-6):
    t_o = (surface_point(i, eta, omega + h)
           - surface_point(i, eta, omega - h)) / (2 * h)
    t_e = (surface_point(i, eta + h, omega)
           - surface_point(i, eta - h, omega)) / (2 * h)
    return t_o, t_e


def interior_grid(rng, n=50, margin=0.1):
    # keep clear of the seams at multiples of pi/2
    base = np.linspace(margin, np.pi / 2 - margin, n)
    quadrant = rng.integers(0, 4, n)
    return base + quadrant * np.pi / 2 - np.pi * (quadrant >= 2)


class TestTangents:
    def test_torus_frozen_value(self):
        # finite-difference verified: (-3/sqrt(2)) (1, -1, 0)
        t = tangent_omega(TORUS, 0.0, np.pi / 4)
        np.testing.assert_allclose(t, [-2.1213203435596424,
                                       2.1213203435596424, 0.0], rtol=1e-12)

    def test_omega_tangent_z_is_zero(self):
        rng = np.random.default_rng(0)
        i = Intrinsics(1, 2, 0.5, 3, 0.7, 1.2)
        t = tangent_omega(i, rng.uniform(-3, 3, 30), rng.uniform(0.2, 1.2, 30))
        assert np.all(t[..., 2] == 0.0)

    def test_eta_tangent_y_zero_at_omega_zero(self):
        t = tangent_eta(TORUS, np.pi / 4, 0.0)
        assert t[1] == 0.0
        np.testing.assert_allclose(t / np.linalg.norm(t),
                                   [-np.sqrt(0.5), 0, np.sqrt(0.5)],
                                   atol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            i = Intrinsics(rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5),
                           rng.uniform(0.3, 1.2), rng.uniform(1.2, 4),
                           rng.uniform(0.4, 1.9), rng.uniform(0.4, 1.9))
            eta = interior_grid(rng)
            omega = interior_grid(rng)
            t_o = tangent_omega(i, eta, omega)
            t_e = tangent_eta(i, eta, omega)
            fd_o, fd_e = fd_tangents(i, eta, omega)
            scale_o = np.linalg.norm(t_o, axis=-1, keepdims=True)
            scale_e = np.linalg.norm(t_e, axis=-1, keepdims=True)
            assert np.max(np.abs(t_o - fd_o) / scale_o) < 1e-5
            assert np.max(np.abs(t_e - fd_e) / scale_e) < 1e-5

    def test_seam_singularity_raised(self):
        boxy = Intrinsics(1, 1, 1, 2, 1, 0.5)
        with pytest.raises(SeamSingularity):
            tangent_omega(boxy, 0.3, 0.0)


class TestUnitTangentSeams:
    # tabulated one-sided limits at the seams, keyed on the exponent regime
    def test_omega_seam_below_2(self):
        i = Intrinsics(1, 2, 1, 2, 1, 1.5)
        t0, _ = unit_tangents(i, 0.3, 0.0)
        t90, _ = unit_tangents(i, 0.3, np.pi / 2)
        np.testing.assert_allclose(t0, [0, 1, 0], atol=1e-9)
        np.testing.assert_allclose(t90, [-1, 0, 0], atol=1e-9)

    def test_omega_seam_at_2(self):
        i = Intrinsics(1, 2, 1, 2, 1, 2.0)
        expected = np.array([-1, 2, 0]) / np.sqrt(5)
        t0, _ = unit_tangents(i, 0.3, 0.0)
        t90, _ = unit_tangents(i, 0.3, np.pi / 2)
        np.testing.assert_allclose(t0, expected, atol=1e-9)
        np.testing.assert_allclose(t90, expected, atol=1e-9)

    def test_omega_seam_above_2(self):
        i = Intrinsics(1, 2, 1, 2, 1, 2.5)
        t0, _ = unit_tangents(i, 0.3, 0.0)
        t90, _ = unit_tangents(i, 0.3, np.pi / 2)
        np.testing.assert_allclose(t0, [-1, 0, 0], atol=1e-9)
        np.testing.assert_allclose(t90, [0, 1, 0], atol=1e-9)

    def test_eta_seam_below_2(self):
        i = Intrinsics(1, 2, 1, 2, 1.5, 1.0)
        _, t0 = unit_tangents(i, 0.0, 0.7)
        np.testing.assert_allclose(t0, [0, 0, 1], atol=1e-9)
        _, t90 = unit_tangents(i, np.pi / 2, 0.7)
        cw, sw = np.cos(0.7), np.sin(0.7)
        a_w = np.sqrt(cw ** 2 + 4 * sw ** 2)
        np.testing.assert_allclose(t90, [-cw / a_w, -2 * sw / a_w, 0],
                                   atol=1e-9)

    def test_eta_seam_at_2(self):
        i = Intrinsics(1, 2, 1, 2, 2.0, 1.0)
        cw, sw = np.cos(0.7), np.sin(0.7)
        a_w = np.sqrt(cw ** 2 + 4 * sw ** 2)
        expected = np.array([-cw, -2 * sw, 1.0]) / np.sqrt(a_w ** 2 + 1.0)
        for eta in (0.0, np.pi / 2):
            _, t = unit_tangents(i, eta, 0.7)
            np.testing.assert_allclose(t, expected, atol=1e-9)

    def test_eta_seam_above_2(self):
        i = Intrinsics(1, 2, 1, 2, 2.5, 1.0)
        cw, sw = np.cos(0.7), np.sin(0.7)
        a_w = np.sqrt(cw ** 2 + 4 * sw ** 2)
        _, t0 = unit_tangents(i, 0.0, 0.7)
        np.testing.assert_allclose(t0, [-cw / a_w, -2 * sw / a_w, 0],
                                   atol=1e-9)
        _, t90 = unit_tangents(i, np.pi / 2, 0.7)
        np.testing.assert_allclose(t90, [0, 0, 1], atol=1e-9)

    def test_interior_unit_tangents_are_normalized(self):
        rng = np.random.default_rng(2)
        i = Intrinsics(1, 2, 0.5, 3, 0.8, 1.3)
        for _ in range(50):
            eta = rng.uniform(0.1, 1.4)
            omega = rng.uniform(0.1, 1.4)
            t_o, t_e = unit_tangents(i, eta, omega)
            assert np.linalg.norm(t_o) == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.norm(t_e) == pytest.approx(1.0, abs=1e-12)


class TestNormal:
    def test_torus_outer_equator(self):
        np.testing.assert_allclose(normal(TORUS, 0.0, 0.0), [1, 0, 0],
                                   atol=1e-12)

    def test_torus_tube_top(self):
        np.testing.assert_allclose(normal(TORUS, np.pi / 2, 0.4), [0, 0, 1],
                                   atol=1e-12)

    def test_orthogonal_to_tangents(self):
        rng = np.random.default_rng(3)
        i = Intrinsics(1, 2, 0.5, 3, 0.7, 1.2)
        for _ in range(100):
            eta = rng.uniform(0.05, 1.5)
            omega = rng.uniform(0.05, 1.5)
            n = normal(i, eta, omega)
            t_o = tangent_omega(i, eta, omega)
            t_e = tangent_eta(i, eta, omega)
            assert abs(n @ t_o) / np.linalg.norm(t_o) < 1e-8
            assert abs(n @ t_e) / np.linalg.norm(t_e) < 1e-8

    def test_outward_against_implicit_gradient(self):
        rng = np.random.default_rng(4)
        i = Intrinsics(1, 2, 0.5, 3, 0.7, 1.2)
        h = 1e-6
        eye = np.eye(3)
        for _ in range(50):
            eta = rng.uniform(0.1, 1.4)
            omega = rng.uniform(0.1, 1.4)
            p = surface_point(i, eta, omega)
            grad = np.array([
                (implicit_value(i, p + h * eye[k])
                 - implicit_value(i, p - h * eye[k])) / (2 * h)
                for k in range(3)])
            assert normal(i, eta, omega) @ grad > 0

    def test_cusp_raises(self):
        # exponents above 2 at both seams: tangents become parallel
        i = Intrinsics(1, 2, 1, 2, 2.5, 2.5)
        with pytest.raises(CuspPoint):
            normal(i, 0.0, 0.0)

    def test_vectorized_matches_scalar(self):
        i = Intrinsics(1, 2, 0.5, 3, 0.7, 1.2)
        eta = np.array([0.3, 0.9, -1.2])
        omega = np.array([0.5, 1.1, -0.4])
        batch = surface_normals(i, eta, omega)
        for k in range(3):
            np.testing.assert_allclose(batch[k],
                                       normal(i, eta[k], omega[k]),
                                       atol=1e-12)


class TestNormalCurvatures:
    def test_torus_tube_curvature_everywhere(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            eta = rng.uniform(-np.pi, np.pi)
            omega = rng.uniform(-np.pi, np.pi)
            k_o, k_e = normal_curvatures(TORUS, eta, omega)
            assert k_e == pytest.approx(1.0, abs=1e-9)
            assert k_o == pytest.approx(1.0 / (2 + np.cos(eta)), abs=1e-9)

    def test_torus_equator_value(self):
        k_o, _ = normal_curvatures(TORUS, 0.0, np.pi / 4)
        assert k_o == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_matches_fd_curve_curvature(self):
        # independent oracle: curvature of the coordinate curve as a space
        # curve, |r' x r''| / |r'|^3 by central differences
        i = Intrinsics(1, 2, 0.5, 3, 0.7, 1.2)
        eta, omega = 0.6, 0.9
        h = 1e-5

        def omega_curve(t):
            return surface_point(i, eta, t)

        def eta_curve(t):
            return surface_point(i, t, omega)

        for curve, expected in ((omega_curve,
                                 normal_curvatures(i, eta, omega)[0]),
                                (eta_curve,
                                 normal_curvatures(i, eta, omega)[1])):
            t0 = omega if curve is omega_curve else eta
            r1 = (curve(t0 + h) - curve(t0 - h)) / (2 * h)
            r2 = (curve(t0 + h) - 2 * curve(t0) + curve(t0 - h)) / h ** 2
            kappa = np.linalg.norm(np.cross(r1, r2)) / \
                np.linalg.norm(r1) ** 3
            assert expected == pytest.approx(kappa, rel=1e-4)

    def test_seam_divergence_raises(self):
        pointy = Intrinsics(1, 1, 1, 2, 1, 1.7)
        with pytest.raises(SeamSingularity):
            normal_curvatures(pointy, 0.4, 0.0)

    def test_boxy_seam_flattens_to_zero(self):
        boxy = Intrinsics(1, 1, 1, 2, 1, 0.5)
        k_o, _ = normal_curvatures(boxy, 0.4, 0.0)
        assert k_o == 0.0


class TestFundamentalForms:
    def test_torus_coordinate_curves_orthogonal(self):
        (_, F, _), _ = fundamental_forms(TORUS, 0.7, 1.1)
        assert F == pytest.approx(0.0, abs=1e-12)

    def test_general_curves_not_orthogonal(self):
        i = Intrinsics(1, 2, 0.5, 3, 0.7, 1.2)
        (_, F, _), _ = fundamental_forms(i, 0.6, 0.9)
        assert abs(F) > 1e-3

    def test_torus_principal_curvatures(self):
        info = principal_and_mean_curvature(
            fundamental_forms(TORUS, 0.0, np.pi / 4))
        assert info.k1 == pytest.approx(1.0, abs=1e-8)
        assert info.k2 == pytest.approx(1.0 / 3.0, abs=1e-8)
        assert info.mean_H == pytest.approx(2.0 / 3.0, abs=1e-8)

    def test_torus_inner_side_is_saddle(self):
        eta = 2.6  # inner half: cos(eta) < 0
        info = principal_and_mean_curvature(
            fundamental_forms(TORUS, eta, np.pi / 4))
        expected = np.cos(eta) / (2 + np.cos(eta))
        assert info.k1 == pytest.approx(1.0, abs=1e-8)
        assert info.k2 == pytest.approx(expected, abs=1e-8)

    def test_coordinate_direction_matches_curvs_at_torus_equator(self):
        forms = fundamental_forms(TORUS, 0.0, np.pi / 4)
        k_o, k_e = normal_curvatures(TORUS, 0.0, np.pi / 4)
        info = principal_and_mean_curvature(forms)
        assert info.k_omega == pytest.approx(k_o, abs=1e-6)
        assert info.k_eta == pytest.approx(k_e, abs=1e-6)

    def test_shape_operator_eigenvalue_identity(self):
        rng = np.random.default_rng(6)
        i = Intrinsics(1, 2, 0.5, 3, 0.7, 1.2)
        for _ in range(20):
            eta = rng.uniform(0.15, 1.35)
            omega = rng.uniform(0.15, 1.35)
            forms = fundamental_forms(i, eta, omega)
            (E, F, G), (L, M, N) = forms
            info = principal_and_mean_curvature(forms)
            for k in (info.k1, info.k2):
                det = (L - k * E) * (N - k * G) - (M - k * F) ** 2
                assert det == pytest.approx(0.0, abs=1e-8 * (E * G + 1))
            assert info.k1 >= info.k2
            assert info.mean_H == pytest.approx((info.k1 + info.k2) / 2)

    def test_euler_bracket(self):
        rng = np.random.default_rng(7)
        i = Intrinsics(1, 2, 0.5, 3, 0.7, 1.2)
        for _ in range(10):
            eta = rng.uniform(0.15, 1.35)
            omega = rng.uniform(0.15, 1.35)
            forms = fundamental_forms(i, eta, omega)
            info = principal_and_mean_curvature(forms)
            for theta in np.linspace(0, np.pi, 8, endpoint=False):
                k = normal_section_curvature(forms, np.cos(theta),
                                             np.sin(theta))
                assert info.k2 - 1e-6 <= k <= info.k1 + 1e-6

    def test_seam_guard(self):
        i = Intrinsics(1, 2, 0.5, 3, 0.7, 1.2)
        with pytest.raises(SeamSingularity):
            fundamental_forms(i, 0.0, 0.9)

    def test_mean_curvature_pose_invariant(self):
        # curvature queries take intrinsics only; any rigid placement of the
        # same shape reports identical values
        info = principal_and_mean_curvature(
            fundamental_forms(TORUS, 0.4, 0.8))
        info2 = principal_and_mean_curvature(
            fundamental_forms(Intrinsics(1, 1, 1, 2, 1, 1), 0.4, 0.8))
        assert info.mean_H == info2.mean_H

    def test_degenerate_metric(self):
        with pytest.raises(DegenerateMetric):
            principal_and_mean_curvature(((0, 0, 0), (1, 0, 1)))


class TestLocalFrame:
    def test_frame_consistency(self):
        frame = local_frame(TORUS, 0.5, 0.9)
        np.testing.assert_allclose(frame.point,
                                   surface_point(TORUS, 0.5, 0.9))
        assert abs(frame.normal @ frame.t_omega) < 1e-8
        assert abs(frame.normal @ frame.t_eta) < 1e-8
        assert np.linalg.norm(frame.normal) == pytest.approx(1.0)
