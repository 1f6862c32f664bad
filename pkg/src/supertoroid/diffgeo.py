"""Differential geometry of the supertoroid surface.

Provides coordinate-curve tangents, unit tangents with their seam limits,
the outward Gauss-map normal, closed-form coordinate-curve curvatures, and
first/second fundamental forms with principal and mean curvatures.

Sign conventions: ``normal`` points outward.  The second fundamental form
is taken positive where the surface bends away from the outward normal, so
convex regions (sphere-like, the outer half of a torus) carry positive
principal curvatures and the inner half of a torus has one negative one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CuspPoint, DegenerateMetric, SeamSingularity
from .geometry import Intrinsics, cross_section_halfwidth, signed_pow, surface_point

SEAM_TOL = 1e-7
_EXP_EQ_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LocalFrame:
    """Surface point with unit tangents and outward unit normal."""

    point: np.ndarray
    t_omega: np.ndarray
    t_eta: np.ndarray
    normal: np.ndarray


@dataclass(frozen=True)
class CurvatureInfo:
    """Curvature summary at one surface point.

    k_omega and k_eta are the normal-section curvatures along the two
    coordinate directions (computed from the fundamental forms); k1 >= k2
    are the principal curvatures and mean_H their average.
    """

    k_omega: float
    k_eta: float
    k1: float
    k2: float
    mean_H: float
    first_form: tuple
    second_form: tuple


def tangent_omega(i: Intrinsics, eta, omega) -> np.ndarray:
    """Non-unit tangent along the omega coordinate curve.

    The z-component is identically zero.  Raises SeamSingularity if the
    expression is indeterminate (zero base, negative exponent) at an exact
    seam.
    """
    eta = np.asarray(eta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    g = i.a4 + signed_pow(np.cos(eta), i.eps1)
    so, co = np.sin(omega), np.cos(omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = -i.a1 * i.eps2 * g * so * np.abs(co) ** (i.eps2 - 1.0)
        ty = i.a2 * i.eps2 * g * co * np.abs(so) ** (i.eps2 - 1.0)
    out = np.stack(np.broadcast_arrays(tx, ty, np.zeros_like(tx)), axis=-1)
    if not np.all(np.isfinite(out)):
        raise SeamSingularity("omega tangent indeterminate at a seam")
    return out


def tangent_eta(i: Intrinsics, eta, omega) -> np.ndarray:
    """Non-unit tangent along the eta coordinate curve."""
    eta = np.asarray(eta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    se, ce = np.sin(eta), np.cos(eta)
    cw = signed_pow(np.cos(omega), i.eps2)
    sw = signed_pow(np.sin(omega), i.eps2)
    with np.errstate(divide="ignore", invalid="ignore"):
        common = i.eps1 * se * np.abs(ce) ** (i.eps1 - 1.0)
        tx = -i.a1 * common * cw
        ty = -i.a2 * common * sw
        tz = i.a3 * i.eps1 * ce * np.abs(se) ** (i.eps1 - 1.0)
    out = np.stack(np.broadcast_arrays(tx, ty, tz), axis=-1)
    if not np.all(np.isfinite(out)):
        raise SeamSingularity("eta tangent indeterminate at a seam")
    return out


def _sign_from_seam(v: float) -> float:
    # Convention at exact seams: treat the vanishing trig factor as 0+.
    return 1.0 if v >= 0.0 else -1.0


def _unit_tangent_omega(i: Intrinsics, eta: float, omega: float,
                        seam_tol: float) -> np.ndarray:
    so, co = math.sin(omega), math.cos(omega)
    at_s = abs(so) < seam_tol
    at_c = abs(co) < seam_tol
    if not (at_s or at_c):
        t = tangent_omega(i, eta, omega)
        return t / np.linalg.norm(t)

    e2 = i.eps2
    sgn_s = 1.0 if at_s else _sign_from_seam(so)
    sgn_c = 1.0 if at_c else _sign_from_seam(co)
    if abs(e2 - 2.0) <= _EXP_EQ_TOL:
        d = np.array([-i.a1 * sgn_s, i.a2 * sgn_c, 0.0])
        return d / np.linalg.norm(d)
    if e2 < 2.0:
        # the factor with the vanishing trig dominates
        if at_s:
            return np.array([0.0, sgn_c, 0.0])
        return np.array([-sgn_s, 0.0, 0.0])
    # e2 > 2: the finite factor survives
    if at_s:
        return np.array([-sgn_s, 0.0, 0.0])
    return np.array([0.0, sgn_c, 0.0])


def _unit_tangent_eta(i: Intrinsics, eta: float, omega: float,
                      seam_tol: float) -> np.ndarray:
    se, ce = math.sin(eta), math.cos(eta)
    at_s = abs(se) < seam_tol
    at_c = abs(ce) < seam_tol
    if not (at_s or at_c):
        t = tangent_eta(i, eta, omega)
        return t / np.linalg.norm(t)

    e1 = i.eps1
    cw = float(signed_pow(math.cos(omega), i.eps2))
    sw = float(signed_pow(math.sin(omega), i.eps2))
    a_w = cross_section_halfwidth(i, omega)
    sgn_s = 1.0 if at_s else _sign_from_seam(se)
    sgn_c = 1.0 if at_c else _sign_from_seam(ce)
    if abs(e1 - 2.0) <= _EXP_EQ_TOL:
        d = np.array([-i.a1 * cw * sgn_s, -i.a2 * sw * sgn_s, i.a3 * sgn_c])
        return d / math.sqrt(a_w * a_w + i.a3 * i.a3)
    in_plane = np.array([-i.a1 * cw * sgn_s, -i.a2 * sw * sgn_s, 0.0]) / a_w
    vertical = np.array([0.0, 0.0, sgn_c])
    if e1 < 2.0:
        return vertical if at_s else in_plane
    return in_plane if at_s else vertical


def unit_tangents(i: Intrinsics, eta: float, omega: float,
                  seam_tol: float = SEAM_TOL):
    """Unit tangents (t_omega, t_eta) with seam limits substituted.

    Within seam_tol of a parameter seam the tabulated one-sided limits are
    returned, keyed on the exponent regime (below, at, or above 2); the
    vanishing trig factor is treated as approached from above.
    """
    return (_unit_tangent_omega(i, eta, omega, seam_tol),
            _unit_tangent_eta(i, eta, omega, seam_tol))


def normal(i: Intrinsics, eta: float, omega: float,
           seam_tol: float = SEAM_TOL) -> np.ndarray:
    """Outward unit surface normal (Gauss map) at (eta, omega).

    Raises CuspPoint where the tangents degenerate (possible for
    exponents above 2).
    """
    t_o, t_e = unit_tangents(i, eta, omega, seam_tol)
    n = np.cross(t_o, t_e)
    m = np.linalg.norm(n)
    if m < 1e-12:
        raise CuspPoint("tangents are parallel; normal undefined")
    return n / m


def surface_normals(i: Intrinsics, eta, omega) -> np.ndarray:
    """Vectorized outward unit normals; falls back to the seam-aware
    scalar path where the raw tangents degenerate."""
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    eta, omega = np.broadcast_arrays(eta, omega)
    g = i.a4 + signed_pow(np.cos(eta), i.eps1)
    so, co = np.sin(omega), np.cos(omega)
    se, ce = np.sin(eta), np.cos(eta)
    with np.errstate(divide="ignore", invalid="ignore"):
        two = np.stack([
            -i.a1 * i.eps2 * g * so * np.abs(co) ** (i.eps2 - 1.0),
            i.a2 * i.eps2 * g * co * np.abs(so) ** (i.eps2 - 1.0),
            np.zeros_like(g),
        ], axis=-1)
        common = i.eps1 * se * np.abs(ce) ** (i.eps1 - 1.0)
        tee = np.stack([
            -i.a1 * common * signed_pow(co, i.eps2),
            -i.a2 * common * signed_pow(so, i.eps2),
            i.a3 * i.eps1 * ce * np.abs(se) ** (i.eps1 - 1.0),
        ], axis=-1)
        n = np.cross(two, tee)
        m = np.linalg.norm(n, axis=-1, keepdims=True)
        out = n / m
    bad = ~np.isfinite(out).all(axis=-1)
    if np.any(bad):
        flat_bad = np.argwhere(bad)
        for idx in flat_bad:
            t = tuple(idx)
            out[t] = normal(i, float(eta[t]), float(omega[t]))
    return out


def normal_curvatures(i: Intrinsics, eta, omega):
    """Closed-form curvatures (k_omega, k_eta) of the two coordinate curves.

    Evaluated in a cancelled form that extends continuously across seams:
    for unit exponents the values are exact everywhere; where a curve has a
    genuine corner (exponent above 1 at its seam) SeamSingularity is raised.
    Values are magnitudes (non-negative).
    """
    eta = np.asarray(eta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    e1, e2 = i.eps1, i.eps2
    g = i.a4 + signed_pow(np.cos(eta), e1)
    a_w = cross_section_halfwidth(i, omega)

    cs_o = np.abs(np.cos(omega) * np.sin(omega))
    cs_e = np.abs(np.cos(eta) * np.sin(eta))
    with np.errstate(divide="ignore", invalid="ignore"):
        denom_o = (i.a1 ** 2 * np.abs(np.sin(omega)) ** (4 - 2 * e2)
                   + i.a2 ** 2 * np.abs(np.cos(omega)) ** (4 - 2 * e2))
        k_o = (i.a1 * i.a2 * abs(e2 - 2.0) * cs_o ** (2.0 - 2.0 * e2)
               / (e2 * g * denom_o ** 1.5))
        denom_e = (i.a3 ** 2 * np.abs(np.cos(eta)) ** (4 - 2 * e1)
                   + a_w ** 2 * np.abs(np.sin(eta)) ** (4 - 2 * e1))
        k_e = (i.a3 * abs(e1 - 2.0) * a_w * cs_e ** (2.0 - 2.0 * e1)
               / (e1 * denom_e ** 1.5))
    if not (np.all(np.isfinite(k_o)) and np.all(np.isfinite(k_e))):
        raise SeamSingularity("coordinate-curve curvature diverges at seam")
    if k_o.ndim == 0:
        return float(k_o), float(k_e)
    return k_o, k_e


def _seam_guard(i: Intrinsics, eta: float, omega: float, guard: float):
    if abs(i.eps1 - 1.0) > _EXP_EQ_TOL:
        if min(abs(math.sin(eta)), abs(math.cos(eta))) < guard:
            raise SeamSingularity("eta seam: second derivatives undefined")
    if abs(i.eps2 - 1.0) > _EXP_EQ_TOL:
        if min(abs(math.sin(omega)), abs(math.cos(omega))) < guard:
            raise SeamSingularity("omega seam: second derivatives undefined")


def fundamental_forms(i: Intrinsics, eta: float, omega: float,
                      step: float = 1e-5):
    """First and second fundamental forms ((E, F, G), (L, M, N)).

    Ordering follows the eta-then-omega convention: E = t_eta . t_eta,
    G = t_omega . t_omega, L = II(eta, eta), N = II(omega, omega).  Second
    derivatives come from central differences of the analytic tangents;
    the second form is signed positive toward the inside (convex-positive).
    """
    _seam_guard(i, eta, omega, max(2.0 * step, SEAM_TOL))
    t_e = tangent_eta(i, eta, omega)
    t_o = tangent_omega(i, eta, omega)
    E = float(t_e @ t_e)
    F = float(t_e @ t_o)
    G = float(t_o @ t_o)

    n = normal(i, eta, omega)
    r_ee = (tangent_eta(i, eta + step, omega)
            - tangent_eta(i, eta - step, omega)) / (2.0 * step)
    r_eo = (tangent_eta(i, eta, omega + step)
            - tangent_eta(i, eta, omega - step)) / (2.0 * step)
    r_oo = (tangent_omega(i, eta, omega + step)
            - tangent_omega(i, eta, omega - step)) / (2.0 * step)
    L = float(-n @ r_ee)
    M = float(-n @ r_eo)
    N = float(-n @ r_oo)
    return (E, F, G), (L, M, N)


def principal_and_mean_curvature(forms) -> CurvatureInfo:
    """Principal curvatures (k1 >= k2) and mean curvature from the forms.

    k1, k2 are the eigenvalues of the shape operator I^{-1} II; k_omega and
    k_eta report the normal-section curvatures along the two coordinate
    directions (N/G and L/E).
    """
    (E, F, G), (L, M, N) = forms
    det1 = E * G - F * F
    if det1 <= 1e-14:
        raise DegenerateMetric("first fundamental form is singular")
    H = (E * N + G * L - 2.0 * F * M) / (2.0 * det1)
    K = (L * N - M * M) / det1
    disc = max(H * H - K, 0.0)
    root = math.sqrt(disc)
    return CurvatureInfo(
        k_omega=N / G,
        k_eta=L / E,
        k1=H + root,
        k2=H - root,
        mean_H=H,
        first_form=(E, F, G),
        second_form=(L, M, N),
    )


def normal_section_curvature(forms, d_eta: float, d_omega: float) -> float:
    """Normal curvature along the tangent direction d_eta * t_eta +
    d_omega * t_omega (Euler's theorem places it within [k2, k1])."""
    (E, F, G), (L, M, N) = forms
    num = L * d_eta ** 2 + 2.0 * M * d_eta * d_omega + N * d_omega ** 2
    den = E * d_eta ** 2 + 2.0 * F * d_eta * d_omega + G * d_omega ** 2
    if den <= 1e-300:
        raise DegenerateMetric("zero tangent direction")
    return num / den


def local_frame(i: Intrinsics, eta: float, omega: float) -> LocalFrame:
    """Point, unit tangents, and outward normal at (eta, omega)."""
    t_o, t_e = unit_tangents(i, eta, omega)
    return LocalFrame(
        point=surface_point(i, eta, omega),
        t_omega=t_o,
        t_eta=t_e,
        normal=normal(i, eta, omega),
    )
