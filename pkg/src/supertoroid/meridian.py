"""Meridian radial distance between points and a supertoroid.

A canonical point p is projected onto the x-y plane (p_pi).  The ray from
the origin through p_pi crosses the mean superellipse at r_pi = beta2 * p_pi
(major ratio beta2).  The offset p_r = p - r_pi lives in the meridian
half-plane through p and the hole axis; scaling it by the minor ratio beta1
lands on the tube cross-section, giving the surface point

    p_s = beta2 * p_pi + beta1 * p_r = beta1 * p + beta2 * (1 - beta1) * p_pi

and the meridian radial distance

    d_s = |p - p_s| = |(1 - beta1) (p - beta2 * p_pi)|.

d_s measures along a fixed ray, so it can never undercut the true
(Euclidean) distance to the surface; ``brute_force_distance`` provides that
independent lower bound for validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import (DegenerateMeanSuperellipse, EmptyCloud, OnAxis,
                     OnMeanSuperellipse)
from .geometry import (Intrinsics, Pose, cross_section_halfwidth,
                       mean_superellipse_value, section_angle_from_polar,
                       signed_pow, surface_point)

AXIS_TOL_FACTOR = 1e-9


def default_axis_tol(i: Intrinsics) -> float:
    """Scale-aware threshold below which a projection counts as on-axis."""
    return AXIS_TOL_FACTOR * i.a1


@dataclass(frozen=True, eq=False)
class RadialDecomposition:
    """All intermediates of one meridian-distance evaluation."""

    p: np.ndarray        # query point, canonical frame
    p_pi: np.ndarray     # projection onto the x-y plane
    r_pi: np.ndarray     # mean-superellipse intersection along p_pi
    p_r: np.ndarray      # p - r_pi, in the meridian half-plane
    beta1: float         # minor ratio (nan when degenerate)
    beta2: float         # major ratio (nan when on-axis)
    p_s: np.ndarray      # foot point on the surface
    d_s: float           # meridian radial distance, >= 0
    signed: float        # signed residual, negative inside
    omega_pi: float      # polar angle of p_pi (nan when on-axis)
    omega_s: float       # cross-section parameter angle
    degenerate: bool     # on-axis or centerline fallback applied


def project_to_plane(p) -> np.ndarray:
    """Drop the z-component: (x, y, z) -> (x, y, 0)."""
    p = np.asarray(p, dtype=float)
    out = p.copy()
    out[..., 2] = 0.0
    return out


def polar_angle(p, axis_tol: float = 1e-12) -> float:
    """Polar angle of the x-y projection, in (-pi, pi].

    Raises OnAxis when the projection is shorter than axis_tol.
    """
    p = np.asarray(p, dtype=float)
    if np.hypot(p[0], p[1]) <= axis_tol:
        raise OnAxis("point projects onto the hole axis")
    return float(np.arctan2(p[1], p[0]))


def major_ratio(i: Intrinsics, p_pi, axis_tol: float | None = None) -> float:
    """Scale factor beta2 mapping p_pi onto the mean superellipse.

    beta2 = F_m(p_pi)^{-eps2/2}; the mean superellipse value is homogeneous
    of degree 2/eps2, so F_m(beta2 * p_pi) = 1.
    """
    if i.a4 <= 0.0:
        raise DegenerateMeanSuperellipse("major ratio requires a4 > 0")
    if axis_tol is None:
        axis_tol = default_axis_tol(i)
    p_pi = np.asarray(p_pi, dtype=float)
    if np.hypot(p_pi[0], p_pi[1]) <= axis_tol:
        raise OnAxis("major ratio undefined on the hole axis")
    f = mean_superellipse_value(i, p_pi[:2])
    return float(f ** (-i.eps2 / 2.0))


def cross_section_local_coords(i: Intrinsics, omega_s: float, p):
    """Local (x', z') coordinates of p in the cross-section frame at omega_s.

    x' is the radial offset from the tube centerline point (measured along
    the unit direction of the mean-superellipse point at omega_s), z' = z.
    """
    p = np.asarray(p, dtype=float)
    cw = signed_pow(np.cos(omega_s), i.eps2)
    sw = signed_pow(np.sin(omega_s), i.eps2)
    a_ws = cross_section_halfwidth(i, omega_s)
    xp = (i.a1 * cw * (p[0] - i.a1 * i.a4 * cw)
          + i.a2 * sw * (p[1] - i.a2 * i.a4 * sw)) / a_ws
    return float(xp), float(p[2])


def minor_ratio(i: Intrinsics, p, axis_tol: float | None = None) -> float:
    """Scale factor beta1 mapping p_r onto the cross-section superellipse.

    beta1 = F_c(p_r)^{-eps1/2} with the cross-section inside-outside value
    F_c(q) = |x'/a_ws|^{2/eps1} + |z'/a3|^{2/eps1}.  Points on the tube
    centerline (p_r ~ 0) raise OnMeanSuperellipse.
    """
    if axis_tol is None:
        axis_tol = default_axis_tol(i)
    p = np.asarray(p, dtype=float)
    omega_pi = polar_angle(p, axis_tol)
    omega_s = section_angle_from_polar(i, omega_pi)
    xp, zp = cross_section_local_coords(i, omega_s, p)
    if np.hypot(xp, zp) <= axis_tol:
        raise OnMeanSuperellipse("point lies on the tube centerline")
    a_ws = cross_section_halfwidth(i, omega_s)
    f = abs(xp / a_ws) ** (2.0 / i.eps1) + abs(zp / i.a3) ** (2.0 / i.eps1)
    return float(f ** (-i.eps1 / 2.0))


def meridian_distance(i: Intrinsics, p, axis_tol: float | None = None):
    """Meridian radial distance of a canonical point.

    Returns (d_s, RadialDecomposition).  Degenerate inputs (on the hole
    axis, or exactly on the tube centerline) are resolved by continuous
    fallbacks and flagged in the decomposition instead of raising.
    """
    if axis_tol is None:
        axis_tol = default_axis_tol(i)
    p = np.asarray(p, dtype=float).reshape(3)
    p_pi = project_to_plane(p)
    rho = float(np.hypot(p[0], p[1]))

    degenerate = False
    if rho <= axis_tol:
        # Evaluate in the omega = 0 half-plane: centerline point toward +x.
        degenerate = True
        omega_pi = float("nan")
        omega_s = 0.0
        beta2 = float("nan")
        r_pi = np.array([i.a1 * i.a4, 0.0, 0.0])
        a_ws = i.a1
        xp = rho - i.a1 * i.a4
    else:
        omega_pi = polar_angle(p, axis_tol)
        omega_s = section_angle_from_polar(i, omega_pi)
        if i.a4 > 0.0:
            beta2 = major_ratio(i, p_pi, axis_tol)
        else:
            beta2 = 0.0  # mean superellipse collapses to the origin
        r_pi = beta2 * p_pi
        a_ws = cross_section_halfwidth(i, omega_s)
        xp = rho - beta2 * rho

    p_r = p - r_pi
    zp = p[2]
    p_r_len = float(np.hypot(xp, zp))

    if p_r_len <= axis_tol:
        # Centerline fallback: nearest cross-section half-width.
        degenerate = True
        d_s = float(min(a_ws, i.a3))
        signed = -d_s
        beta1 = float("nan")
        if a_ws <= i.a3:
            u = np.array([i.a1 * signed_pow(np.cos(omega_s), i.eps2),
                          i.a2 * signed_pow(np.sin(omega_s), i.eps2),
                          0.0]) / a_ws
            p_s = r_pi + a_ws * u
        else:
            p_s = r_pi + np.array([0.0, 0.0, i.a3])
    else:
        f = abs(xp / a_ws) ** (2.0 / i.eps1) + abs(zp / i.a3) ** (2.0 / i.eps1)
        beta1 = float(f ** (-i.eps1 / 2.0))
        p_s = r_pi + beta1 * p_r
        signed = float((1.0 - beta1) * p_r_len)
        d_s = abs(signed)

    decomp = RadialDecomposition(
        p=p, p_pi=p_pi, r_pi=r_pi, p_r=p_r, beta1=beta1, beta2=beta2,
        p_s=p_s, d_s=d_s, signed=signed, omega_pi=omega_pi, omega_s=omega_s,
        degenerate=degenerate,
    )
    return d_s, decomp


def signed_residuals(i: Intrinsics, points, axis_tol: float | None = None):
    """Batch signed meridian residuals for (N, 3) canonical points.

    Returns (residuals, degenerate mask).  Negative residuals are interior
    points.  This is the fitting hot path; it dispatches to the compiled
    kernel when available.
    """
    if axis_tol is None:
        axis_tol = default_axis_tol(i)
    pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    return _backend.meridian_residuals(
        pts, i.a1, i.a2, i.a3, i.a4, i.eps1, i.eps2, axis_tol)


def cloud_cost(i: Intrinsics, pose: Pose, cloud) -> float:
    """Sum of squared meridian distances of a world-frame cloud."""
    points = np.asarray(getattr(cloud, "points", cloud), dtype=float)
    if points.size == 0:
        raise EmptyCloud("cost of an empty cloud is undefined")
    canonical = pose.to_canonical(points.reshape(-1, 3))
    res, _ = signed_residuals(i, canonical)
    return float(np.sum(res * res))


def _surface_sample_grid(i: Intrinsics, n: int):
    ang = -np.pi + (np.arange(n) + 0.5) * (2.0 * np.pi / n)
    return surface_point(i, ang[:, None], ang[None, :]).reshape(-1, 3), ang


def _pattern_search(i: Intrinsics, queries, eta0, omega0, span0,
                    iters: int, move_eta: bool = True,
                    move_omega: bool = True, span_floor: float = 1e-11):
    """Vectorized pattern search minimizing |query - surface(eta, omega)|.

    Steps to the best point of a local stencil; the per-query span halves
    whenever the center stays best, and converged queries drop out.
    Coordinates can be pinned to scan along a seam curve.  Returns
    (distances, eta, omega).
    """
    queries = np.asarray(queries, dtype=float).reshape(-1, 3)
    n = queries.shape[0]
    eta_c = np.array(eta0, dtype=float, copy=True).reshape(n)
    om_c = np.array(omega0, dtype=float, copy=True).reshape(n)

    offs = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    zero = np.array([0.0])
    de, do = np.meshgrid(offs if move_eta else zero,
                         offs if move_omega else zero, indexing="ij")
    de, do = de.ravel(), do.ravel()
    center = int(np.argwhere((de == 0) & (do == 0))[0][0])

    span = np.full(n, float(span0))
    active = np.arange(n)
    for _ in range(iters):
        etas = eta_c[active, None] + span[active, None] * de[None, :]
        omegas = om_c[active, None] + span[active, None] * do[None, :]
        q = surface_point(i, etas, omegas)
        d2 = np.sum((q - queries[active, None, :]) ** 2, axis=-1)
        j = np.argmin(d2, axis=1)
        sub = np.arange(active.size)
        eta_c[active] = etas[sub, j]
        om_c[active] = omegas[sub, j]
        span[active[j == center]] *= 0.5
        active = active[span[active] >= span_floor]
        if active.size == 0:
            break
    best = surface_point(i, eta_c, om_c)
    return np.linalg.norm(best - queries, axis=-1), eta_c, om_c


def brute_force_distances(i: Intrinsics, points, grid_n: int = 256,
                          refine_iters: int = 60) -> np.ndarray:
    """Euclidean distance to the surface by dense sampling plus local descent.

    Scans a grid_n x grid_n (eta, omega) grid for each query point and
    descends from the best cell (plus reflections of it across the nearest
    parameter seams, where the distance field can split into twin valleys).
    The seam curves themselves are scanned globally and descended with the
    seam coordinate pinned: the parametrization compresses positions near
    seams, hiding whole surface regions from the cell grid.  A final
    alternating line polish converges the best candidate.  Independent of
    the meridian construction; used as a lower-bound oracle.
    """
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    n_pts = pts.shape[0]

    grid, ang = _surface_sample_grid(i, grid_n)
    # float32 suffices for picking the starting cell; the pattern search
    # below runs in float64 and can hop a few cells if the pick is off.
    grid32_t = np.ascontiguousarray(grid.T, dtype=np.float32)
    grid_sq = np.sum(grid * grid, axis=1, dtype=np.float32) * np.float32(0.5)

    best_idx = np.empty(n_pts, dtype=np.intp)
    chunk = max(1, min(n_pts, 512, int(2**25 // max(1, grid.shape[0]))))
    buf = np.empty((chunk, grid.shape[0]), dtype=np.float32)
    for lo in range(0, n_pts, chunk):
        hi = min(n_pts, lo + chunk)
        block = np.ascontiguousarray(-pts[lo:hi], dtype=np.float32)
        out = buf[: hi - lo]
        # ordering of 0.5|s|^2 - s.p matches ||s - p||^2 per row
        np.dot(block, grid32_t, out=out)
        out += grid_sq[None, :]
        best_idx[lo:hi] = np.argmin(out, axis=1)

    eta_g = ang[best_idx // grid_n]
    om_g = ang[best_idx % grid_n]
    cell = 2.0 * np.pi / grid_n

    cand_d = {}
    cand_eta = {}
    cand_om = {}
    rows = np.arange(n_pts)

    def _consider(family, idx, d, eta, om):
        if family not in cand_d:
            cand_d[family] = np.full(n_pts, np.inf)
            cand_eta[family] = eta_g.copy()
            cand_om[family] = om_g.copy()
        better = d < cand_d[family][idx]
        upd = idx[better]
        cand_d[family][upd] = d[better]
        cand_eta[family][upd] = eta[better]
        cand_om[family][upd] = om[better]

    def _snap(x):
        return np.round(x / (np.pi / 2.0)) * (np.pi / 2.0)

    basin_iters = min(refine_iters, 34)
    eta_s = _snap(eta_g)
    om_s = _snap(om_g)

    # 2D descents: the best cell plus, near seams, its reflections across
    # them (the exponent kinks split the distance field into twin valleys
    # there and the best cell may sit in the shallower one).  Initial
    # spans stay below a cell so steps cannot hop across a seam ridge.
    _consider("free", rows, *_pattern_search(i, pts, eta_g, om_g, 0.5 * cell,
                                             basin_iters, span_floor=1e-6))
    gate = 16.0 * cell
    near_es = np.abs(eta_g - eta_s) < gate
    if np.any(near_es):
        _consider("free", rows[near_es],
                  *_pattern_search(i, pts[near_es],
                                   (2.0 * eta_s - eta_g)[near_es],
                                   om_g[near_es], 0.5 * cell, basin_iters,
                                   span_floor=1e-6))
    near_os = np.abs(om_g - om_s) < gate
    if np.any(near_os):
        _consider("free", rows[near_os],
                  *_pattern_search(i, pts[near_os], eta_g[near_os],
                                   (2.0 * om_s - om_g)[near_os], 0.5 * cell,
                                   basin_iters, span_floor=1e-6))
    near_both = near_es & near_os
    if np.any(near_both):
        _consider("free", rows[near_both],
                  *_pattern_search(i, pts[near_both],
                                   (2.0 * eta_s - eta_g)[near_both],
                                   (2.0 * om_s - om_g)[near_both],
                                   0.5 * cell, basin_iters, span_floor=1e-6))

    # Seam-curve candidates: scan each of the eight seam curves globally,
    # then descend along the best curve per family with the seam
    # coordinate pinned.  These live in a separate candidate family: the
    # basins hiding in the seam compression zone are reachable only from
    # the seam side, so they get their own polish below.
    seams = np.array([0.0, 0.5 * np.pi, np.pi, -0.5 * np.pi])
    for pin_eta in (True, False):
        if pin_eta:
            curves = surface_point(i, seams[:, None], ang[None, :])
        else:
            curves = surface_point(i, ang[:, None],
                                   seams[None, :]).transpose(1, 0, 2)
        # curves: (4, grid_n, 3); nearest sample per point across all four
        flat = curves.reshape(-1, 3)
        d2 = (np.sum(flat * flat, axis=1)[None, :]
              - 2.0 * pts @ flat.T)
        idx = np.argmin(d2, axis=1)
        seam_val = seams[idx // grid_n]
        free_val = ang[idx % grid_n]
        if pin_eta:
            _consider("seam", rows, *_pattern_search(i, pts, seam_val,
                                                     free_val, 0.5 * cell,
                                                     basin_iters,
                                                     move_eta=False,
                                                     span_floor=1e-6))
        else:
            _consider("seam", rows, *_pattern_search(i, pts, free_val,
                                                     seam_val, 0.5 * cell,
                                                     basin_iters,
                                                     move_omega=False,
                                                     span_floor=1e-6))

    # Seam-corner points (both coordinates pinned).
    corners = surface_point(i, seams[:, None], seams[None, :]).reshape(-1, 3)
    d_c = np.linalg.norm(pts[:, None, :] - corners[None, :, :], axis=-1)
    j_c = np.argmin(d_c, axis=1)
    _consider("seam", rows, d_c[rows, j_c], seams[j_c // 4], seams[j_c % 4])

    # Final polish per candidate family: alternate 1D line searches so
    # each coordinate gets its own span (the valley is extremely
    # anisotropic near seams).  Distance is stationary at the minimum, so
    # the remaining error is quadratic in the achieved resolution.
    out = np.full(n_pts, np.inf)
    for family in cand_d:
        d_p = cand_d[family]
        eta_p = cand_eta[family]
        om_p = cand_om[family]
        np.minimum(out, d_p, out=out)
        for span0, iters, floor in ((1e-3, 60, 1e-8), (1e-4, 45, 1e-14)):
            d_p, eta_p, om_p = _pattern_search(
                i, pts, eta_p, om_p, span0, iters, move_eta=False,
                span_floor=floor)
            d_p, eta_p, om_p = _pattern_search(
                i, pts, eta_p, om_p, span0, iters, move_omega=False,
                span_floor=floor)
        np.minimum(out, d_p, out=out)
    return out


def brute_force_distance(i: Intrinsics, p, grid_n: int = 256) -> float:
    """Scalar convenience wrapper around :func:`brute_force_distances`."""
    return float(brute_force_distances(i, np.asarray(p, float).reshape(1, 3),
                                       grid_n=grid_n)[0])
