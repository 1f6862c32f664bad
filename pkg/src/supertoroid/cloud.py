"""Synthetic supertoroid point clouds.

Surface sampling (even-angle or equal-chord adaptive), single-viewpoint
culling, Gaussian noise, and random downsampling.  All stochastic
operations are pure functions of their inputs and an explicit seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffgeo import surface_normals
from .errors import EmptyResult, MissingNormals
from .geometry import SupertoroidModel, signed_pow, surface_point


@dataclass(frozen=True, eq=False)
class PointCloud:
    """World-frame points with optional parallel unit normals.

    ``normals_stale`` marks normals that no longer match the positions
    (set after noise injection); they keep unit length.
    """

    points: np.ndarray
    normals: np.ndarray | None = None
    normals_stale: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "points", pts)
        if self.normals is not None:
            nrm = np.asarray(self.normals, dtype=float).reshape(-1, 3)
            if nrm.shape[0] != pts.shape[0]:
                raise ValueError("normals count must match points count")
            lengths = np.linalg.norm(nrm, axis=1)
            if pts.shape[0] and not np.allclose(lengths, 1.0, atol=1e-9):
                raise ValueError("normals must have unit length")
            object.__setattr__(self, "normals", nrm)

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class CameraView:
    """Single viewpoint: camera position and the point it looks at."""

    position: np.ndarray
    look_at: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(3)
        tgt = np.asarray(self.look_at, dtype=float).reshape(3)
        if np.allclose(pos, tgt):
            raise ValueError("camera position must differ from look_at")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "look_at", tgt)


def _cell_centered(n: int) -> np.ndarray:
    return -np.pi + (np.arange(n) + 0.5) * (2.0 * np.pi / n)


def _equal_chord_angles(half_x: float, half_y: float, expo: float,
                        n: int, fine: int = 8192) -> np.ndarray:
    """Angles whose curve points (half_x cos^e t, half_y sin^e t) are
    near-equidistant along the curve (equal-chord criterion)."""
    t = _cell_centered(fine)
    x = half_x * signed_pow(np.cos(t), expo)
    y = half_y * signed_pow(np.sin(t), expo)
    seg = np.hypot(np.diff(x, append=x[:1]), np.diff(y, append=y[:1]))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = (np.arange(n) + 0.5) * cum[-1] / n
    idx = np.searchsorted(cum, targets, side="right") - 1
    return t[np.clip(idx, 0, fine - 1)]


def sample_surface(m: SupertoroidModel, n_eta: int, n_omega: int,
                   mode: str = "uniform_angle") -> PointCloud:
    """Sample n_eta * n_omega surface points with analytic normals.

    ``uniform_angle`` spaces both parameters evenly; ``arclength_adaptive``
    spaces them so consecutive points along each coordinate curve are
    near-equidistant, which avoids pile-up at the seams for small
    exponents.
    """
    if n_eta < 8 or n_omega < 8:
        raise ValueError("n_eta and n_omega must be at least 8")
    i = m.intrinsics
    if mode == "uniform_angle":
        etas = _cell_centered(n_eta)
        omegas = _cell_centered(n_omega)
    elif mode == "arclength_adaptive":
        a_bar = np.sqrt(0.5 * (i.a1 ** 2 + i.a2 ** 2))
        etas = _equal_chord_angles(a_bar, i.a3, i.eps1, n_eta)
        omegas = _equal_chord_angles(i.a1, i.a2, i.eps2, n_omega)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")

    eta_g = etas[:, None]
    om_g = omegas[None, :]
    pts = surface_point(i, eta_g, om_g).reshape(-1, 3)
    nrm = surface_normals(i, eta_g, om_g).reshape(-1, 3)

    rot = m.pose.rotation_matrix()
    return PointCloud(
        points=pts @ rot.T + m.pose.translation,
        normals=nrm @ rot.T,
    )


def partial_view(cloud: PointCloud, cam: CameraView) -> PointCloud:
    """Back-face culling: keep points whose normal faces the camera."""
    if cloud.normals is None:
        raise MissingNormals("partial_view requires per-point normals")
    view = cam.position[None, :] - cloud.points
    keep = np.sum(cloud.normals * view, axis=1) > 0.0
    if not np.any(keep):
        raise EmptyResult("camera placement culled every point")
    return PointCloud(points=cloud.points[keep],
                      normals=cloud.normals[keep],
                      normals_stale=cloud.normals_stale)


def add_noise(cloud: PointCloud, sigma: float, seed: int) -> PointCloud:
    """Add zero-mean isotropic Gaussian noise (std sigma per coordinate).

    Deterministic for a fixed seed.  Normals are carried over unchanged
    and flagged stale when sigma > 0.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=cloud.points.shape) if sigma > 0 \
        else np.zeros_like(cloud.points)
    return PointCloud(points=cloud.points + noise,
                      normals=cloud.normals,
                      normals_stale=cloud.normals_stale or sigma > 0)


def downsample_random(cloud: PointCloud, n: int, seed: int) -> PointCloud:
    """Uniform random subset of size n, without replacement.

    Returns the cloud unchanged when n >= len(cloud); original point order
    is preserved.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    count = len(cloud)
    if n >= count:
        return cloud
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(count, size=n, replace=False))
    return PointCloud(
        points=cloud.points[idx],
        normals=None if cloud.normals is None else cloud.normals[idx],
        normals_stale=cloud.normals_stale,
    )
