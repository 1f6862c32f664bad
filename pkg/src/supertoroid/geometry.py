"""Canonical-frame supertoroid geometry.

A supertoroid is described by six intrinsic parameters: three half-axes
a1, a2, a3 (meters), the hole ratio a4 (the tube centerline sits at radius
a4 * sqrt(a1^2 cos^{2e2} w + a2^2 sin^{2e2} w) in the x-y plane), and two
shape exponents eps1 (cross-section) and eps2 (equatorial outline).  The
hole axis is canonical z.

Parametric surface (signed fractional powers throughout)::

    x = a1 (a4 + cos^{e1} eta) cos^{e2} omega
    y = a2 (a4 + cos^{e1} eta) sin^{e2} omega
    z = a3 sin^{e1} eta

Implicit inside-outside value::

    F(p) = | (|x/a1|^{2/e2} + |y/a2|^{2/e2})^{e2/2} - a4 |^{2/e1}
           + |z/a3|^{2/e1}

F < 1 inside, F = 1 on the surface, F > 1 outside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateMeanSuperellipse

# Default exponent box.  Values much below 0.1 make the implicit value
# numerically violent; above 2.5 the surface develops cusps.
EPS_MIN = 0.1
EPS_MAX = 2.5

_QUAT_NORM_TOL = 1e-9


def signed_pow(x, e):
    """sign(x) * |x|^e, elementwise.  Odd in x; signed_pow(0, e) = 0."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** e


def wrap_angle(theta):
    """Wrap angles into the principal range (-pi, pi]."""
    theta = np.asarray(theta, dtype=float)
    wrapped = np.remainder(theta + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class Intrinsics:
    """The six shape parameters of a supertoroid."""

    a1: float  # half-axis along canonical x (m)
    a2: float  # half-axis along canonical y (m)
    a3: float  # half-axis along the hole axis z (m)
    a4: float  # centerline radius ratio; > 1 opens a hole
    eps1: float  # cross-section exponent
    eps2: float  # equatorial exponent

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0 and self.a3 > 0):
            raise ValueError("half-axes a1, a2, a3 must be strictly positive")
        if self.a4 < 0:
            raise ValueError("a4 must be non-negative")
        for name in ("eps1", "eps2"):
            e = getattr(self, name)
            if not (EPS_MIN <= e <= EPS_MAX):
                raise ValueError(
                    f"{name}={e} outside [{EPS_MIN}, {EPS_MAX}]"
                )

    @property
    def has_hole(self) -> bool:
        return self.a4 > 1.0

    @property
    def is_apple_shaped(self) -> bool:
        """0 < a4 < 1: the surface self-intersects into an apple shape."""
        return 0.0 < self.a4 < 1.0

    def as_array(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.a3, self.a4,
                         self.eps1, self.eps2])


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid placement: world = R(quaternion) @ canonical + translation.

    The quaternion is scalar-first (q0, q1, q2, q3) and is renormalized on
    construction; construction fails if the norm is not within 1e-9 of one
    unless ``renormalize`` (the default) is in effect.
    """

    translation: np.ndarray
    quaternion: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=float).reshape(3).copy()
        q = np.asarray(self.quaternion, dtype=float).reshape(4).copy()
        n = np.linalg.norm(q)
        if n < 1e-12:
            raise ValueError("quaternion norm is zero")
        q /= n
        t.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "quaternion", q)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.zeros(3), np.array([1.0, 0.0, 0.0, 0.0]))

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.quaternion)

    def to_world(self, points) -> np.ndarray:
        """Map canonical-frame point(s) into the world frame."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation_matrix().T + self.translation

    def to_canonical(self, points) -> np.ndarray:
        """Map world-frame point(s) into the canonical frame."""
        p = np.asarray(points, dtype=float)
        return (p - self.translation) @ self.rotation_matrix()


@dataclass(frozen=True, eq=False)
class SupertoroidModel:
    """Intrinsics plus pose: the 12-degree-of-freedom object hypothesis."""

    intrinsics: Intrinsics
    pose: Pose

    def as_array(self) -> np.ndarray:
        """Pack as [t(3), q(4), a1, a2, a3, a4, eps1, eps2]."""
        return np.concatenate([
            self.pose.translation,
            self.pose.quaternion,
            self.intrinsics.as_array(),
        ])

    @staticmethod
    def from_array(v) -> "SupertoroidModel":
        v = np.asarray(v, dtype=float).reshape(13)
        return SupertoroidModel(
            intrinsics=Intrinsics(*v[7:13]),
            pose=Pose(v[0:3], v[3:7]),
        )


@dataclass(frozen=True)
class SurfaceParams:
    """A parameter pair (eta, omega), wrapped into (-pi, pi]."""

    eta: float
    omega: float

    def __post_init__(self):
        object.__setattr__(self, "eta", wrap_angle(self.eta))
        object.__setattr__(self, "omega", wrap_angle(self.omega))


class Region(Enum):
    INSIDE = "inside"
    ON_SURFACE = "on_surface"
    OUTSIDE = "outside"


def quat_to_matrix(q) -> np.ndarray:
    """Rotation matrix of a scalar-first quaternion (normalized first)."""
    q = np.asarray(q, dtype=float).reshape(4)
    q = q / np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_multiply(q, p) -> np.ndarray:
    """Hamilton product q * p (both scalar-first)."""
    qw, qx, qy, qz = np.asarray(q, dtype=float).reshape(4)
    pw, px, py, pz = np.asarray(p, dtype=float).reshape(4)
    return np.array([
        qw * pw - qx * px - qy * py - qz * pz,
        qw * px + qx * pw + qy * pz - qz * py,
        qw * py - qx * pz + qy * pw + qz * px,
        qw * pz + qx * py - qy * px + qz * pw,
    ])


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float).reshape(3)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle
    return np.concatenate([[math.cos(half)], math.sin(half) * axis])


def quat_rotation_z_to(axis) -> np.ndarray:
    """Minimal rotation carrying canonical z onto the given direction."""
    axis = np.asarray(axis, dtype=float).reshape(3)
    axis = axis / np.linalg.norm(axis)
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z, axis))
    cross = np.cross(z, axis)
    s = float(np.linalg.norm(cross))
    if s < 1e-12:
        if c > 0:
            return np.array([1.0, 0.0, 0.0, 0.0])
        # antiparallel: 180 degrees about x
        return np.array([0.0, 1.0, 0.0, 0.0])
    return quat_from_axis_angle(cross / s, math.atan2(s, c))


def rotation_angle_between(q1, q2) -> float:
    """Geodesic angle (rad) between two rotations given as quaternions."""
    d = abs(float(np.dot(np.asarray(q1, float).reshape(4),
                         np.asarray(q2, float).reshape(4))))
    return 2.0 * math.acos(min(1.0, d))


def surface_point(i: Intrinsics, eta, omega) -> np.ndarray:
    """Canonical-frame surface point(s) at parameter angles (eta, omega).

    Broadcasts over array inputs; the last output axis holds (x, y, z).
    """
    eta = np.asarray(eta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    g = i.a4 + signed_pow(np.cos(eta), i.eps1)
    x = i.a1 * g * signed_pow(np.cos(omega), i.eps2)
    y = i.a2 * g * signed_pow(np.sin(omega), i.eps2)
    z = i.a3 * signed_pow(np.sin(eta), i.eps1) * np.ones_like(omega)
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def implicit_value(i: Intrinsics, p) -> np.ndarray | float:
    """Inside-outside value F at canonical point(s) p (<1 in, =1 on, >1 out)."""
    p = np.asarray(p, dtype=float)
    x, y, z = np.moveaxis(p, -1, 0)
    w = (np.abs(x / i.a1) ** (2.0 / i.eps2)
         + np.abs(y / i.a2) ** (2.0 / i.eps2)) ** (i.eps2 / 2.0)
    f = np.abs(w - i.a4) ** (2.0 / i.eps1) + np.abs(z / i.a3) ** (2.0 / i.eps1)
    if f.ndim == 0:
        return float(f)
    return f


def classify(i: Intrinsics, p, tol: float = 1e-9) -> Region:
    """Classify a canonical point against the surface with tolerance tol."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    f = implicit_value(i, p)
    if abs(f - 1.0) <= tol:
        return Region.ON_SURFACE
    return Region.INSIDE if f < 1.0 else Region.OUTSIDE


def mean_superellipse_value(i: Intrinsics, q) -> float:
    """Inside-outside value of the mean superellipse at x-y point q.

    The mean superellipse is the planar curve of tube-section centers,
    with half-axes a1*a4 and a2*a4; undefined when a4 = 0.
    """
    if i.a4 <= 0.0:
        raise DegenerateMeanSuperellipse("mean superellipse requires a4 > 0")
    q = np.asarray(q, dtype=float)
    x, y = q[..., 0], q[..., 1]
    f = (np.abs(x / (i.a1 * i.a4)) ** (2.0 / i.eps2)
         + np.abs(y / (i.a2 * i.a4)) ** (2.0 / i.eps2))
    if f.ndim == 0:
        return float(f)
    return f


def mean_superellipse_point(i: Intrinsics, omega) -> np.ndarray:
    """Parametric mean-superellipse point (x, y) at parameter angle omega."""
    if i.a4 <= 0.0:
        raise DegenerateMeanSuperellipse("mean superellipse requires a4 > 0")
    omega = np.asarray(omega, dtype=float)
    x = i.a1 * i.a4 * signed_pow(np.cos(omega), i.eps2)
    y = i.a2 * i.a4 * signed_pow(np.sin(omega), i.eps2)
    return np.stack(np.broadcast_arrays(x, y), axis=-1)


def mean_superellipse_radius(i: Intrinsics, omega) -> np.ndarray | float:
    """Radius of the mean superellipse at parameter angle omega."""
    if i.a4 <= 0.0:
        raise DegenerateMeanSuperellipse("mean superellipse requires a4 > 0")
    omega = np.asarray(omega, dtype=float)
    r = i.a4 * np.sqrt(
        i.a1 ** 2 * np.abs(np.cos(omega)) ** (2.0 * i.eps2)
        + i.a2 ** 2 * np.abs(np.sin(omega)) ** (2.0 * i.eps2)
    )
    if r.ndim == 0:
        return float(r)
    return r


def cross_section_halfwidth(i: Intrinsics, omega_s) -> np.ndarray | float:
    """In-plane half-width of the tube cross-section at parameter omega_s."""
    omega_s = np.asarray(omega_s, dtype=float)
    a = np.sqrt(
        i.a1 ** 2 * np.abs(np.cos(omega_s)) ** (2.0 * i.eps2)
        + i.a2 ** 2 * np.abs(np.sin(omega_s)) ** (2.0 * i.eps2)
    )
    if a.ndim == 0:
        return float(a)
    return a


def section_angle_from_polar(i: Intrinsics, omega_pi) -> np.ndarray | float:
    """Parameter angle omega_s whose mean-superellipse point lies at polar
    angle omega_pi.

    Satisfies tan^{eps2}(omega_s) = (a1/a2) tan(omega_pi) with signed powers,
    stays in the quadrant of omega_pi, and fixes the quadrant boundaries
    {0, +-pi/2, pi}.
    """
    omega_pi = np.asarray(omega_pi, dtype=float)
    c, s = np.cos(omega_pi), np.sin(omega_pi)
    u = signed_pow(c / i.a1, 1.0 / i.eps2)
    v = signed_pow(s / i.a2, 1.0 / i.eps2)
    out = np.arctan2(v, u)
    if out.ndim == 0:
        return float(out)
    return out


def world_to_canonical(m: SupertoroidModel, p_world) -> np.ndarray:
    """Express world point(s) in the model's canonical frame."""
    return m.pose.to_canonical(p_world)


def canonical_to_world(m: SupertoroidModel, p_canonical) -> np.ndarray:
    """Express canonical point(s) in the world frame."""
    return m.pose.to_world(p_canonical)


def bounding_box(i: Intrinsics) -> np.ndarray:
    """Axis-aligned canonical bounds [[xmin, xmax], [ymin, ymax], [zmin, zmax]].

    The surface is bounded by the planes x = +-a1(1 + a4), y = +-a2(1 + a4),
    z = +-a3.
    """
    bx = i.a1 * (1.0 + i.a4)
    by = i.a2 * (1.0 + i.a4)
    return np.array([[-bx, bx], [-by, by], [-i.a3, i.a3]])
