"""Pure-numpy fallback for the hot per-point kernels.

The compiled extension (``supertoroid._kernels``) implements the same
functions with identical semantics; whichever is available is selected by
``supertoroid._backend`` at import time.  Keep both in lockstep.

Per canonical point p = (x, y, z) the meridian construction reduces to::

    rho  = hypot(x, y)
    W    = (|x/a1|^{2/e2} + |y/a2|^{2/e2})^{e2/2}      (degree 1 in rho)
    ring = a4 * rho / W        distance to the tube centerline curve
    xr   = rho - ring          signed radial offset from the centerline
    F    = |W - a4|^{2/e1} + |z/a3|^{2/e1}             (implicit value at p)
    beta1 = F^{-e1/2}
    r    = (1 - beta1) * hypot(xr, z)   signed meridian residual

|r| is the meridian radial distance; r < 0 inside the surface.  Fallbacks:
points with rho <= axis_tol use the omega = 0 half-plane (ring toward +x);
points on the centerline (hypot(xr, z) <= axis_tol) get the smaller of the
cross-section half-widths, negated since the centerline is interior.
"""

import numpy as np

BACKEND_NAME = "python"


def meridian_residuals(xyz, a1, a2, a3, a4, e1, e2, axis_tol):
    """Signed meridian residuals for an (N, 3) canonical point array.

    Returns (residuals (N,), degenerate mask (N,) uint8).
    """
    xyz = np.ascontiguousarray(xyz, dtype=float)
    x, y, z = xyz[:, 0], xyz[:, 1], xyz[:, 2]
    rho = np.hypot(x, y)

    on_axis = rho <= axis_tol
    w = (np.abs(x / a1) ** (2.0 / e2)
         + np.abs(y / a2) ** (2.0 / e2)) ** (e2 / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ring = np.where(on_axis, a1 * a4, a4 * rho / w)
        halfwidth = np.where(on_axis, a1, rho / w)
    f = np.abs(np.where(on_axis, 0.0, w) - a4) ** (2.0 / e1) \
        + np.abs(z / a3) ** (2.0 / e1)

    xr = rho - ring
    p_r = np.hypot(xr, z)
    on_centerline = p_r <= axis_tol

    with np.errstate(divide="ignore", invalid="ignore"):
        beta1 = f ** (-e1 / 2.0)
        res = (1.0 - beta1) * p_r
    res = np.where(on_centerline, -np.minimum(halfwidth, a3), res)

    degenerate = (on_axis | on_centerline).astype(np.uint8)
    return res, degenerate


def implicit_values(xyz, a1, a2, a3, a4, e1, e2):
    """Inside-outside values F for an (N, 3) canonical point array."""
    xyz = np.ascontiguousarray(xyz, dtype=float)
    x, y, z = xyz[:, 0], xyz[:, 1], xyz[:, 2]
    w = (np.abs(x / a1) ** (2.0 / e2)
         + np.abs(y / a2) ** (2.0 / e2)) ** (e2 / 2.0)
    return np.abs(w - a4) ** (2.0 / e1) + np.abs(z / a3) ** (2.0 / e1)
