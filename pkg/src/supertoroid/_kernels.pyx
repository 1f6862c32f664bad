# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-point kernels (meridian residuals, implicit values).

Semantics mirror supertoroid._kernels_np exactly; see that module for the
derivation and the degenerate-point conventions.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, hypot, pow

cnp.import_array()

BACKEND_NAME = "cython"


def meridian_residuals(xyz, double a1, double a2, double a3, double a4,
                       double e1, double e2, double axis_tol):
    """Signed meridian residuals for an (N, 3) canonical point array.

    Returns (residuals (N,), degenerate mask (N,) uint8).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = \
        np.ascontiguousarray(xyz, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] res = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] deg = np.zeros(n, dtype=np.uint8)

    cdef double inv_e2_2 = 2.0 / e2
    cdef double inv_e1_2 = 2.0 / e1
    cdef double x, y, z, rho, w, ring, halfwidth, f, xr, p_r, beta1, m
    cdef Py_ssize_t k

    with nogil:
        for k in range(n):
            x = pts[k, 0]
            y = pts[k, 1]
            z = pts[k, 2]
            rho = hypot(x, y)
            if rho <= axis_tol:
                ring = a1 * a4
                halfwidth = a1
                f = pow(fabs(0.0 - a4), inv_e1_2) + pow(fabs(z / a3), inv_e1_2)
                deg[k] = 1
            else:
                w = pow(pow(fabs(x / a1), inv_e2_2)
                        + pow(fabs(y / a2), inv_e2_2), e2 / 2.0)
                ring = a4 * rho / w
                halfwidth = rho / w
                f = pow(fabs(w - a4), inv_e1_2) + pow(fabs(z / a3), inv_e1_2)
            xr = rho - ring
            p_r = hypot(xr, z)
            if p_r <= axis_tol:
                m = halfwidth if halfwidth < a3 else a3
                res[k] = -m
                deg[k] = 1
            else:
                beta1 = pow(f, -e1 / 2.0)
                res[k] = (1.0 - beta1) * p_r
    return res, deg


def implicit_values(xyz, double a1, double a2, double a3, double a4,
                    double e1, double e2):
    """Inside-outside values F for an (N, 3) canonical point array."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = \
        np.ascontiguousarray(xyz, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)

    cdef double inv_e2_2 = 2.0 / e2
    cdef double inv_e1_2 = 2.0 / e1
    cdef double x, y, z, w
    cdef Py_ssize_t k

    with nogil:
        for k in range(n):
            x = pts[k, 0]
            y = pts[k, 1]
            z = pts[k, 2]
            w = pow(pow(fabs(x / a1), inv_e2_2)
                    + pow(fabs(y / a2), inv_e2_2), e2 / 2.0)
            out[k] = pow(fabs(w - a4), inv_e1_2) + pow(fabs(z / a3), inv_e1_2)
    return out
