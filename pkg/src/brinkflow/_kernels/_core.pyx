# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: staggered-grid residual and the distributive
Gauss-Seidel sweep.

Array conventions (row index j = y, column index i = x, cell size h,
box corner a):

* ``u1`` has shape (N, N-1); ``u1[j, i]`` sits at ``(a+(i+1)h, a+(j+1/2)h)``.
* ``u2`` has shape (N-1, N); ``u2[j, i]`` sits at ``(a+(i+1/2)h, a+(j+1)h)``.
* ``p`` has shape (N, N); ``p[j, i]`` sits at ``(a+(i+1/2)h, a+(j+1/2)h)``.

Boundary data holds wall values of the velocity.  Components normal to a
wall are imposed directly at wall nodes; tangential components enter
through reflected ghosts, ``ghost = 2 g - interior``.
"""

import numpy as np

BACKEND_NAME = "compiled"


cdef inline double _u1_south(double[:, ::1] u1, double[::1] gb, Py_ssize_t j, Py_ssize_t i) nogil:
    if j > 0:
        return u1[j - 1, i]
    return 2.0 * gb[i] - u1[0, i]


cdef inline double _u1_north(double[:, ::1] u1, double[::1] gt, Py_ssize_t j, Py_ssize_t i, Py_ssize_t n) nogil:
    if j < n - 1:
        return u1[j + 1, i]
    return 2.0 * gt[i] - u1[n - 1, i]


def residual(double h, double c2,
             double[:, ::1] u1, double[:, ::1] u2, double[:, ::1] p,
             double[:, ::1] b1, double[:, ::1] b2, double[:, ::1] b3,
             double[::1] u1l, double[::1] u1r, double[::1] u1b, double[::1] u1t,
             double[::1] u2l, double[::1] u2r, double[::1] u2b, double[::1] u2t,
             double[:, ::1] r1, double[:, ::1] r2, double[:, ::1] r3):
    """r = b - L[v] with the wall closure folded in."""
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i, j
    cdef double ih = 1.0 / h
    cdef double ih2 = ih * ih
    cdef double uw, ue, us, un, lap

    with nogil:
        for j in range(n):
            for i in range(n - 1):
                uw = u1[j, i - 1] if i > 0 else u1l[j]
                ue = u1[j, i + 1] if i < n - 2 else u1r[j]
                us = _u1_south(u1, u1b, j, i)
                un = _u1_north(u1, u1t, j, i, n)
                lap = (uw + ue + us + un - 4.0 * u1[j, i]) * ih2
                r1[j, i] = b1[j, i] - (lap - c2 * u1[j, i] - (p[j, i + 1] - p[j, i]) * ih)
        for j in range(n - 1):
            for i in range(n):
                uw = u2[j, i - 1] if i > 0 else 2.0 * u2l[j] - u2[j, 0]
                ue = u2[j, i + 1] if i < n - 1 else 2.0 * u2r[j] - u2[j, n - 1]
                us = u2[j - 1, i] if j > 0 else u2b[i]
                un = u2[j + 1, i] if j < n - 2 else u2t[i]
                lap = (uw + ue + us + un - 4.0 * u2[j, i]) * ih2
                r2[j, i] = b2[j, i] - (lap - c2 * u2[j, i] - (p[j + 1, i] - p[j, i]) * ih)
        for j in range(n):
            for i in range(n):
                uw = u1[j, i - 1] if i > 0 else u1l[j]
                ue = u1[j, i] if i < n - 1 else u1r[j]
                us = u2[j - 1, i] if j > 0 else u2b[i]
                un = u2[j, i] if j < n - 1 else u2t[i]
                r3[j, i] = b3[j, i] - ((ue - uw) * ih + (un - us) * ih)


def dgs_sweep(double h, double c2,
              double[:, ::1] u1, double[:, ::1] u2, double[:, ::1] p,
              double[:, ::1] b1, double[:, ::1] b2, double[:, ::1] b3,
              double[::1] u1l, double[::1] u1r, double[::1] u1b, double[::1] u1t,
              double[::1] u2l, double[::1] u2r, double[::1] u2b, double[::1] u2t,
              double[:, ::1] w2):
    """One distributive Gauss-Seidel pass, in place.

    Momentum rows are relaxed by a forward sweep with the pressure frozen;
    the divergence residual is then relaxed through the transformed
    pressure block ``c2*I - Lap_c`` (cell Laplacian, Neumann closure) and
    distributed back as ``u -= grad w2``, ``p += c2*w2 - Lap_c w2``.
    Sweep order is lexicographic: j outer, i inner.
    """
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i, j
    cdef double ih = 1.0 / h
    cdef double ih2 = ih * ih
    cdef double uw, ue, us, un, lap, res, diag, nnb, acc

    with nogil:
        # momentum, x-component
        for j in range(n):
            for i in range(n - 1):
                uw = u1[j, i - 1] if i > 0 else u1l[j]
                ue = u1[j, i + 1] if i < n - 2 else u1r[j]
                us = _u1_south(u1, u1b, j, i)
                un = _u1_north(u1, u1t, j, i, n)
                lap = (uw + ue + us + un - 4.0 * u1[j, i]) * ih2
                res = b1[j, i] - (lap - c2 * u1[j, i] - (p[j, i + 1] - p[j, i]) * ih)
                diag = -4.0 * ih2 - c2
                if j == 0:
                    diag -= ih2
                if j == n - 1:
                    diag -= ih2
                u1[j, i] += res / diag
        # momentum, y-component
        for j in range(n - 1):
            for i in range(n):
                uw = u2[j, i - 1] if i > 0 else 2.0 * u2l[j] - u2[j, 0]
                ue = u2[j, i + 1] if i < n - 1 else 2.0 * u2r[j] - u2[j, n - 1]
                us = u2[j - 1, i] if j > 0 else u2b[i]
                un = u2[j + 1, i] if j < n - 2 else u2t[i]
                lap = (uw + ue + us + un - 4.0 * u2[j, i]) * ih2
                res = b2[j, i] - (lap - c2 * u2[j, i] - (p[j + 1, i] - p[j, i]) * ih)
                diag = -4.0 * ih2 - c2
                if i == 0:
                    diag -= ih2
                if i == n - 1:
                    diag -= ih2
                u2[j, i] += res / diag
        # transformed pressure block: the triangularized system carries the
        # kappa-free cell Laplacian (Neumann closure) in the (2,2) slot, so
        # the forward substitution runs on -Lap_c; c2 enters only through
        # the distribution below
        for j in range(n):
            for i in range(n):
                uw = u1[j, i - 1] if i > 0 else u1l[j]
                ue = u1[j, i] if i < n - 1 else u1r[j]
                us = u2[j - 1, i] if j > 0 else u2b[i]
                un = u2[j, i] if j < n - 1 else u2t[i]
                res = b3[j, i] - ((ue - uw) * ih + (un - us) * ih)
                nnb = 4.0
                if i == 0 or i == n - 1:
                    nnb -= 1.0
                if j == 0 or j == n - 1:
                    nnb -= 1.0
                acc = res
                if i > 0:
                    acc += w2[j, i - 1] * ih2
                if j > 0:
                    acc += w2[j - 1, i] * ih2
                w2[j, i] = acc / (nnb * ih2)
        # distribute: u -= grad w2, p += (c2*I - Lap_c) w2
        for j in range(n):
            for i in range(n - 1):
                u1[j, i] -= (w2[j, i + 1] - w2[j, i]) * ih
        for j in range(n - 1):
            for i in range(n):
                u2[j, i] -= (w2[j + 1, i] - w2[j, i]) * ih
        for j in range(n):
            for i in range(n):
                nnb = 0.0
                acc = 0.0
                if i > 0:
                    acc += w2[j, i - 1]
                    nnb += 1.0
                if i < n - 1:
                    acc += w2[j, i + 1]
                    nnb += 1.0
                if j > 0:
                    acc += w2[j - 1, i]
                    nnb += 1.0
                if j < n - 1:
                    acc += w2[j + 1, i]
                    nnb += 1.0
                p[j, i] += c2 * w2[j, i] - (acc - nnb * w2[j, i]) * ih2
