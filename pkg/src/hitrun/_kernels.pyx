# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hit-and-run inner loops for the Euclidean bodies.

Each walk advances ``x`` in place through ``len(u)`` steps.  ``gauss`` holds
one unnormalized Gaussian direction per row and ``u`` the uniform variates
that pick the point on the chord.  The visited positions are returned as an
``(n, d)`` array together with the index of the first failing step, or -1.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


def ball_walk(double[::1] x, const double[:, ::1] gauss, const double[::1] u, double radius):
    cdef Py_ssize_t n = gauss.shape[0], d = x.shape[0], k, i
    cdef double norm2, inv, b, q, disc, s, tmin, tmax, t
    out = np.empty((n, d))
    cdef double[:, ::1] o = out
    for k in range(n):
        norm2 = 0.0
        for i in range(d):
            norm2 += gauss[k, i] * gauss[k, i]
        inv = 1.0 / sqrt(norm2)
        b = 0.0
        q = 0.0
        for i in range(d):
            b += x[i] * gauss[k, i] * inv
            q += x[i] * x[i]
        disc = b * b - q + radius * radius
        if disc < 0.0:
            return out[:k], k
        s = sqrt(disc)
        tmin = -b - s
        tmax = -b + s
        if tmin > 0.0:
            tmin = 0.0
        if tmax < 0.0:
            tmax = 0.0
        t = tmin + u[k] * (tmax - tmin)
        for i in range(d):
            x[i] += t * gauss[k, i] * inv
            o[k, i] = x[i]
    return out, -1


def box_walk(double[::1] x, const double[:, ::1] gauss, const double[::1] u, double lo, double hi):
    cdef Py_ssize_t n = gauss.shape[0], d = x.shape[0], k, i
    cdef double norm2, inv, e, tmin, tmax, a, c, t
    out = np.empty((n, d))
    cdef double[:, ::1] o = out
    for k in range(n):
        norm2 = 0.0
        for i in range(d):
            norm2 += gauss[k, i] * gauss[k, i]
        inv = 1.0 / sqrt(norm2)
        tmin = -INFINITY
        tmax = INFINITY
        for i in range(d):
            if x[i] < lo - 1e-12 or x[i] > hi + 1e-12:
                return out[:k], k
            e = gauss[k, i] * inv
            if e > 0.0:
                a = (hi - x[i]) / e
                c = (lo - x[i]) / e
            elif e < 0.0:
                a = (lo - x[i]) / e
                c = (hi - x[i]) / e
            else:
                continue
            if a < tmax:
                tmax = a
            if c > tmin:
                tmin = c
        if tmin > 0.0:
            tmin = 0.0
        if tmax < 0.0:
            tmax = 0.0
        t = tmin + u[k] * (tmax - tmin)
        for i in range(d):
            x[i] += t * gauss[k, i] * inv
            o[k, i] = x[i]
    return out, -1


def polytope_walk(double[::1] x, const double[:, ::1] gauss, const double[::1] u,
                  const double[:, ::1] A, const double[::1] b):
    """Walk in ``{x : A x <= b}``; the polytope must be bounded."""
    cdef Py_ssize_t n = gauss.shape[0], d = x.shape[0], m = A.shape[0], k, i, j
    cdef double norm2, inv, slack, rate, tmin, tmax, r, t
    out = np.empty((n, d))
    cdef double[:, ::1] o = out
    for k in range(n):
        norm2 = 0.0
        for i in range(d):
            norm2 += gauss[k, i] * gauss[k, i]
        inv = 1.0 / sqrt(norm2)
        tmin = -INFINITY
        tmax = INFINITY
        for j in range(m):
            slack = b[j]
            rate = 0.0
            for i in range(d):
                slack -= A[j, i] * x[i]
                rate += A[j, i] * gauss[k, i]
            rate *= inv
            if slack < -1e-12:
                return out[:k], k
            if slack < 0.0:
                slack = 0.0
            if rate > 0.0:
                r = slack / rate
                if r < tmax:
                    tmax = r
            elif rate < 0.0:
                r = slack / rate
                if r > tmin:
                    tmin = r
        if tmin > 0.0:
            tmin = 0.0
        if tmax < 0.0:
            tmax = 0.0
        t = tmin + u[k] * (tmax - tmin)
        for i in range(d):
            x[i] += t * gauss[k, i] * inv
            o[k, i] = x[i]
    return out, -1
