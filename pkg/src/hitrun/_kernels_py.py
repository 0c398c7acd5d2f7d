"""Pure-Python twins of the compiled walks in ``_kernels.pyx``.

Same signatures and the same arithmetic, one step at a time; used when the
extension is not built or ``HITRUN_PURE_PYTHON=1`` is set.
"""

import math

import numpy as np


def ball_walk(x, gauss, u, radius):
    n, d = gauss.shape
    out = np.empty((n, d))
    r2 = radius * radius
    for k in range(n):
        g = gauss[k]
        e = g * (1.0 / math.sqrt(float(g @ g)))
        b = float(x @ e)
        disc = b * b - float(x @ x) + r2
        if disc < 0.0:
            return out[:k], k
        s = math.sqrt(disc)
        tmin = min(-b - s, 0.0)
        tmax = max(-b + s, 0.0)
        x += (tmin + u[k] * (tmax - tmin)) * e
        out[k] = x
    return out, -1


def box_walk(x, gauss, u, lo, hi):
    n, d = gauss.shape
    out = np.empty((n, d))
    for k in range(n):
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            return out[:k], k
        g = gauss[k]
        e = g * (1.0 / math.sqrt(float(g @ g)))
        with np.errstate(divide="ignore", invalid="ignore"):
            up = (hi - x) / e
            down = (lo - x) / e
        pos = e > 0
        neg = e < 0
        tmax = min(np.min(up[pos], initial=math.inf), np.min(down[neg], initial=math.inf))
        tmin = max(np.max(down[pos], initial=-math.inf), np.max(up[neg], initial=-math.inf))
        tmin = min(tmin, 0.0)
        tmax = max(tmax, 0.0)
        x += (tmin + u[k] * (tmax - tmin)) * e
        out[k] = x
    return out, -1


def polytope_walk(x, gauss, u, A, b):
    n, d = gauss.shape
    out = np.empty((n, d))
    for k in range(n):
        g = gauss[k]
        inv = 1.0 / math.sqrt(float(g @ g))
        slack = b - A @ x
        if np.any(slack < -1e-12):
            return out[:k], k
        slack = np.maximum(slack, 0.0)
        rate = (A @ g) * inv
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = slack / rate
        tmax = max(np.min(ratio[rate > 0], initial=math.inf), 0.0)
        tmin = min(np.max(ratio[rate < 0], initial=-math.inf), 0.0)
        x += (tmin + u[k] * (tmax - tmin)) * (g * inv)
        out[k] = x
    return out, -1
