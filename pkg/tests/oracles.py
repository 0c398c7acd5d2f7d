"""Independent reference computations used by the tests.

Chord endpoints are recovered by root-finding on a concave "margin" function
that is nonnegative exactly on the body.  None of this shares code with the
closed forms under test.
"""

import numpy as np
from scipy.optimize import brentq, linprog

from hitrun import quantum as qc
from hitrun.bodies import Ball, Cube, PPTStates, QuantumStates, Simplex


def margin(body, x):
    """Concave function of the point, >= 0 inside the body and < 0 outside."""
    if isinstance(body, Ball):
        return body.radius - np.linalg.norm(x)
    if isinstance(body, Cube):
        return min(np.min(x), np.min(1.0 - x))
    if isinstance(body, Simplex):
        return np.min(1.0 / body.N + body.Q @ x)
    if isinstance(body, QuantumStates):
        rho = np.eye(body.N) / body.N + np.tensordot(x, qc.hs_basis(body.N), axes=1)
        lam = np.linalg.eigvalsh(rho)[0]
        if isinstance(body, PPTStates):
            lam = min(lam, np.linalg.eigvalsh(qc.partial_transpose(rho, body.K))[0])
        return lam
    raise TypeError(body)


def chord_oracle(body, x, e):
    """Chord endpoints by Brent's method; brackets from the outradius."""
    f = lambda t: margin(body, x + t * e)  # noqa: E731
    far = 2.0 * body.outradius * 1.01 + 1e-3
    hi = brentq(f, 0.0, far, xtol=1e-15, rtol=4 * np.finfo(float).eps) if f(0.0) > 0 else 0.0
    lo = -brentq(lambda s: f(-s), 0.0, far, xtol=1e-15, rtol=4 * np.finfo(float).eps) if f(0.0) > 0 else 0.0
    return lo, hi


def simplex_chord_lp(body, x, e):
    """Simplex chord as two one-variable linear programs in probability space."""
    rate = body.Q @ e
    A_ub = -rate[:, None]
    b_ub = 1.0 / body.N + body.Q @ x
    hi = linprog([-1.0], A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)], method="highs")
    lo = linprog([1.0], A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)], method="highs")
    return lo.x[0], hi.x[0]


def random_interior_point(body, rng):
    """A point strictly inside the body, with enough spread to reach near the boundary."""
    d = body.dim
    if isinstance(body, Ball):
        g = rng.standard_normal(d)
        return g / np.linalg.norm(g) * body.radius * rng.random() ** (1.0 / d) * 0.999999
    if isinstance(body, Cube):
        return rng.uniform(1e-9, 1 - 1e-9, d)
    if isinstance(body, Simplex):
        return body.from_probabilities(rng.dirichlet(np.ones(body.N)))
    if isinstance(body, PPTStates):
        # walk from I/N toward a random state until the PPT margin vanishes, then back off
        y = qc.matrix_to_coords(qc.wishart_state(qc.ginibre_sample(body.N, rng)))
        if margin(body, y) > 0:
            return y * rng.uniform(0.5, 0.999999)
        s = brentq(lambda a: margin(body, a * y), 0.0, 1.0, xtol=1e-15)
        return y * s * rng.uniform(0.5, 0.999999)
    if isinstance(body, QuantumStates):
        return qc.matrix_to_coords(qc.wishart_state(qc.ginibre_sample(body.N, rng)))
    raise TypeError(body)


def random_unit(d, rng):
    g = rng.standard_normal(d)
    return g / np.linalg.norm(g)


def check_chord(body, x, e, rel=1e-8):
    """Compare a closed-form chord with the oracle and test membership at the endpoints.

    Returns a list of failure descriptions (empty when all checks pass).
    """
    R = body.outradius
    c = body.chord(x, e)
    lo, hi = chord_oracle(body, x, e)
    eps = 1e-6 * R
    bad = []
    for name, got, want in (("t_min", c.t_min, lo), ("t_max", c.t_max, hi)):
        if abs(got - want) > rel * max(abs(want), R):
            bad.append(f"{name}: closed form {got!r} vs oracle {want!r}")
    if not c.t_min <= 0.0 <= c.t_max:
        bad.append("chord does not contain 0")
    if c.length > 2 * R * (1 + 1e-12):
        bad.append(f"chord length {c.length} exceeds 2R")
    mid = x + 0.5 * (c.t_min + c.t_max) * e
    if not body.contains(mid):
        bad.append("midpoint outside")
    for t, inside in ((c.t_max - eps, True), (c.t_min + eps, True), (c.t_max + eps, False), (c.t_min - eps, False)):
        # outside checks use zero tolerance so the numerical slack of contains() does not hide a short chord
        ok = body.contains(x + t * e) if inside else not body.contains(x + t * e, tol=0.0)
        if not ok:
            bad.append(f"membership wrong at t={t!r} (expected inside={inside})")
    return bad
