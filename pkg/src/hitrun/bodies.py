"""Convex bodies with exact chord oracles.

Every body lives in ``R^d`` and exposes the same small contract: ``dim``,
``center``, ``inradius``/``outradius`` (balls around ``center`` inside and
around the body), ``contains`` and ``chord``.  A chord through an interior
point ``x`` along a unit vector ``e`` is the interval ``[t_min, t_max]`` with
``x + t e`` inside the body exactly for ``t`` in the interval.

The two quantum bodies use Hilbert-Schmidt coordinates (see
:mod:`hitrun.quantum`); their chord computations are also available directly
on matrices through :func:`psd_chord` and :func:`ppt_chord`.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import quantum as qc
from .errors import ShapeError, ValidationError

#: below this minimum eigenvalue the inverse square root is not trusted
SINGULAR_TOL = 1e-9


class Chord(NamedTuple):
    t_min: float
    t_max: float

    @property
    def length(self) -> float:
        return self.t_max - self.t_min

    def contains(self, t: float) -> bool:
        return self.t_min <= t <= self.t_max


class ConvexBody:
    """Base class; subclasses fill in the geometry."""

    kind: str = ""
    dim: int
    inradius: float
    outradius: float

    @property
    def center(self) -> np.ndarray:
        return np.zeros(self.dim)

    @property
    def kappa(self) -> float:
        return self.inradius / self.outradius

    def radii(self) -> tuple[float, float, float]:
        return self.inradius, self.outradius, self.kappa

    def descriptor(self) -> dict:
        raise NotImplementedError

    def _point(self, point) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        if p.shape != (self.dim,):
            raise ShapeError(f"{self.kind} body has dimension {self.dim}, got point of shape {p.shape}")
        return p

    def _direction(self, direction) -> np.ndarray:
        e = self._point(direction)
        if abs(np.linalg.norm(e) - 1.0) > 1e-12:
            raise ValidationError("direction must be a unit vector")
        return e

    def contains(self, point, tol: float = 1e-12) -> bool:
        raise NotImplementedError

    def chord(self, point, direction) -> Chord:
        raise NotImplementedError

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in self.descriptor().items() if k != "kind")
        return f"{type(self).__name__}({args})"

    def __eq__(self, other):
        return isinstance(other, ConvexBody) and self.descriptor() == other.descriptor()

    def __hash__(self):
        return hash(tuple(sorted(self.descriptor().items())))


class Ball(ConvexBody):
    """Euclidean ball of radius ``radius`` centred at the origin."""

    kind = "ball"

    def __init__(self, dim: int, radius: float = 1.0):
        if dim < 1:
            raise ValidationError("dimension must be >= 1")
        if radius <= 0:
            raise ValidationError("radius must be positive")
        self.dim = int(dim)
        self.radius = float(radius)
        self.inradius = self.outradius = self.radius

    def descriptor(self):
        d = {"kind": self.kind, "d": self.dim}
        if self.radius != 1.0:
            d["radius"] = self.radius
        return d

    def contains(self, point, tol=1e-12):
        return bool(np.linalg.norm(self._point(point)) <= self.radius + tol)

    def chord(self, point, direction):
        x = self._point(point)
        e = self._direction(direction)
        xx = float(x @ x)
        if xx > (self.radius + 1e-12) ** 2:
            raise ValidationError("point lies outside the ball")
        b = float(x @ e)
        disc = max(b * b - xx + self.radius**2, 0.0)
        s = math.sqrt(disc)
        return Chord(min(-b - s, 0.0), max(-b + s, 0.0))


def _polytope_chord(slack: np.ndarray, rate: np.ndarray) -> Chord:
    # constraints slack_i - t * rate_i >= 0
    if np.any(slack < -1e-12):
        raise ValidationError("point lies outside the polytope")
    slack = np.maximum(slack, 0.0)
    with np.errstate(divide="ignore"):
        ratio = slack / rate
    pos = rate > 0
    neg = rate < 0
    t_max = float(np.min(ratio[pos])) if pos.any() else math.inf
    t_min = float(np.max(ratio[neg])) if neg.any() else -math.inf
    return Chord(t_min, t_max)


class Cube(ConvexBody):
    """Unit cube ``[0, 1]^d``."""

    kind = "cube"

    def __init__(self, dim: int):
        if dim < 1:
            raise ValidationError("dimension must be >= 1")
        self.dim = int(dim)
        self.inradius = 0.5
        self.outradius = 0.5 * math.sqrt(self.dim)

    @property
    def center(self):
        return np.full(self.dim, 0.5)

    def descriptor(self):
        return {"kind": self.kind, "d": self.dim}

    def contains(self, point, tol=1e-12):
        p = self._point(point)
        return bool(np.all(p >= -tol) and np.all(p <= 1.0 + tol))

    def chord(self, point, direction):
        x = self._point(point)
        e = self._direction(direction)
        return _polytope_chord(np.concatenate([1.0 - x, x]), np.concatenate([e, -e]))


def simplex_basis(N: int) -> np.ndarray:
    """Orthonormal ``N x (N-1)`` basis of the hyperplane ``sum(p) = 0``.

    Column ``l-1`` is ``(1, ..., 1, -l, 0, ..., 0) / sqrt(l (l + 1))`` with ``l``
    leading ones, i.e. the diagonal Gell-Mann directions.  Simplex coordinates
    therefore coincide with the diagonal block of the quantum coordinates of
    ``diag(p)``.
    """
    Q = np.zeros((N, N - 1))
    for l in range(1, N):
        Q[:l, l - 1] = 1.0
        Q[l, l - 1] = -l
        Q[:, l - 1] /= math.sqrt(l * (l + 1.0))
    return Q


class Simplex(ConvexBody):
    """Probability simplex of ``N``-point distributions, ``d = N - 1``.

    A point ``y`` in ``R^(N-1)`` represents ``p = 1/N + Q y`` with ``Q`` from
    :func:`simplex_basis`; the centroid sits at the origin.
    """

    kind = "simplex"

    def __init__(self, N: int):
        if N < 2:
            raise ValidationError("simplex needs N >= 2")
        self.N = int(N)
        self.dim = self.N - 1
        self.Q = simplex_basis(self.N)
        self.outradius = math.sqrt((N - 1) / N)
        self.inradius = 1.0 / math.sqrt(N * (N - 1))

    def descriptor(self):
        return {"kind": self.kind, "N": self.N}

    def to_probabilities(self, point) -> np.ndarray:
        return 1.0 / self.N + self.Q @ self._point(point)

    def from_probabilities(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.N,) or abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError("expected a length-N vector summing to one")
        return self.Q.T @ p

    def vertex(self, i: int) -> np.ndarray:
        return self.from_probabilities(np.eye(self.N)[i])

    def contains(self, point, tol=1e-12):
        return bool(np.all(self.to_probabilities(point) >= -tol))

    def chord(self, point, direction):
        x = self._point(point)
        e = self._direction(direction)
        return _polytope_chord(1.0 / self.N + self.Q @ x, -(self.Q @ e))

    @property
    def polytope(self) -> tuple[np.ndarray, np.ndarray]:
        """``(A, b)`` with the body equal to ``{y : A y <= b}``."""
        return -self.Q, np.full(self.N, 1.0 / self.N)


def _bisect_edge(feasible, lo: float, hi: float, tol: float = 1e-13) -> float:
    """Largest ``t`` in ``[lo, hi]`` with ``feasible(t)``, given ``feasible(lo)``."""
    while feasible(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise ValidationError("chord is unbounded")
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _psd_chord_bisection(rho: np.ndarray, H: np.ndarray) -> Chord:
    def ok(sign):
        return lambda t: np.linalg.eigvalsh(rho + sign * t * H)[0] >= 0.0

    return Chord(-_bisect_edge(ok(-1.0), 0.0, 2.0), _bisect_edge(ok(1.0), 0.0, 2.0))


def _pencil_chord(mu: np.ndarray):
    with np.errstate(divide="ignore"):
        t_max = np.where(mu[:, 0] < 0, -1.0 / mu[:, 0], np.inf)
        t_min = np.where(mu[:, -1] > 0, -1.0 / mu[:, -1], -np.inf)
    return t_min, t_max


def _psd_chord_eig(rho: np.ndarray, H: np.ndarray, tol: float):
    lam, V = np.linalg.eigh(rho)
    if np.any(lam[:, 0] < -tol):
        raise ValidationError("matrix is not positive semidefinite")
    w = 1.0 / np.sqrt(np.maximum(lam, SINGULAR_TOL))
    M = (qc.dagger(V) @ H @ V) * w[:, :, None] * w[:, None, :]
    t_min, t_max = _pencil_chord(np.linalg.eigvalsh(M))
    for i in np.flatnonzero(lam[:, 0] < SINGULAR_TOL):
        t_min[i], t_max[i] = _psd_chord_bisection(rho[i], H[i])
    return t_min, t_max


def psd_chord_batch(rho: np.ndarray, H: np.ndarray, tol: float = qc.PSD_TOL):
    """Vectorized :func:`psd_chord` over stacks ``(C, N, N)``; returns ``(t_min, t_max)``.

    The pencil is reduced with a Cholesky factor ``rho = L L^dagger``:
    ``L^-1 H L^-dagger`` has the same spectrum as ``rho^(-1/2) H rho^(-1/2)``
    and is cheaper to form.  Matrices whose smallest eigenvalue may be below
    ``SINGULAR_TOL`` (the bound ``lam_min >= 1/||L^-1||_F^2`` is inconclusive),
    or that are not positive definite at all, go through the eigendecomposition
    path, which bisects when ``lam_min`` really is that small.
    """
    try:
        L = np.linalg.cholesky(rho)
    except np.linalg.LinAlgError:
        t_min, t_max = _psd_chord_eig(rho, H, tol)
    else:
        Li = np.linalg.inv(L)
        t_min, t_max = _pencil_chord(np.linalg.eigvalsh(Li @ H @ qc.dagger(Li)))
        risky = np.flatnonzero(1.0 / np.sum(np.abs(Li) ** 2, axis=(-2, -1)) < SINGULAR_TOL)
        if len(risky):
            t_min[risky], t_max[risky] = _psd_chord_eig(rho[risky], H[risky], tol)
    return np.minimum(t_min, 0.0), np.maximum(t_max, 0.0)


def psd_chord(rho, H) -> Chord:
    """Largest interval ``[t_min, t_max]`` with ``rho + t H`` positive semidefinite.

    With ``M = rho^(-1/2) H rho^(-1/2)`` and eigenvalues ``mu``,
    ``t_max = -1/min(mu)`` and ``t_min = -1/max(mu)``.  Near-singular ``rho``
    falls back to bisection on the minimum eigenvalue; an endpoint that is
    numerically on the boundary comes out as 0.
    """
    rho = np.asarray(rho, dtype=complex)
    H = np.asarray(H, dtype=complex)
    if rho.shape != H.shape or rho.ndim != 2:
        raise ShapeError("rho and H must be square matrices of the same size")
    t_min, t_max = psd_chord_batch(rho[None], H[None])
    return Chord(float(t_min[0]), float(t_max[0]))


def ppt_chord(rho, H, shape: qc.BipartiteShape | int | None = None) -> Chord:
    """Chord in the PPT set: intersection of the chords of ``rho`` and of its partial transpose."""
    rho = np.asarray(rho, dtype=complex)
    H = np.asarray(H, dtype=complex)
    if rho.shape != H.shape or rho.ndim != 2:
        raise ShapeError("rho and H must be square matrices of the same size")
    a = psd_chord(rho, H)
    b = psd_chord(qc.partial_transpose(rho, shape), qc.partial_transpose(H, shape))
    return Chord(max(a.t_min, b.t_min), min(a.t_max, b.t_max))


class QuantumStates(ConvexBody):
    """The set of ``N x N`` density matrices in Hilbert-Schmidt coordinates, ``d = N^2 - 1``."""

    kind = "quantum"

    def __init__(self, N: int):
        if N < 2:
            raise ValidationError("need N >= 2")
        self.N = int(N)
        self.dim = self.N * self.N - 1
        self.outradius = math.sqrt((N - 1) / N)
        self.inradius = 1.0 / math.sqrt(N * (N - 1))

    def descriptor(self):
        return {"kind": self.kind, "N": self.N}

    def to_matrix(self, point) -> np.ndarray:
        return qc.coords_to_matrix(self._point(point), self.N)

    def contains(self, point, tol=qc.PSD_TOL):
        return bool(np.linalg.eigvalsh(self.to_matrix(point))[0] >= -tol)

    def chord(self, point, direction):
        e = self._direction(direction)
        return psd_chord(self.to_matrix(point), qc.coords_to_traceless(e, self.N))


class PPTStates(QuantumStates):
    """States of a ``K x K`` system with positive partial transpose, ``N = K^2``.

    The outradius is inherited from the full state space; it is a valid but
    possibly loose enclosing radius.
    """

    kind = "ppt"

    def __init__(self, K: int):
        self.shape = qc.BipartiteShape(K)
        super().__init__(self.shape.N)
        self.K = self.shape.K

    def descriptor(self):
        return {"kind": self.kind, "K": self.K}

    def contains(self, point, tol=qc.PSD_TOL):
        rho = self.to_matrix(point)
        lam = np.linalg.eigvalsh(np.stack([rho, qc.partial_transpose(rho, self.shape)]))
        return bool(np.all(lam[:, 0] >= -tol))

    def chord(self, point, direction):
        e = self._direction(direction)
        return ppt_chord(self.to_matrix(point), qc.coords_to_traceless(e, self.N), self.shape)


_ALIASES = {"square": ("cube", 2), "disk": ("ball", 2), "circle": ("ball", 2), "interval": ("cube", 1)}


def body_from_descriptor(desc: dict) -> ConvexBody:
    """Rebuild a body from ``{"kind": ..., "d" | "N" | "K": ...}``."""
    desc = dict(desc)
    kind = desc.pop("kind", None)
    if kind in _ALIASES:
        kind, d = _ALIASES[kind]
        desc.setdefault("d", d)
    try:
        if kind == "ball":
            return Ball(int(desc["d"]), float(desc.get("radius", 1.0)))
        if kind == "cube":
            return Cube(int(desc["d"]))
        if kind == "simplex":
            return Simplex(int(desc["N"]))
        if kind == "quantum":
            return QuantumStates(int(desc["N"]))
        if kind == "ppt":
            return PPTStates(int(desc["K"]))
    except KeyError as exc:
        raise ValidationError(f"body descriptor for {kind!r} is missing {exc.args[0]!r}") from None
    raise ValidationError(f"unknown body kind {kind!r}")


def body_radii(body: ConvexBody) -> tuple[float, float, float]:
    """``(r, R, kappa)`` for a body."""
    return body.radii()
