"""Density matrices, partial transposition and Hilbert-Schmidt coordinates.

Matrices are plain complex ``numpy`` arrays.  Most routines accept a stack of
matrices with shape ``(..., N, N)`` so that many chains can be advanced at once.

The coordinate map identifies the affine hull of the state space with
``R^d``, ``d = N**2 - 1``::

    rho = I/N + sum_i v[i] * B[i]

where ``B`` is the generalized Gell-Mann basis scaled to be orthonormal in the
Hilbert-Schmidt inner product ``Tr(A^dagger B)``.  The order of ``B`` is fixed:

1. symmetric ``(E_jk + E_kj)/sqrt(2)`` for ``j < k`` in lexicographic order,
2. antisymmetric ``-i (E_jk - E_kj)/sqrt(2)`` in the same order,
3. diagonal ``(E_00 + ... + E_{l-1,l-1} - l E_ll) / sqrt(l (l + 1))`` for
   ``l = 1, ..., N - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NumericalError, ShapeError, ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True)
class BipartiteShape:
    """Local dimension ``K`` of a ``K x K`` system; total dimension ``N = K**2``."""

    K: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValidationError(f"local dimension must be a positive integer, got {self.K!r}")

    @property
    def N(self) -> int:
        return self.K * self.K

    @classmethod
    def from_dim(cls, N: int) -> "BipartiteShape":
        K = int(round(np.sqrt(N)))
        if K * K != N:
            raise ShapeError(f"dimension {N} is not a perfect square")
        return cls(K)


def _as_square(m, name="matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ShapeError(f"{name} must be square, got shape {m.shape}")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_defect(m: np.ndarray) -> float:
    """Largest entrywise deviation from Hermiticity, relative to the largest entry."""
    m = _as_square(m)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    return float(np.max(np.abs(m - dagger(m)))) / scale if m.size else 0.0


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    return hermitian_defect(m) <= tol


def check_density_matrix(rho, tol: float = PSD_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array or raise if it is not a quantum state.

    Checks Hermiticity, unit trace and positivity (minimum eigenvalue
    ``>= -tol``) for a single matrix or a stack of them.
    """
    rho = _as_square(np.asarray(rho, dtype=complex), "density matrix")
    if not is_hermitian(rho):
        raise ValidationError("density matrix is not Hermitian")
    tr = np.trace(rho, axis1=-2, axis2=-1)
    if np.any(np.abs(tr - 1.0) > TRACE_TOL):
        raise ValidationError("density matrix does not have unit trace")
    if np.any(np.linalg.eigvalsh(rho)[..., 0] < -tol):
        raise ValidationError("density matrix is not positive semidefinite")
    return rho


def is_density_matrix(rho, tol: float = PSD_TOL) -> bool:
    try:
        check_density_matrix(rho, tol)
    except ValidationError:
        return False
    return True


def ginibre_sample(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw an ``n x n`` Ginibre matrix (or a stack of ``size`` of them).

    Entries are independent standard complex Gaussians with
    ``E|G_ij|^2 = 1``: real and imaginary parts are ``N(0, 1/2)``.
    """
    if int(n) != n or n < 1:
        raise ValidationError(f"matrix dimension must be a positive integer, got {n!r}")
    shape = (n, n) if size is None else (size, n, n)
    # one draw of twice the size, split, keeps the stream layout simple
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def wishart_state(G) -> np.ndarray:
    """Normalized Wishart matrix ``G G^dagger / Tr(G G^dagger)``.

    For Ginibre ``G`` the result is distributed according to the
    Hilbert-Schmidt (flat) measure on the set of states.  Works on stacks.
    """
    G = _as_square(np.asarray(G, dtype=complex), "G")
    W = G @ dagger(G)
    tr = np.real(np.trace(W, axis1=-2, axis2=-1))
    if np.any(tr <= 0.0):
        raise NumericalError("cannot normalize a zero matrix")
    W = W / tr[..., None, None]
    return 0.5 * (W + dagger(W))


def partial_transpose(rho, shape: BipartiteShape | int | None = None, sys: int = 1) -> np.ndarray:
    """Transpose one tensor factor of a ``K x K`` bipartite operator.

    ``sys=1`` (default) transposes the second factor, ``I (x) T``: block
    ``(a, b)`` of the result is the transpose of block ``(a, b)`` of ``rho``.
    ``sys=0`` transposes the first factor instead.  Accepts stacks.
    """
    rho = _as_square(np.asarray(rho), "operator")
    N = rho.shape[-1]
    if shape is None:
        shape = BipartiteShape.from_dim(N)
    elif not isinstance(shape, BipartiteShape):
        shape = BipartiteShape(int(shape))
    if shape.N != N:
        raise ShapeError(f"operator of dimension {N} does not match K={shape.K} (N={shape.N})")
    if sys not in (0, 1):
        raise ValidationError(f"sys must be 0 or 1, got {sys!r}")
    K = shape.K
    lead = rho.shape[:-2]
    r = rho.reshape(lead + (K, K, K, K))
    n = len(lead)
    axes = list(range(n)) + [n + i for i in ((0, 3, 2, 1) if sys == 1 else (2, 1, 0, 3))]
    return np.ascontiguousarray(r.transpose(axes)).reshape(rho.shape)


def eigenvalues_hermitian(M, vectors: bool = False, tol: float = HERMITIAN_TOL):
    """Ascending real eigenvalues of a Hermitian matrix (optionally with eigenvectors)."""
    M = _as_square(np.asarray(M), "matrix")
    if not is_hermitian(M, tol):
        raise ValidationError("matrix is not Hermitian")
    if vectors:
        return np.linalg.eigh(M)
    return np.linalg.eigvalsh(M)


@lru_cache(maxsize=None)
def _gell_mann(N: int) -> np.ndarray:
    pairs = [(j, k) for j in range(N) for k in range(j + 1, N)]
    basis = np.zeros((N * N - 1, N, N), dtype=complex)
    s = 1.0 / np.sqrt(2.0)
    i = 0
    for j, k in pairs:
        basis[i, j, k] = basis[i, k, j] = s
        i += 1
    for j, k in pairs:
        basis[i, j, k] = -1j * s
        basis[i, k, j] = 1j * s
        i += 1
    for l in range(1, N):
        c = 1.0 / np.sqrt(l * (l + 1.0))
        basis[i, np.arange(l), np.arange(l)] = c
        basis[i, l, l] = -l * c
        i += 1
    basis.flags.writeable = False
    return basis


def hs_basis(N: int) -> np.ndarray:
    """Orthonormal basis of traceless Hermitian ``N x N`` matrices, shape ``(N**2 - 1, N, N)``."""
    if int(N) != N or N < 1:
        raise ValidationError(f"matrix dimension must be a positive integer, got {N!r}")
    return _gell_mann(int(N))


def coords_to_traceless(v, N: int) -> np.ndarray:
    """Linear isometry ``R^(N^2-1) -> traceless Hermitian``; accepts stacks of vectors."""
    v = np.asarray(v, dtype=float)
    d = N * N - 1
    if v.shape[-1] != d:
        raise ShapeError(f"expected {d} coordinates for N={N}, got {v.shape[-1]}")
    B = hs_basis(N).reshape(d, N * N)
    H = (v.reshape(-1, d) @ B).reshape(v.shape[:-1] + (N, N))
    return 0.5 * (H + dagger(H))


def coords_to_matrix(v, N: int | None = None) -> np.ndarray:
    """Map coordinates to ``I/N + sum_i v[i] B[i]``.

    ``N`` is inferred from ``len(v) = N**2 - 1`` when omitted.
    """
    v = np.asarray(v, dtype=float)
    if N is None:
        N = int(round(np.sqrt(v.shape[-1] + 1)))
    H = coords_to_traceless(v, N)
    return H + np.eye(N) / N


def traceless_to_coords(H) -> np.ndarray:
    H = _as_square(np.asarray(H), "matrix")
    N = H.shape[-1]
    B = hs_basis(N)
    # <B_i, H> = Tr(B_i H); B_i Hermitian so this is sum conj(B_i) * H
    return np.real(np.einsum("kij,...ij->...k", B.conj(), H))


def matrix_to_coords(M) -> np.ndarray:
    """Inverse of :func:`coords_to_matrix` for unit-trace Hermitian input."""
    M = _as_square(np.asarray(M, dtype=complex), "matrix")
    if not is_hermitian(M):
        raise ValidationError("matrix is not Hermitian")
    tr = np.trace(M, axis1=-2, axis2=-1)
    if np.any(np.abs(tr - 1.0) > TRACE_TOL):
        raise ValidationError("matrix does not have unit trace")
    return traceless_to_coords(M)


def random_direction(N: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform random traceless Hermitian matrix of unit Hilbert-Schmidt norm.

    A standard Gaussian vector in ``R^(N^2-1)`` is normalized and mapped
    through the isometry, so the result is uniform on the unit sphere.
    """
    if N < 2:
        raise ValidationError("directions need N >= 2")
    d = N * N - 1
    g = rng.standard_normal(d if size is None else (size, d))
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    return coords_to_traceless(g, N)


def hs_norm(m) -> np.ndarray:
    return np.sqrt(np.real(np.sum(np.abs(np.asarray(m)) ** 2, axis=(-2, -1))))


def bell_state(K: int = 2) -> np.ndarray:
    """Maximally entangled pure state ``|Phi+><Phi+|`` on ``K x K``."""
    psi = np.eye(K).reshape(K * K) / np.sqrt(K)
    return np.outer(psi, psi.conj()).astype(complex)


def is_ppt(rho, shape: BipartiteShape | int | None = None, tol: float = PSD_TOL) -> np.ndarray | bool:
    """Whether the partial transpose is positive semidefinite (within ``tol``)."""
    lam = np.linalg.eigvalsh(partial_transpose(rho, shape))
    out = lam[..., 0] >= -tol
    return bool(out) if np.ndim(out) == 0 else out
