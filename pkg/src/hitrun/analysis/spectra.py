"""Eigenvalue statistics of batches of states."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .. import quantum as qc
from ..errors import ValidationError


@dataclass
class SpectralSample:
    """Per-state spectra, one row per state (ascending), possibly rescaled by ``N``."""

    values: np.ndarray
    N: int
    rescale: str = "byN"
    transform: str = "identity"
    meta: dict = field(default_factory=dict)

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    @property
    def states(self) -> int:
        return self.values.shape[0]

    def negative_counts(self, tol: float = 0.0) -> np.ndarray:
        return np.sum(self.values < -tol, axis=1)


_TRANSFORMS = ("identity", "partialTranspose")
_RESCALES = ("none", "byN")


def spectral_statistics(states: Iterable | np.ndarray, rescale: str = "byN", transform: str = "identity",
                        shape: qc.BipartiteShape | int | None = None, meta: dict | None = None,
                        batch: int = 4096) -> SpectralSample:
    """Diagonalize every state (optionally after partial transposition) and collect the spectra.

    ``states`` is an array ``(n, N, N)`` or any iterable of ``N x N`` matrices;
    all must share one dimension.  With ``rescale="byN"`` eigenvalues are
    multiplied by ``N`` so that each state's values average to one.
    """
    if rescale not in _RESCALES:
        raise ValidationError(f"rescale must be one of {_RESCALES}")
    if transform not in _TRANSFORMS:
        raise ValidationError(f"transform must be one of {_TRANSFORMS}")
    if isinstance(states, np.ndarray) and states.ndim == 3:
        chunks = (states[i:i + batch] for i in range(0, len(states), batch))
    else:
        chunks = _batched(states, batch)
    out = []
    N = None
    for chunk in chunks:
        if chunk.shape[-1] != chunk.shape[-2]:
            raise ValidationError("states must be square matrices")
        if N is None:
            N = chunk.shape[-1]
        elif chunk.shape[-1] != N:
            raise ValidationError(f"mixed dimensions in stream: {N} and {chunk.shape[-1]}")
        if transform == "partialTranspose":
            chunk = qc.partial_transpose(chunk, shape)
        lam = np.linalg.eigvalsh(chunk)
        out.append(lam * N if rescale == "byN" else lam)
    if N is None:
        N = shape.N if isinstance(shape, qc.BipartiteShape) else int(shape or 0) ** 2
        return SpectralSample(np.empty((0, N)), N, rescale, transform, dict(meta or {}))
    return SpectralSample(np.concatenate(out), N, rescale, transform, dict(meta or {}))


def _batched(it, batch):
    buf = []
    N = None
    for m in it:
        m = np.asarray(m)
        if N is not None and m.shape != (N, N):
            if buf:
                yield np.stack(buf)
                buf = []
        N = m.shape[-1]
        buf.append(m)
        if len(buf) == batch:
            yield np.stack(buf)
            buf = []
    if buf:
        yield np.stack(buf)


def ppt_mask(states: np.ndarray, shape: qc.BipartiteShape | int | None = None, tol: float = qc.PSD_TOL) -> np.ndarray:
    """Boolean mask of the states whose partial transpose is positive semidefinite."""
    return np.linalg.eigvalsh(qc.partial_transpose(states, shape))[:, 0] >= -tol
