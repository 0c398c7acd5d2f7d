"""Hit-and-run Markov chains over convex bodies.

One step from ``x``: draw a direction ``e`` uniformly on the unit sphere, find
the chord of the body through ``x`` along ``e`` and move to a uniformly chosen
point of that chord.  Directions of different steps are independent.

Randomness
----------
Each chain owns two independent PCG64 streams, one feeding the Gaussian
direction vectors and one feeding the uniform chord positions.  Both are
seeded from ``chain_seed(seed, index) = splitmix64(seed + index)`` through
``SeedSequence(chain_seed, spawn_key=(stream,))``.  Since numpy fills arrays
sequentially from a stream, the output does not depend on how the run is cut
into chunks, so checkpoints can be taken at any step and resumed exactly.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from . import kernels
from . import quantum as qc
from .bodies import Ball, ConvexBody, Cube, PPTStates, QuantumStates, Simplex, body_from_descriptor, psd_chord_batch
from .errors import InvariantViolation, ValidationError

MASK64 = (1 << 64) - 1
CHECKPOINT_VERSION = 1


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer, a bijection on 64-bit integers."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def chain_seed(seed: int, index: int = 0) -> int:
    return splitmix64((int(seed) + int(index)) & MASK64)


#: stream ids under one chain seed: 0 directions, 1 chord positions, 2 Ginibre batches
GINIBRE_STREAM = 2


def derived_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """PCG64 generator for ``stream`` of chain ``index`` under the run seed ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(chain_seed(seed, index), spawn_key=(stream,))))


class ChainStreams(NamedTuple):
    directions: np.random.Generator
    uniforms: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int, index: int = 0) -> "ChainStreams":
        return cls(derived_rng(seed, 0, index), derived_rng(seed, 1, index))

    def get_state(self) -> dict:
        return {"directions": self.directions.bit_generator.state, "uniforms": self.uniforms.bit_generator.state}

    @classmethod
    def from_state(cls, state: dict) -> "ChainStreams":
        out = cls(np.random.Generator(np.random.PCG64()), np.random.Generator(np.random.PCG64()))
        out.directions.bit_generator.state = state["directions"]
        out.uniforms.bit_generator.state = state["uniforms"]
        return out


def default_burn_in(body: ConvexBody) -> int:
    return int(math.ceil(10 * body.dim))


@dataclass(frozen=True)
class ChainConfig:
    """Run length and bookkeeping for one chain.

    ``steps`` counts every iteration including burn-in; the state after step
    ``i`` (1-based) is kept when ``i > burn_in`` and ``(i - burn_in) % thin == 0``.
    ``burn_in=None`` means ``ceil(10 d)`` for the body the chain runs on.
    """

    steps: int
    burn_in: int | None = None
    thin: int = 1
    seed: int = 0
    start: tuple | None = None

    def resolve(self, body: ConvexBody) -> "ChainConfig":
        cfg = self if self.burn_in is not None else dataclasses.replace(self, burn_in=default_burn_in(body))
        cfg.validate()
        return cfg

    def validate(self):
        if self.burn_in is None:
            raise ValidationError("burn_in is unresolved")
        if int(self.thin) != self.thin or self.thin < 1:
            raise ValidationError(f"thin must be a positive integer, got {self.thin!r}")
        if self.burn_in < 0:
            raise ValidationError(f"burn_in must be >= 0, got {self.burn_in}")
        if not self.steps > self.burn_in:
            raise ValidationError(f"steps ({self.steps}) must exceed burn_in ({self.burn_in})")
        if not 0 <= self.seed <= MASK64:
            raise ValidationError("seed must be a 64-bit unsigned integer")

    @property
    def retained(self) -> int:
        return (self.steps - self.burn_in) // self.thin

    def keep_mask(self, first: int, n: int) -> np.ndarray:
        """Which of the steps ``first+1 .. first+n`` are retained."""
        idx = np.arange(first + 1, first + n + 1)
        return (idx > self.burn_in) & ((idx - self.burn_in) % self.thin == 0)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["start"] = None if self.start is None else [float(v) for v in self.start]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ChainConfig":
        d = dict(d)
        if d.get("start") is not None:
            d["start"] = tuple(d["start"])
        return cls(**d)


@dataclass
class ChainState:
    """Current point of a chain in body coordinates, the number of steps taken and its random streams."""

    position: np.ndarray
    step: int
    streams: ChainStreams


def _direction(g: np.ndarray) -> np.ndarray:
    return g / np.linalg.norm(g)


def hit_and_run_step(state: ChainState, body: ConvexBody, rng=None) -> ChainState:
    """Advance one step using the body's own chord oracle (coordinates throughout).

    ``rng`` may be a single ``Generator`` used for both draws; by default the
    state's streams are used.  This is the reference path; :func:`run_chain`
    uses the batched kernels but consumes random numbers identically.
    """
    if rng is None:
        dirs, unif = state.streams
    else:
        dirs = unif = rng
    x = np.asarray(state.position, dtype=float)
    if not body.contains(x):
        raise InvariantViolation(f"chain position left the {body.kind} body at step {state.step}")
    e = _direction(dirs.standard_normal(body.dim))
    c = body.chord(x, e)
    t = c.t_min + unif.random() * (c.t_max - c.t_min)
    return ChainState(x + t * e, state.step + 1, state.streams)


class _EuclideanWalker:
    def __init__(self, body: ConvexBody, x0: np.ndarray, backend=None):
        k = kernels.get_backend(backend)
        self.body = body
        self.x = np.ascontiguousarray(x0, dtype=float).copy()
        if isinstance(body, Ball):
            self._walk = lambda g, u: k.ball_walk(self.x, g, u, body.radius)
        elif isinstance(body, Cube):
            self._walk = lambda g, u: k.box_walk(self.x, g, u, 0.0, 1.0)
        elif isinstance(body, Simplex):
            A, b = (np.ascontiguousarray(a) for a in body.polytope)
            self._walk = lambda g, u: k.polytope_walk(self.x, g, u, A, b)
        else:
            raise ValidationError(f"no Euclidean kernel for {body.kind}")

    def advance(self, gauss, u, keep):
        # gauss: (n, 1, d); u: (n, 1)
        g = np.ascontiguousarray(gauss[:, 0, :])
        out, failed = self._walk(g, np.ascontiguousarray(u[:, 0]))
        if failed >= 0:
            raise InvariantViolation(f"chain position left the {self.body.kind} body")
        return out[keep][:, None, :]

    @property
    def positions(self):
        return self.x[None]


class _MatrixWalker:
    """Lockstep walk of ``C`` independent chains in a quantum body, on matrices."""

    def __init__(self, body: QuantumStates, rho0: np.ndarray):
        self.body = body
        self.N = body.N
        self.rho = np.array(rho0, dtype=complex)
        self.shape = body.shape if isinstance(body, PPTStates) else None

    def _chord(self, H):
        try:
            t_min, t_max = psd_chord_batch(self.rho, H)
            if self.shape is not None:
                a, b = psd_chord_batch(
                    qc.partial_transpose(self.rho, self.shape), qc.partial_transpose(H, self.shape)
                )
                t_min = np.maximum(t_min, a)
                t_max = np.minimum(t_max, b)
        except ValidationError:
            raise InvariantViolation(f"chain position left the {self.body.kind} body") from None
        return t_min, t_max

    def advance(self, gauss, u, keep):
        n, C, d = gauss.shape
        e = gauss / np.linalg.norm(gauss, axis=-1, keepdims=True)
        Hs = qc.coords_to_traceless(e.reshape(n * C, d), self.N).reshape(n, C, self.N, self.N)
        out = []
        for k in range(n):
            H = Hs[k]
            t_min, t_max = self._chord(H)
            t = t_min + u[k] * (t_max - t_min)
            self.rho = self.rho + t[:, None, None] * H
            if keep[k]:
                out.append(self.rho.copy())
        if not out:
            return np.empty((0, C, self.N, self.N), dtype=complex)
        return np.stack(out)

    @property
    def positions(self):
        return self.rho


def _is_matrix_body(body) -> bool:
    return isinstance(body, QuantumStates)


def _start_point(body: ConvexBody, config: ChainConfig) -> np.ndarray:
    x = body.center if config.start is None else np.asarray(config.start, dtype=float)
    if x.shape != (body.dim,):
        raise ValidationError(f"start point must have {body.dim} coordinates")
    if not body.contains(x, tol=0.0):
        raise ValidationError("start point is not inside the body")
    return x


def _chunk_size(body: ConvexBody, chains: int) -> int:
    if _is_matrix_body(body):
        return max(1, min(1024, 2**18 // (chains * body.N * body.N)))
    return max(64, min(65536, 2**20 // body.dim))


def _make_walker(body, positions, backend=None):
    if _is_matrix_body(body):
        return _MatrixWalker(body, positions)
    if positions.shape[0] != 1:
        raise ValidationError("Euclidean walkers advance one chain at a time")
    return _EuclideanWalker(body, positions[0], backend)


def _checkpoint_position(body, pos):
    if _is_matrix_body(body):
        return {"re": np.real(pos).tolist(), "im": np.imag(pos).tolist()}
    return [float(v) for v in pos]


def _restore_position(body, data):
    if _is_matrix_body(body):
        return np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    return np.asarray(data, dtype=float)


def make_checkpoint(body, config, step, streams: list[ChainStreams], positions, chain_index=0) -> dict:
    """JSON-ready snapshot of a run (one or several lockstep chains)."""
    return {
        "version": CHECKPOINT_VERSION,
        "body": body.descriptor(),
        "config": config.to_dict(),
        "chain_index": chain_index,
        "step": int(step),
        "rng": [s.get_state() for s in streams],
        "position": [_checkpoint_position(body, p) for p in positions],
    }


def save_checkpoint(path, checkpoint: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(checkpoint, fh)


def load_checkpoint(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _iter_chains(body, config, num_chains, first_index=0, resume=None, checkpoint_every=None,
                 on_checkpoint=None, validate=False, backend=None) -> Iterator[np.ndarray]:
    """Yield arrays of retained samples with shape ``(k, C, ...)`` chunk by chunk."""
    config = config.resolve(body)
    if resume is not None:
        if body_from_descriptor(resume["body"]) != body:
            raise ValidationError("checkpoint was written for a different body")
        if ChainConfig.from_dict(resume["config"]).resolve(body) != config:
            raise ValidationError("checkpoint was written with a different chain configuration")
        if len(resume["rng"]) != num_chains or resume.get("chain_index", 0) != first_index:
            raise ValidationError("checkpoint does not match the requested chains")
        step = int(resume["step"])
        streams = [ChainStreams.from_state(s) for s in resume["rng"]]
        positions = np.stack([_restore_position(body, p) for p in resume["position"]])
    else:
        step = 0
        streams = [ChainStreams.from_seed(config.seed, first_index + c) for c in range(num_chains)]
        x0 = _start_point(body, config)
        if _is_matrix_body(body):
            x0 = qc.coords_to_matrix(x0, body.N)
        positions = np.stack([x0] * num_chains)
    walker = _make_walker(body, positions, backend)
    B = _chunk_size(body, num_chains)
    d = body.dim
    while step < config.steps:
        n = min(B, config.steps - step)
        if checkpoint_every:
            n = min(n, checkpoint_every - step % checkpoint_every)
        gauss = np.stack([s.directions.standard_normal((n, d)) for s in streams], axis=1)
        u = np.stack([s.uniforms.random(n) for s in streams], axis=1)
        keep = config.keep_mask(step, n)
        out = walker.advance(gauss, u, keep)
        step += n
        if validate:
            _validate_samples(body, out)
        if len(out):
            yield out
        if checkpoint_every and on_checkpoint is not None and step % checkpoint_every == 0:
            on_checkpoint(make_checkpoint(body, config, step, streams, walker.positions, first_index))


def _validate_samples(body, out):
    flat = out.reshape((-1,) + out.shape[2:])
    if _is_matrix_body(body):
        for rho in flat:
            qc.check_density_matrix(rho)
            if isinstance(body, PPTStates) and not qc.is_ppt(rho, body.shape):
                raise InvariantViolation("sample is not PPT")
    else:
        for x in flat:
            if not body.contains(x, tol=1e-9):
                raise InvariantViolation("sample lies outside the body")


def run_chain(body: ConvexBody, config: ChainConfig, *, resume: dict | None = None,
              checkpoint_every: int | None = None, on_checkpoint=None, validate: bool = False,
              chain_index: int = 0, backend: str | None = None) -> Iterator[np.ndarray]:
    """Iterate over the retained states of one chain.

    Euclidean bodies yield coordinate vectors; quantum bodies yield density
    matrices.  With ``checkpoint_every`` set, ``on_checkpoint`` receives a
    JSON-ready dict every that many steps; pass one back as ``resume`` to
    continue the run exactly where it stopped.
    """
    for block in _iter_chains(body, config, 1, chain_index, resume, checkpoint_every, on_checkpoint,
                              validate, backend):
        yield from block[:, 0]


def sample_chain(body: ConvexBody, config: ChainConfig, **kwargs) -> np.ndarray:
    """:func:`run_chain` collected into one array."""
    config = config.resolve(body)
    blocks = [b[:, 0] for b in _iter_chains(body, config, 1, kwargs.pop("chain_index", 0), **kwargs)]
    if not blocks:
        return _empty(body)
    return np.concatenate(blocks)


def _empty(body):
    if _is_matrix_body(body):
        return np.empty((0, body.N, body.N), dtype=complex)
    return np.empty((0, body.dim))


def _one_chain(args):
    body_desc, config, index, backend = args
    return sample_chain(body_from_descriptor(body_desc), config, chain_index=index, backend=backend)


def run_chains_parallel(body: ConvexBody, config: ChainConfig, num_chains: int, *,
                        workers: int | None = None, validate: bool = False,
                        backend: str | None = None) -> np.ndarray:
    """Run ``num_chains`` independent chains and concatenate their samples by chain index.

    Chain ``i`` is seeded with ``chain_seed(config.seed, i)``, so chain 0 is
    exactly :func:`run_chain` and the merged result does not depend on
    ``workers``.  Quantum bodies advance all chains in lockstep through
    stacked eigensolvers; Euclidean chains run one after another, or in
    ``workers`` processes.
    """
    if int(num_chains) != num_chains or num_chains < 1:
        raise ValidationError("num_chains must be a positive integer")
    config = config.resolve(body)
    if _is_matrix_body(body):
        blocks = list(_iter_chains(body, config, num_chains, validate=validate, backend=backend))
        if not blocks:
            return _empty(body)
        per_chain = np.concatenate(blocks)  # (k, C, N, N)
        return np.concatenate([per_chain[:, c] for c in range(num_chains)])
    jobs = [(body.descriptor(), config, i, backend) for i in range(num_chains)]
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_one_chain, jobs))
    else:
        parts = [sample_chain(body, config, chain_index=i, validate=validate, backend=backend) for i in range(num_chains)]
    return np.concatenate(parts)
