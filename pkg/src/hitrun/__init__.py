"""Uniform sampling of convex bodies by hit-and-run, with quantum-state bodies
(all states, PPT states) and spectral analysis of the samples."""

from .bodies import Ball, Chord, ConvexBody, Cube, PPTStates, QuantumStates, Simplex, body_from_descriptor
from .errors import HitRunError, InvariantViolation, NumericalError, ShapeError, ValidationError
from .kernels import BACKEND
from .sampler import ChainConfig, run_chain, run_chains_parallel, sample_chain

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Ball",
    "ChainConfig",
    "Chord",
    "ConvexBody",
    "Cube",
    "HitRunError",
    "InvariantViolation",
    "NumericalError",
    "PPTStates",
    "QuantumStates",
    "ShapeError",
    "Simplex",
    "ValidationError",
    "body_from_descriptor",
    "run_chain",
    "run_chains_parallel",
    "sample_chain",
]
