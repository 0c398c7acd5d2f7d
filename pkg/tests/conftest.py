import numpy as np
import pytest

from hitrun import quantum as qc


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(N, rng, rank=None):
    G = qc.ginibre_sample(N, rng)
    if rank is not None:
        G = G[:, :rank]
        G = G @ qc.dagger(G)
        return G / np.trace(G).real
    return qc.wishart_state(G)


def interior_ppt_state(K, rng, mix=0.5):
    """A PPT state strictly inside the PPT set: a random state mixed with I/N."""
    N = K * K
    while True:
        rho = (1 - mix) * random_state(N, rng) + mix * np.eye(N) / N
        if np.linalg.eigvalsh(qc.partial_transpose(rho, K))[0] > 1e-6:
            return rho
