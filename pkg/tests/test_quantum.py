import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hitrun import quantum as qc
from hitrun.errors import NumericalError, ShapeError, ValidationError

from conftest import random_state


def block_transpose_oracle(rho, K):
    """Transpose each K x K block in place, written out with explicit loops."""
    out = np.empty_like(rho)
    for a in range(K):
        for b in range(K):
            out[a * K:(a + 1) * K, b * K:(b + 1) * K] = rho[a * K:(a + 1) * K, b * K:(b + 1) * K].T
    return out


class TestGinibre:
    def test_scalar_second_moment(self, rng):
        g = qc.ginibre_sample(1, rng, size=100_000)[:, 0, 0]
        m = np.abs(g) ** 2
        # |g|^2 is Exp(1): mean 1, sd 1
        assert abs(m.mean() - 1.0) < 3 / np.sqrt(len(m))

    def test_trace_moment(self, rng):
        G = qc.ginibre_sample(4, rng, size=10_000)
        t = np.real(np.trace(G @ qc.dagger(G), axis1=1, axis2=2)) / 16
        assert abs(t.mean() - 1.0) < 3 * t.std() / np.sqrt(len(t))

    def test_real_and_imaginary_parts_have_variance_half(self, rng):
        G = qc.ginibre_sample(3, rng, size=20_000)
        assert abs(G.real.var() - 0.5) < 0.01
        assert abs(G.imag.var() - 0.5) < 0.01

    def test_deterministic(self):
        a = qc.ginibre_sample(4, np.random.default_rng(7))
        b = qc.ginibre_sample(4, np.random.default_rng(7))
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("n", [0, -1, 2.5])
    def test_invalid_dimension(self, n, rng):
        with pytest.raises(ValidationError):
            qc.ginibre_sample(n, rng)


class TestWishart:
    def test_identity(self):
        assert np.allclose(qc.wishart_state(np.eye(4)), np.eye(4) / 4, atol=1e-15)

    def test_rank_one(self):
        G = np.zeros((4, 4))
        G[0, 0] = 1
        assert np.allclose(qc.wishart_state(G), np.diag([1.0, 0, 0, 0]))

    def test_zero_matrix(self):
        with pytest.raises(NumericalError):
            qc.wishart_state(np.zeros((3, 3)))

    def test_batch_is_valid(self, rng):
        rho = qc.wishart_state(qc.ginibre_sample(4, rng, size=100_000))
        assert np.max(np.abs(rho - qc.dagger(rho))) == 0.0
        assert np.max(np.abs(np.trace(rho, axis1=1, axis2=2) - 1)) < 1e-12
        assert np.linalg.eigvalsh(rho)[:, 0].min() > -1e-12


class TestPartialTranspose:
    def test_maximally_mixed(self):
        assert np.array_equal(qc.partial_transpose(np.eye(9) / 9, 3), np.eye(9) / 9)

    def test_bell_state_spectrum(self):
        lam = np.linalg.eigvalsh(qc.partial_transpose(qc.bell_state(2)))
        assert np.allclose(lam, [-0.5, 0.5, 0.5, 0.5], atol=1e-14)

    @pytest.mark.parametrize("K", [2, 3, 4])
    def test_matches_block_oracle(self, K, rng):
        rho = random_state(K * K, rng)
        assert np.array_equal(qc.partial_transpose(rho, K), block_transpose_oracle(rho, K))

    @pytest.mark.parametrize("K", [2, 3])
    def test_involution_and_trace(self, K, rng):
        rho = random_state(K * K, rng)
        pt = qc.partial_transpose(rho, K)
        assert np.max(np.abs(qc.partial_transpose(pt, K) - rho)) <= 1e-14
        assert abs(np.trace(pt) - 1) < 1e-12
        assert qc.is_hermitian(pt)

    def test_first_factor_related_by_global_transpose(self, rng):
        rho = random_state(9, rng)
        a = qc.partial_transpose(rho, 3, sys=1)
        b = qc.partial_transpose(rho, 3, sys=0)
        assert np.allclose(b, a.T, atol=1e-15)
        assert np.allclose(np.linalg.eigvalsh(a), np.linalg.eigvalsh(b), atol=1e-12)

    def test_stack(self, rng):
        rhos = np.stack([random_state(4, rng) for _ in range(5)])
        out = qc.partial_transpose(rhos)
        for r, o in zip(rhos, out):
            assert np.array_equal(o, block_transpose_oracle(r, 2))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            qc.partial_transpose(np.eye(4) / 4, 3)
        with pytest.raises(ShapeError):
            qc.partial_transpose(np.eye(6) / 6)

    def test_bad_subsystem(self):
        with pytest.raises(ValidationError):
            qc.partial_transpose(np.eye(4) / 4, 2, sys=2)


class TestEigenvalues:
    def test_examples(self):
        assert np.allclose(qc.eigenvalues_hermitian(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
        assert np.allclose(qc.eigenvalues_hermitian(np.eye(4) / 4), [0.25] * 4)
        assert np.allclose(qc.eigenvalues_hermitian(np.array([[0, 1], [1, 0]])), [-1, 1])

    def test_reconstruction(self, rng):
        M = random_state(6, rng) - np.eye(6) / 6
        lam, V = qc.eigenvalues_hermitian(M, vectors=True)
        assert np.all(np.diff(lam) >= 0)
        assert np.linalg.norm(M - V @ np.diag(lam) @ qc.dagger(V)) <= 1e-10 * np.linalg.norm(M)

    def test_non_hermitian(self):
        with pytest.raises(ValidationError):
            qc.eigenvalues_hermitian(np.array([[0, 1], [0, 0]]))


class TestCoordinates:
    @pytest.mark.parametrize("N", [2, 3, 4, 5])
    def test_basis_orthonormal_traceless(self, N):
        B = qc.hs_basis(N)
        gram = np.einsum("aij,bij->ab", B.conj(), B)
        assert np.allclose(gram, np.eye(N * N - 1), atol=1e-14)
        assert np.allclose(np.trace(B, axis1=1, axis2=2), 0, atol=1e-15)
        assert np.allclose(B, qc.dagger(B))

    def test_origin_is_maximally_mixed(self):
        assert np.allclose(qc.coords_to_matrix(np.zeros(15)), np.eye(4) / 4, atol=1e-16)

    def test_unit_vectors_map_to_orthonormal(self):
        M = qc.coords_to_matrix(np.eye(8), 3) - np.eye(3) / 3
        assert np.allclose(np.einsum("aij,bij->ab", M.conj(), M), np.eye(8), atol=1e-14)

    def test_pauli_order_for_qubit(self):
        # symmetric, antisymmetric, diagonal: sigma_x, sigma_y, sigma_z over sqrt(2)
        B = qc.hs_basis(2) * np.sqrt(2)
        assert np.allclose(B[0], [[0, 1], [1, 0]])
        assert np.allclose(B[1], [[0, -1j], [1j, 0]])
        assert np.allclose(B[2], [[1, 0], [0, -1]])

    def test_round_trip(self, rng):
        v = rng.standard_normal(24) * 0.05
        assert np.allclose(qc.matrix_to_coords(qc.coords_to_matrix(v, 5)), v, atol=1e-12)

    def test_trace_check(self):
        with pytest.raises(ValidationError):
            qc.matrix_to_coords(np.eye(2))

    def test_hermitian_check(self):
        with pytest.raises(ValidationError):
            qc.matrix_to_coords(np.array([[0.5, 1], [0, 0.5]]))

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, 8, elements=st.floats(-10, 10)), arrays(np.float64, 8, elements=st.floats(-10, 10)))
    def test_isometry(self, v, w):
        d = qc.hs_norm(qc.coords_to_matrix(v, 3) - qc.coords_to_matrix(w, 3))
        assert abs(d - np.linalg.norm(v - w)) <= 1e-12 * max(1.0, np.linalg.norm(v - w))

    @settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, 15, elements=st.floats(-5, 5)))
    def test_round_trip_property(self, v):
        assert np.allclose(qc.traceless_to_coords(qc.coords_to_traceless(v, 4)), v, atol=1e-12)


class TestRandomDirection:
    def test_invariants(self, rng):
        H = qc.random_direction(4, rng, size=200)
        assert np.allclose(np.trace(H, axis1=1, axis2=2), 0, atol=1e-12)
        assert np.allclose(qc.hs_norm(H), 1, atol=1e-12)

    def test_isotropy(self, rng):
        v = qc.traceless_to_coords(qc.random_direction(2, rng, size=100_000))
        n = len(v)
        # uniform on S^2: coordinates have mean 0 and variance 1/3
        assert np.all(np.abs(v.mean(axis=0)) < 3 * np.sqrt(1 / 3 / n))
        sq = v ** 2
        assert np.all(np.abs(sq.mean(axis=0) - 1 / 3) < 3 * sq.std(axis=0) / np.sqrt(n))

    def test_needs_two_levels(self, rng):
        with pytest.raises(ValidationError):
            qc.random_direction(1, rng)


def test_bipartite_shape():
    s = qc.BipartiteShape(3)
    assert s.N == 9
    assert qc.BipartiteShape.from_dim(16).K == 4
    with pytest.raises(ShapeError):
        qc.BipartiteShape.from_dim(6)


def test_density_matrix_check(rng):
    qc.check_density_matrix(random_state(3, rng))
    assert not qc.is_density_matrix(np.diag([1.5, -0.5]))
    assert not qc.is_density_matrix(np.eye(2))


def test_is_ppt():
    assert not qc.is_ppt(qc.bell_state(2))
    assert qc.is_ppt(np.eye(4) / 4)
    # Werner-like mixture with the Bell state is PPT iff p <= 1/3
    for p, expect in ((0.3, True), (0.36, False)):
        rho = p * qc.bell_state(2) + (1 - p) * np.eye(4) / 4
        assert qc.is_ppt(rho) == expect
