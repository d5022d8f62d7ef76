import numpy as np
import numpy.testing as npt
import pytest

from gfda import linalg
from gfda.errors import ValidationError


def random_orthonormal(rng, L, k):
    Q, _ = np.linalg.qr(rng.standard_normal((L, k)))
    return Q


class TestSymEig:
    def test_identity(self):
        res = linalg.sym_eig(np.eye(2))
        npt.assert_allclose(res.values, [1.0, 1.0])
        npt.assert_allclose(res.vectors, np.eye(2))

    def test_analytic_2x2(self):
        res = linalg.sym_eig([[2.0, -1.0], [-1.0, 2.0]])
        npt.assert_allclose(res.values, [1.0, 3.0], atol=1e-14)

    def test_difference_reference_matrix_spectrum(self):
        # C x C matrix with C-1 on the diagonal and -1 off-diagonal has
        # eigenvalues {0, C, ..., C}; at C=3 that is (0, 3, 3).
        M = np.array([[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]])
        res = linalg.sym_eig(M)
        npt.assert_allclose(res.values, [0.0, 3.0, 3.0], atol=1e-14)

    def test_non_symmetric_rejected(self):
        with pytest.raises(ValidationError):
            linalg.sym_eig([[1.0, 2.0], [0.0, 1.0]])

    @pytest.mark.parametrize("order", [3, 20, 87, 200])
    def test_reconstruction(self, order):
        rng = np.random.default_rng(order)
        A = rng.standard_normal((order, order))
        M = (A + A.T) / 2
        res = linalg.sym_eig(M)
        recon = (res.vectors * res.values) @ res.vectors.T
        assert np.linalg.norm(recon - M) <= 1e-8 * np.linalg.norm(M)
        # per-pair residual ||M v - lambda v||
        residual = M @ res.vectors - res.vectors * res.values
        assert np.linalg.norm(residual, axis=0).max() \
            <= 1e-8 * np.linalg.norm(M)

    def test_ascending_and_sign_convention(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((12, 12))
        res = linalg.sym_eig((A + A.T) / 2)
        assert np.all(np.diff(res.values) >= 0)
        for j in range(12):
            col = res.vectors[:, j]
            nz = np.nonzero(np.abs(col) > 1e-12 * np.abs(col).max())[0]
            assert col[nz[0]] > 0


class TestGramSchmidt:
    def test_two_vector_example(self):
        out = linalg.gram_schmidt([np.array([1.0, 0.0]), np.array([1.0, 1.0])])
        npt.assert_allclose(out, np.eye(2), atol=1e-14)

    def test_collinear_dropped(self):
        out = linalg.gram_schmidt([np.array([1.0, 0.0]), np.array([2.0, 0.0])])
        assert out.shape == (2, 1)
        npt.assert_allclose(out[:, 0], [1.0, 0.0])

    def test_rank_matches_svd_oracle(self):
        # 5 vectors in a 3-dimensional space: numerical rank is 3.
        rng = np.random.default_rng(11)
        vecs = [rng.standard_normal(3) for _ in range(5)]
        rank = np.linalg.matrix_rank(np.column_stack(vecs))
        out = linalg.gram_schmidt(vecs)
        assert out.shape[1] == rank == 3

    def test_output_orthonormal(self):
        rng = np.random.default_rng(12)
        out = linalg.gram_schmidt(rng.standard_normal((40, 12)))
        npt.assert_allclose(out.T @ out, np.eye(out.shape[1]), atol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            linalg.gram_schmidt([])

    def test_all_zero_rejected(self):
        with pytest.raises(ValidationError):
            linalg.gram_schmidt([np.zeros(3)])


def alternating_projection_cosines(U, V, iters=4000):
    """Oracle: maximize u.T v over unit u in span(U), v in span(V) by
    alternating projections, then deflate and repeat.  Uses only raw
    numpy primitives."""
    def complement_basis(Q, w):
        # orthonormal basis of span(Q) with direction w removed
        P = Q @ Q.T
        M = P - np.outer(w, w)
        vals, vecs = np.linalg.eigh(M)
        return vecs[:, vals > 0.5]

    k = min(U.shape[1], V.shape[1])
    cosines = []
    for _ in range(k):
        u = U @ np.arange(1.0, U.shape[1] + 1)
        u /= np.linalg.norm(u)
        for _ in range(iters):
            v = V @ (V.T @ u)
            nv = np.linalg.norm(v)
            if nv == 0:
                break
            v /= nv
            u = U @ (U.T @ v)
            u /= np.linalg.norm(u)
        pv = V @ (V.T @ u)
        cos = np.linalg.norm(pv)
        cosines.append(cos)
        if cos == 0:
            break
        v = pv / cos
        U = complement_basis(U, u)
        V = complement_basis(V, v)
        if U.shape[1] == 0 or V.shape[1] == 0:
            break
    return np.array(cosines)


class TestCanonicalAngles:
    def test_plane_at_60_degrees(self):
        U = np.array([[1.0], [0.0]])
        V = np.array([[0.5], [np.sqrt(3) / 2]])
        res = linalg.canonical_angles(U, V)
        npt.assert_allclose(res.cosines, [0.5], atol=1e-14)
        npt.assert_allclose(res.left[:, 0], [1.0, 0.0], atol=1e-14)
        npt.assert_allclose(res.right[:, 0], [0.5, np.sqrt(3) / 2], atol=1e-14)

    def test_identical_span_different_bases(self):
        rng = np.random.default_rng(3)
        U = random_orthonormal(rng, 8, 3)
        R, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        res = linalg.canonical_angles(U, U @ R)
        npt.assert_allclose(res.cosines, np.ones(3), atol=1e-12)

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(4)
        U = random_orthonormal(rng, 10, 3)
        V = random_orthonormal(rng, 10, 3)
        npt.assert_allclose(linalg.canonical_angles(U, V).cosines,
                            linalg.canonical_angles(V, U).cosines, atol=1e-12)

    def test_invariant_under_basis_change(self):
        rng = np.random.default_rng(6)
        U = random_orthonormal(rng, 10, 4)
        V = random_orthonormal(rng, 10, 2)
        RU, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        npt.assert_allclose(linalg.canonical_angles(U @ RU, V).cosines,
                            linalg.canonical_angles(U, V).cosines, atol=1e-12)

    def test_matches_alternating_projection_oracle(self):
        rng = np.random.default_rng(7)
        U = random_orthonormal(rng, 10, 3)
        V = random_orthonormal(rng, 10, 3)
        res = linalg.canonical_angles(U, V)
        oracle = alternating_projection_cosines(U, V)
        npt.assert_allclose(res.cosines, oracle, atol=1e-6)

    def test_paired_vectors_consistent(self):
        rng = np.random.default_rng(8)
        U = random_orthonormal(rng, 12, 4)
        V = random_orthonormal(rng, 12, 3)
        res = linalg.canonical_angles(U, V)
        for i, cos in enumerate(res.cosines):
            assert res.left[:, i] @ res.right[:, i] >= 0
            npt.assert_allclose(res.left[:, i] @ res.right[:, i], cos,
                                atol=1e-12)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            linalg.canonical_angles(np.eye(3)[:, :1], np.eye(4)[:, :1])


class TestWhitening:
    def test_identity(self):
        npt.assert_allclose(linalg.whitening(np.eye(3)), np.eye(3), atol=1e-14)

    def test_diagonal(self):
        A = linalg.whitening(np.diag([4.0, 1.0]))
        # ascending eigenvalue order: the sigma=1 axis comes first
        npt.assert_allclose(np.abs(A), [[0.0, 0.5], [1.0, 0.0]], atol=1e-14)

    def test_whitens_summed_projections(self):
        from gfda import scatter_ladder, subspace_config
        ens = subspace_config(3, 2, 12, seed=2)
        S = scatter_ladder(ens, "gFDA").within
        A = linalg.whitening(S)
        npt.assert_allclose(A.T @ S @ A, np.eye(A.shape[1]), atol=1e-8)

    def test_idempotent_in_effect(self):
        rng = np.random.default_rng(9)
        B = rng.standard_normal((6, 4))
        S = B @ B.T  # rank 4
        A = linalg.whitening(S)
        W = A.T @ S @ A
        A2 = linalg.whitening(W)
        npt.assert_allclose(A2.T @ W @ A2, np.eye(A.shape[1]), atol=1e-10)

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(ValidationError):
            linalg.whitening(np.diag([1.0, -0.5]))
