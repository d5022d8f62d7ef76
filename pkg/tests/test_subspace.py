import numpy as np
import numpy.testing as npt
import pytest

import gfda
from gfda import linalg
from gfda.errors import DegeneratePairError, ValidationError


def line_model(label, direction, mean=None):
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return gfda.ClassModel(label=label, basis=d[:, None],
                           eigenvalues=np.array([1.0]),
                           mean=d.copy() if mean is None else np.asarray(mean, float),
                           count=1)


def sixty_degree_pair():
    return (line_model("a", [1.0, 0.0]),
            line_model("b", [0.5, np.sqrt(3) / 2]))


class TestFitClass:
    def test_single_sample(self):
        x = np.array([3.0, 4.0])
        m = gfda.fit_class([x], label="one")
        npt.assert_allclose(m.basis[:, 0], x / 5.0)
        npt.assert_allclose(m.eigenvalues, [25.0])
        npt.assert_allclose(m.mean, x)
        assert m.count == 1

    def test_two_unit_vectors(self):
        m = gfda.fit_class(np.eye(2))
        npt.assert_allclose(m.eigenvalues, [0.5, 0.5])
        # the basis spans the whole plane
        npt.assert_allclose(m.basis @ m.basis.T, np.eye(2), atol=1e-12)

    def test_first_component_tracks_mean_direction(self):
        rng = np.random.default_rng(21)
        direction = rng.standard_normal(15)
        direction /= np.linalg.norm(direction)
        samples = direction + 0.15 * rng.standard_normal((9, 15))
        samples /= np.linalg.norm(samples, axis=1, keepdims=True)
        m = gfda.fit_class(samples)
        mean = samples.mean(axis=0)
        corr = abs(m.basis[:, 0] @ mean) / np.linalg.norm(mean)
        assert corr > 0.99

    def test_gram_path_matches_direct_route(self):
        # n < L triggers the Gram-matrix route; compare against numpy's
        # eigendecomposition of the explicit autocorrelation matrix.
        rng = np.random.default_rng(22)
        X = rng.standard_normal((6, 40)) + 2.0
        m = gfda.fit_class(X)
        R = X.T @ X / X.shape[0]
        vals, vecs = np.linalg.eigh(R)
        vals, vecs = vals[::-1], vecs[:, ::-1]
        npt.assert_allclose(m.eigenvalues, vals[:m.dim], rtol=1e-10)
        # spans agree column by column up to sign
        for j in range(m.dim):
            assert abs(m.basis[:, j] @ vecs[:, j]) > 1 - 1e-8
        for j in range(m.dim):
            resid = R @ m.basis[:, j] - m.eigenvalues[j] * m.basis[:, j]
            assert np.linalg.norm(resid) <= 1e-8 * np.linalg.norm(R)

    def test_energy_rule(self):
        X = np.diag([4.0, 2.0, 1.0, 0.5])  # eigenvalues prop to squares
        m = gfda.fit_class(X, energy=0.9)
        total = np.sum(np.array([4.0, 2.0, 1.0, 0.5]) ** 2) / 4
        kept = np.sum(m.eigenvalues)
        assert kept / total >= 0.9
        m_less = gfda.fit_class(X, energy=0.5)
        assert m_less.dim < m.dim

    def test_errors(self):
        with pytest.raises(ValidationError):
            gfda.fit_class(np.zeros((0, 3)))
        with pytest.raises(ValidationError):
            gfda.fit_class(np.zeros((2, 3)))
        with pytest.raises(ValidationError):
            gfda.fit_class(np.eye(3), dim=4)
        with pytest.raises(ValidationError):
            gfda.fit_class(np.eye(3), dim=1, energy=0.5)


class TestProjectionMatrix:
    def test_single_axis(self):
        P = gfda.projection_matrix(line_model("a", [1.0, 0.0]))
        npt.assert_allclose(P, [[1.0, 0.0], [0.0, 0.0]])

    def test_full_basis_is_identity(self):
        m = gfda.fit_class(np.diag([1.0, 2.0, 3.0]))
        P = gfda.projection_matrix(m)
        npt.assert_allclose(P, np.eye(3), atol=1e-12)

    def test_idempotent_with_trace(self):
        rng = np.random.default_rng(23)
        Q, _ = np.linalg.qr(rng.standard_normal((5, 2)))
        m = gfda.ClassModel("a", Q, np.array([2.0, 1.0]), Q[:, 0], 3)
        P = gfda.projection_matrix(m)
        assert np.linalg.norm(P @ P - P) <= 1e-10
        npt.assert_allclose(np.trace(P), 2.0, atol=1e-12)


class TestAlignedFirstVectors:
    def test_orients_toward_class_mean(self):
        d = np.array([1.0, 0.0])
        flipped = gfda.ClassModel("a", (-d)[:, None], np.array([1.0]),
                                  mean=np.array([2.0, 0.1]), count=1)
        other = line_model("b", [0.0, 1.0])
        ens = gfda.SubspaceEnsemble((flipped, other), ambient_dim=2)
        firsts = gfda.aligned_first_vectors(ens)
        assert firsts[0] @ flipped.mean > 0

    def test_zero_projection_keeps_sign(self):
        m = gfda.ClassModel("a", np.array([[1.0], [0.0]]), np.array([1.0]),
                            mean=np.array([0.0, 1.0]), count=1)
        ens = gfda.SubspaceEnsemble((m, line_model("b", [0.0, 1.0])), 2)
        firsts = gfda.aligned_first_vectors(ens)
        npt.assert_allclose(firsts[0], [1.0, 0.0])


class TestDifferenceSubspaceGeometric:
    def test_sixty_degrees(self):
        c1, c2 = sixty_degree_pair()
        d = gfda.difference_subspace_geometric(c1, c2)
        v = np.array([0.5, np.sqrt(3) / 2]) - np.array([1.0, 0.0])
        npt.assert_allclose(d[:, 0], v / np.linalg.norm(v), atol=1e-14)

    def test_orthogonal_lines(self):
        c1 = line_model("a", [1.0, 0.0])
        c2 = line_model("b", [0.0, 1.0])
        d = gfda.difference_subspace_geometric(c1, c2)
        npt.assert_allclose(d[:, 0], np.array([-1.0, 1.0]) / np.sqrt(2),
                            atol=1e-14)

    def test_dimension_order_enforced(self):
        rng = np.random.default_rng(24)
        big = gfda.fit_class(rng.standard_normal((3, 8)), label="big")
        small = gfda.fit_class(rng.standard_normal((2, 8)), label="small")
        with pytest.raises(ValidationError):
            gfda.difference_subspace_geometric(small, big)
        out = gfda.difference_subspace_geometric(big, small)
        assert out.shape == (8, small.dim)

    def test_overlap_names_offending_index(self):
        c1, _ = sixty_degree_pair()
        c2 = line_model("b", [1.0, 1e-12])
        with pytest.raises(DegeneratePairError) as err:
            gfda.difference_subspace_geometric(c1, c2)
        assert err.value.index == 0

    def test_output_orthonormal(self):
        rng = np.random.default_rng(25)
        c1 = gfda.fit_class(rng.standard_normal((2, 6)), label="a")
        c2 = gfda.fit_class(rng.standard_normal((2, 6)), label="b")
        d = gfda.difference_subspace_geometric(c1, c2)
        npt.assert_allclose(d.T @ d, np.eye(d.shape[1]), atol=1e-10)


class TestDifferenceSubspaceAnalytic:
    def test_sixty_degree_spectrum(self):
        c1, c2 = sixty_degree_pair()
        res = gfda.difference_subspace_analytic(c1, c2)
        npt.assert_allclose(res.eigenvalues, [0.5, 1.5], atol=1e-12)
        assert res.basis.shape == (2, 1)
        assert res.principal_basis.shape == (2, 1)

    def test_identical_subspaces_degenerate(self):
        c1, _ = sixty_degree_pair()
        c2 = line_model("b", [1.0, 0.0])
        with pytest.raises(DegeneratePairError):
            gfda.difference_subspace_analytic(c1, c2)

    def test_orthogonal_lines_excluded_with_warning(self):
        # both eigenvalues of P1 + P2 sit exactly at 1, which belongs to
        # neither side of the split, so the result is empty and a warning fires
        c1 = line_model("a", [1.0, 0.0])
        c2 = line_model("b", [0.0, 1.0])
        with pytest.warns(RuntimeWarning):
            res = gfda.difference_subspace_analytic(c1, c2)
        assert res.basis.shape[1] == 0
        assert res.principal_basis.shape[1] == 0

    def test_matches_geometric_construction(self):
        rng = np.random.default_rng(26)
        c1 = gfda.fit_class(rng.standard_normal((2, 6)), label="a")
        c2 = gfda.fit_class(rng.standard_normal((2, 6)), label="b")
        geo = gfda.difference_subspace_geometric(c1, c2)
        ana = gfda.difference_subspace_analytic(c1, c2)
        cos = linalg.canonical_angles(geo, ana.basis).cosines
        assert cos.min() >= 1 - 1e-8

    def test_sum_space_direct_sum(self):
        rng = np.random.default_rng(27)
        c1 = gfda.fit_class(rng.standard_normal((3, 9)), label="a")
        c2 = gfda.fit_class(rng.standard_normal((2, 9)), label="b")
        # the unpaired direction of the larger subspace sits exactly at
        # eigenvalue 1 and is excluded with a warning
        with pytest.warns(RuntimeWarning):
            res = gfda.difference_subspace_analytic(c1, c2)
        assert res.basis.shape[1] == c2.dim
        assert res.principal_basis.shape[1] == c2.dim
        cross = res.basis.T @ res.principal_basis
        assert np.max(np.abs(cross)) <= 1e-10


class TestGds:
    def test_two_class_reduces_to_difference_subspace(self):
        ens = gfda.subspace_config(2, 1, 6, seed=31)
        model = gfda.gds(ens, dims=1)
        ds = gfda.difference_subspace_analytic(*ens.classes)
        cos = linalg.canonical_angles(model.basis, ds.basis).cosines
        assert cos.min() >= 1 - 1e-8

    def test_orthogonal_classes_degenerate_but_deterministic(self):
        classes = tuple(line_model(i, np.eye(4)[i]) for i in range(3))
        ens = gfda.SubspaceEnsemble(classes, ambient_dim=4)
        m1 = gfda.gds(ens, dims=2)
        m2 = gfda.gds(ens, dims=2)
        npt.assert_allclose(m1.eigenvalues, [1.0, 1.0], atol=1e-12)
        npt.assert_array_equal(m1.basis, m2.basis)

    def test_dims_beyond_rank_rejected(self):
        ens = gfda.subspace_config(2, 1, 6, seed=32)
        with pytest.raises(ValidationError):
            gfda.gds(ens, dims=3)  # rank of G is 2

    def test_exactly_one_rule(self):
        ens = gfda.subspace_config(2, 1, 6, seed=33)
        with pytest.raises(ValidationError):
            gfda.gds(ens)
        with pytest.raises(ValidationError):
            gfda.gds(ens, dims=1, gamma=0.9)

    def test_power_rule_reaches_threshold(self):
        ens = gfda.subspace_config(5, 3, 40, seed=34)
        model = gfda.gds(ens, gamma=0.90)
        sel = model.selection
        assert sel.rule == "power"
        assert sel.beta == pytest.approx(5 * 4 * 0.90)
        assert sel.achieved_power >= sel.beta - 1e-9
        assert model.basis.shape[1] == sel.dims

    def test_power_rule_unreachable_for_identical_classes(self):
        d = np.array([1.0, 0.0, 0.0])
        classes = (line_model("a", d), line_model("b", d))
        ens = gfda.SubspaceEnsemble(classes, ambient_dim=3)
        with pytest.raises(ValidationError):
            gfda.gds(ens, gamma=0.9)

    def test_basis_vectors_are_eigenvectors(self):
        ens = gfda.subspace_config(4, 2, 20, seed=35)
        model = gfda.gds(ens, dims=3)
        G = gfda.sum_matrix(ens)
        for j in range(3):
            r = G @ model.basis[:, j] - model.eigenvalues[j] * model.basis[:, j]
            assert np.linalg.norm(r) <= 1e-8


class TestSumMatrixInvariants:
    @pytest.mark.parametrize("seed", range(5))
    def test_psd_spectrum_and_trace(self, seed):
        rng = np.random.default_rng(seed)
        C = int(rng.integers(2, 6))
        N = int(rng.integers(1, 4))
        ens = gfda.subspace_config(C, N, 4 * C * N, seed=100 + seed)
        G = gfda.sum_matrix(ens)
        vals = np.linalg.eigvalsh(G)
        assert vals.min() >= -1e-10
        assert vals.max() <= C + 1e-10
        npt.assert_allclose(np.trace(G), sum(c.dim for c in ens.classes),
                            atol=1e-10)

    def test_two_class_gds_equals_difference_subspace_span(self):
        for seed in range(10):
            ens = gfda.subspace_config(2, 2, 10, seed=200 + seed)
            model = gfda.gds(ens, dims=2)
            ds = gfda.difference_subspace_analytic(*ens.classes)
            cos = linalg.canonical_angles(model.basis, ds.basis).cosines
            assert cos.min() >= 1 - 1e-8


class TestGdsDecomposition:
    def test_two_class_direct_expansion(self):
        c1, c2 = sixty_degree_pair()
        ens = gfda.SubspaceEnsemble((c1, c2), ambient_dim=2)
        term_b, w5 = gfda.gds_decomposition(ens)
        p1, p2 = c1.basis[:, 0], c2.basis[:, 0]
        z = p1 - p2
        zp = p1 + p2
        npt.assert_allclose(term_b, 0.5 * np.outer(z, z), atol=1e-12)
        npt.assert_allclose(w5, 0.5 * np.outer(zp, zp), atol=1e-12)
        G = gfda.sum_matrix(ens)
        npt.assert_allclose(term_b + w5, G, atol=1e-12)

    def test_pair_identity(self):
        # z z^T + z' z'^T = 2 (u u^T + v v^T) for any unit pair
        rng = np.random.default_rng(41)
        u = rng.standard_normal(7)
        u /= np.linalg.norm(u)
        v = rng.standard_normal(7)
        v /= np.linalg.norm(v)
        z, zp = u - v, u + v
        lhs = np.outer(z, z) + np.outer(zp, zp)
        npt.assert_allclose(lhs, 2 * (np.outer(u, u) + np.outer(v, v)),
                            atol=1e-12)

    def test_reconstruction_small(self):
        ens = gfda.subspace_config(3, 2, 18, seed=42)
        term_b, w5 = gfda.gds_decomposition(ens)
        G = gfda.sum_matrix(ens)
        assert np.max(np.abs(term_b + w5 - G)) <= 1e-10 * np.linalg.norm(G)

    @pytest.mark.parametrize("C", range(2, 9))
    @pytest.mark.parametrize("N", range(1, 5))
    def test_reconstruction_sweep(self, C, N):
        ens = gfda.subspace_config(C, N, 3 * C * N, seed=77 + C * 10 + N)
        term_b, w5 = gfda.gds_decomposition(ens)
        G = gfda.sum_matrix(ens)
        assert np.max(np.abs(term_b + w5 - G)) <= 1e-10 * np.linalg.norm(G)

    def test_unequal_dims_rejected(self):
        rng = np.random.default_rng(43)
        c1 = gfda.fit_class(rng.standard_normal((2, 8)), label="a")
        c2 = gfda.fit_class(rng.standard_normal((3, 8)), label="b")
        ens = gfda.SubspaceEnsemble((c1, c2), ambient_dim=8)
        with pytest.raises(ValidationError):
            gfda.gds_decomposition(ens)


class TestModelValidation:
    def test_one_class_rejected(self):
        with pytest.raises(ValidationError):
            gfda.SubspaceEnsemble((line_model("a", [1.0, 0.0]),), 2)

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValidationError):
            gfda.SubspaceEnsemble(
                (line_model("a", [1.0, 0.0]), line_model("a", [0.0, 1.0])), 2)

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            gfda.SubspaceEnsemble(
                (line_model("a", [1.0, 0.0]), line_model("b", [0.0, 1.0, 0.0])), 2)

    def test_non_orthonormal_basis_rejected(self):
        with pytest.raises(ValidationError):
            gfda.ClassModel("a", np.array([[1.0], [1.0]]),
                            np.array([1.0]), np.zeros(2), 1)
