"""Scatter matrices, the Fisher criterion, and the discriminant family.

The module covers three layers:

* plain scatter matrices and the simplification ladder that rewrites them
  in terms of per-class subspace models (rungs FDA -> aFDA -> sFDA -> gFDA);
* the discriminant constructions themselves: classical FDA plus its three
  small-sample workarounds (pcaLDA, regLDA, nullLDA), the geometrical
  variant in both of its equivalent forms, and the generalized-difference-
  subspace projection;
* the analysis quantities connecting the last two (per-vector discriminant
  power and the gap index).

The geometrical criterion maximizes f(d) = (d^T B d) / (d^T W d) where B is
the pairwise-difference matrix of the classes' first basis vectors and W is
the sum of the class projection matrices.  Its maximizers can be found
either by whitening W and diagonalizing the transformed B (the "product"
route, a generalized eigenproblem) or as the null space of W - B/C (the
"linear" route, an ordinary symmetric eigenproblem that stays solvable with
any number of samples).  Both spans coincide.
"""

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg

from . import linalg
from .errors import (NotApplicableError, OverlapError, UndefinedDirectionError,
                     ValidationError)
from .subspace import (SubspaceEnsemble, aligned_first_vectors, gds,
                       sum_matrix)

LADDER_RUNGS = ("FDA", "aFDA", "sFDA", "gFDA")


@dataclass(frozen=True)
class ScatterPair:
    """A (between, within) matrix pair at one rung of the ladder."""

    between: np.ndarray
    within: np.ndarray
    rung: str

    def __post_init__(self):
        linalg.as_sym_matrix(self.between, "between")
        linalg.as_sym_matrix(self.within, "within")
        if self.between.shape != self.within.shape:
            raise ValidationError("between/within orders differ")
        if self.rung not in LADDER_RUNGS:
            raise ValidationError(f"unknown rung {self.rung!r}")


@dataclass(frozen=True)
class DiscriminantModel:
    """An orthonormal discriminant basis plus what is needed to classify.

    basis : (d, k) orthonormal columns in the model's working coordinates
    whitening_map : optional (d, L) map applied to raw vectors before
        projection; None means the working coordinates are the data space
    class_refs : (C, k) reference point of each class in discriminant
        coordinates, rows aligned with class_labels
    normalized : when True, classification normalizes projections and
        references to unit length (the "+N" variants)
    """

    basis: np.ndarray
    method: str
    class_labels: tuple
    class_refs: np.ndarray
    whitening_map: Optional[np.ndarray] = None
    normalized: bool = False
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        linalg.as_ortho_basis(self.basis, "discriminant basis")
        if self.class_refs.shape != (len(self.class_labels), self.basis.shape[1]):
            raise ValidationError("class_refs shape does not match labels/basis")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def effective_basis(self) -> np.ndarray:
        """Orthonormal basis, in data space, of the subspace the model
        actually projects onto (whitening folded in)."""
        if self.whitening_map is None:
            return self.basis
        return linalg.gram_schmidt(self.whitening_map.T @ self.basis)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "basis": self.basis.tolist(),
            "class_labels": list(self.class_labels),
            "class_refs": self.class_refs.tolist(),
            "whitening_map": None if self.whitening_map is None
            else self.whitening_map.tolist(),
            "normalized": self.normalized,
            "info": self.info,
        }

    @staticmethod
    def from_dict(d: dict) -> "DiscriminantModel":
        wm = d.get("whitening_map")
        return DiscriminantModel(
            basis=np.asarray(d["basis"], dtype=float),
            method=d["method"],
            class_labels=tuple(d["class_labels"]),
            class_refs=np.asarray(d["class_refs"], dtype=float),
            whitening_map=None if wm is None else np.asarray(wm, dtype=float),
            normalized=bool(d.get("normalized", False)),
            info=dict(d.get("info", {})),
        )


def with_normalization(model: DiscriminantModel,
                       normalized: bool = True) -> DiscriminantModel:
    """Return the same model with the projection-normalization switch set."""
    if normalized == model.normalized:
        return model
    method = model.method + "+N" if normalized else model.method.removesuffix("+N")
    return replace(model, normalized=normalized, method=method)


# ---------------------------------------------------------------------------
# scatter matrices
# ---------------------------------------------------------------------------

def group_by_label(X, y):
    """Split rows of X by label; returns (sorted labels, list of groups)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    labels = sorted(set(y.tolist()))
    return labels, [X[y == label] for label in labels]


def within_scatter(groups) -> np.ndarray:
    """Pooled within-class covariance (1/n) sum_c sum_i (x - m_c)(x - m_c)^T."""
    groups = [np.asarray(g, dtype=float) for g in groups]
    if any(g.shape[0] == 0 for g in groups):
        raise ValidationError("every class needs at least one sample")
    n = sum(g.shape[0] for g in groups)
    L = groups[0].shape[1]
    S = np.zeros((L, L))
    for g in groups:
        d = g - g.mean(axis=0)
        S += d.T @ d
    return S / n


def between_scatter(means, counts) -> np.ndarray:
    """Between-class covariance around the global mean,
    (1/n) sum_c n_c (m_c - m)(m_c - m)^T."""
    means = np.asarray(means, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if means.shape[0] < 2:
        raise ValidationError("need at least 2 classes")
    n = counts.sum()
    m = counts @ means / n
    d = means - m
    return (d.T * counts) @ d / n


def between_scatter_pairwise(means, counts) -> np.ndarray:
    """The same matrix written as a weighted sum over class pairs,
    (1/n^2) sum_{i<j} n_i n_j (m_i - m_j)(m_i - m_j)^T."""
    means = np.asarray(means, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if means.shape[0] < 2:
        raise ValidationError("need at least 2 classes")
    n = counts.sum()
    C, L = means.shape
    S = np.zeros((L, L))
    for i in range(C):
        for j in range(i + 1, C):
            d = means[i] - means[j]
            S += counts[i] * counts[j] * np.outer(d, d)
    return S / n**2


def pairwise_difference_matrix(firsts) -> np.ndarray:
    """sum_{i<j} (v_i - v_j)(v_i - v_j)^T over the rows of ``firsts``."""
    firsts = np.asarray(firsts, dtype=float)
    C, L = firsts.shape
    S = np.zeros((L, L))
    for i in range(C):
        for j in range(i + 1, C):
            d = firsts[i] - firsts[j]
            S += np.outer(d, d)
    return S


def scatter_ladder(ensemble: SubspaceEnsemble, rung: str) -> ScatterPair:
    """Build the (between, within) pair of one simplification rung.

    FDA   : exact covariances reconstructed from the class models via
            R_c = sum_i lambda_i phi_i phi_i^T (exact when the models keep
            their full spectrum).
    aFDA  : the mean of each class replaced by its norm times the first
            basis vector; within-class spectrum reweighted so the first
            direction carries lambda_1 - ||m_c||^2.
    sFDA  : additionally assumes a common mean norm, which factors out of
            the between matrix.
    gFDA  : every per-class variance assumed equal; the constant factor is
            dropped, leaving the pairwise-difference matrix against the sum
            of the class projections.

    The aFDA/sFDA within matrices are formed over each model's stored
    spectrum, so the aFDA rung equals the cited full-spectrum expression
    when the models were fitted without truncation.
    """
    if rung not in LADDER_RUNGS:
        raise ValidationError(f"unknown rung {rung!r}; pick one of {LADDER_RUNGS}")
    C = ensemble.n_classes
    L = ensemble.ambient_dim
    counts = np.array([c.count for c in ensemble.classes], dtype=float)
    means = np.array([c.mean for c in ensemble.classes])
    n = counts.sum()

    if rung == "FDA":
        within = np.zeros((L, L))
        for c in ensemble.classes:
            R = (c.basis * c.eigenvalues) @ c.basis.T
            within += c.count * (R - np.outer(c.mean, c.mean))
        within /= n
        return ScatterPair(between=between_scatter(means, counts),
                           within=within, rung=rung)

    if rung == "gFDA":
        firsts = aligned_first_vectors(ensemble)
        return ScatterPair(between=pairwise_difference_matrix(firsts),
                           within=sum_matrix(ensemble), rung=rung)

    # aFDA / sFDA share the reweighted within-class matrix.
    if np.ptp(counts) > 0:
        warnings.warn(
            "class sample counts are unequal; the ladder assumes a common "
            "count and uses their average", RuntimeWarning, stacklevel=2)
    within = np.zeros((L, L))
    for c in ensemble.classes:
        sig = c.eigenvalues.copy()
        mc2 = float(c.mean @ c.mean)
        if sig[0] < mc2:
            warnings.warn(
                f"class {c.label!r}: lambda_1 < ||mean||^2 "
                f"({sig[0]:.3e} < {mc2:.3e}); variance clamped to 0",
                RuntimeWarning, stacklevel=2)
        sig[0] = max(sig[0] - mc2, 0.0)
        within += (c.basis * sig) @ c.basis.T
    within /= C

    firsts = aligned_first_vectors(ensemble)
    norms = np.linalg.norm(means, axis=1)
    if rung == "aFDA":
        between = pairwise_difference_matrix(firsts * norms[:, None]) / C**2
    else:  # sFDA
        if np.ptp(norms) > 1e-8 * max(norms.max(), 1.0):
            warnings.warn(
                "class mean norms are unequal; sFDA assumes a common norm "
                "and uses their average", RuntimeWarning, stacklevel=2)
        m_bar = norms.mean()
        between = (m_bar / C) ** 2 * pairwise_difference_matrix(firsts)
    return ScatterPair(between=between, within=within, rung=rung)


def fisher_criterion(d, pair: ScatterPair, tol=1e-12) -> float:
    """Generalized Rayleigh quotient (d^T B d) / (d^T W d).

    Scale-invariant in d.  Raises UndefinedDirectionError when d carries no
    within-class energy, i.e. the ratio is meaningless.
    """
    d = np.asarray(d, dtype=float).ravel()
    den = float(d @ pair.within @ d)
    scale = float(d @ d) * max(np.linalg.norm(pair.within), 1.0)
    if den <= tol * scale:
        raise UndefinedDirectionError(
            "direction has (numerically) zero within-class energy")
    return float(d @ pair.between @ d) / den


def discriminant_power_curve(basis, pair: ScatterPair) -> np.ndarray:
    """Fisher-like power of each basis column under the given pair."""
    basis = np.asarray(basis, dtype=float)
    return np.array([fisher_criterion(basis[:, j], pair)
                     for j in range(basis.shape[1])])


def gap_index(C: int) -> float:
    """Relative weight gap 2 (1 - 1/C) between the geometrical criterion and
    plain difference-subspace projection; 1.0 at C = 2, toward 2.0 as C grows."""
    if C < 2:
        raise ValidationError("gap index needs C >= 2")
    return 2.0 * (1.0 - 1.0 / C)


# ---------------------------------------------------------------------------
# geometrical discriminant analysis
# ---------------------------------------------------------------------------

def gfda_product_form(ensemble: SubspaceEnsemble,
                      normalized: bool = False) -> DiscriminantModel:
    """Geometrical discriminant space via whitening followed by PCA.

    Steps: reduce to the pooled span of all class basis vectors (exact when
    they are linearly independent), whiten the summed projection matrix so
    all basis vectors become mutually orthonormal, then diagonalize the
    pairwise-difference matrix of the whitened first basis vectors and keep
    its C - 1 leading eigenvectors.  Class references are the projections
    of the whitened first basis vectors, which are pairwise orthogonal in
    the normalized space.
    """
    pooled = np.hstack([c.basis for c in ensemble.classes])
    total = pooled.shape[1]
    if total > ensemble.ambient_dim:
        raise OverlapError(
            f"{total} pooled basis vectors cannot be independent in "
            f"dimension {ensemble.ambient_dim}")
    reducer = linalg.gram_schmidt(pooled)
    if reducer.shape[1] < total:
        raise OverlapError(
            "class subspaces overlap: pooled basis vectors are dependent "
            f"(rank {reducer.shape[1]} < {total})")

    projected = reducer.T @ pooled
    sw4 = projected @ projected.T
    white = linalg.whitening(sw4)
    if white.shape[1] < sw4.shape[0]:
        raise OverlapError("within matrix singular on the reduced space")
    wmap = white.T @ reducer.T  # data space -> normalized space

    firsts = aligned_first_vectors(ensemble)
    hats = wmap @ firsts.T  # columns are the orthogonalized first vectors
    sigma_a = pairwise_difference_matrix(hats.T)
    eig = linalg.sym_eig(sigma_a)
    k = ensemble.n_classes - 1
    basis = linalg.gram_schmidt(eig.vectors[:, ::-1][:, :k])
    return DiscriminantModel(
        basis=basis,
        method="gFDA-product" + ("+N" if normalized else ""),
        class_labels=ensemble.labels,
        class_refs=(basis.T @ hats).T,
        whitening_map=wmap,
        normalized=normalized,
        info={"criterion_eigenvalues": eig.values[::-1][:k].tolist()},
    )


def _sum_subspace(ensemble: SubspaceEnsemble):
    """Orthonormal basis of the union span of all class subspaces, from the
    nonzero eigenvectors of the summed projection matrix."""
    G = sum_matrix(ensemble)
    eig = linalg.sym_eig(G)
    keep = eig.values > linalg.RANK_TOL * eig.values[-1]
    return G, eig.vectors[:, keep]


def gfda_linear_form(ensemble: SubspaceEnsemble,
                     normalized: bool = False,
                     zero_tol: float = 1e-8) -> DiscriminantModel:
    """Geometrical discriminant space as the null space of W - B/C.

    Solvable for any sample count (the matrix is a plain linear combination,
    never inverted), which is what lets the method run with a single sample
    per class.  The eigenproblem is restricted to the union span of the
    class subspaces; directions orthogonal to every class are null for both
    matrices and carry no discriminant information.  Selection is by index
    (the C - 1 smallest eigenvalues); when some selected eigenvalue is not
    near zero the class subspaces overlap and a diagnostic warning reports
    the largest one.
    """
    C = ensemble.n_classes
    firsts = aligned_first_vectors(ensemble)
    G, span = _sum_subspace(ensemble)
    ghat = G - pairwise_difference_matrix(firsts) / C

    if span.shape[1] < C - 1:
        raise ValidationError(
            f"union span of the class subspaces has rank {span.shape[1]}, "
            f"cannot hold a {C - 1}-dimensional discriminant space")
    restricted = span.T @ ghat @ span
    eig = linalg.sym_eig(restricted)
    k = C - 1
    selected = eig.values[:k]
    top = max(abs(eig.values[-1]), 1.0)
    if selected[-1] > zero_tol * top:
        warnings.warn(
            f"only {int(np.sum(selected <= zero_tol * top))} of {k} selected "
            f"eigenvalues are near zero (max selected {selected[-1]:.3e}); "
            "class subspaces overlap or are degenerate",
            RuntimeWarning, stacklevel=2)
    basis = span @ eig.vectors[:, :k]
    return DiscriminantModel(
        basis=basis,
        method="gFDA-linear" + ("+N" if normalized else ""),
        class_labels=ensemble.labels,
        class_refs=firsts @ basis,
        whitening_map=None,
        normalized=normalized,
        info={"selected_eigenvalues": selected.tolist()},
    )


def gds_discriminant(ensemble: SubspaceEnsemble, dims=None, gamma=None,
                     normalized: bool = False) -> DiscriminantModel:
    """Difference-subspace projection packaged for classification.

    The basis is the generalized difference subspace (smallest nonzero
    eigenvectors of the summed projection matrix); class references are the
    projected, sign-aligned first basis vectors.
    """
    model = gds(ensemble, dims=dims, gamma=gamma)
    firsts = aligned_first_vectors(ensemble)
    return DiscriminantModel(
        basis=model.basis,
        method="GDS" + ("+N" if normalized else ""),
        class_labels=ensemble.labels,
        class_refs=firsts @ model.basis,
        whitening_map=None,
        normalized=normalized,
        info={
            "eigenvalues": model.eigenvalues.tolist(),
            "selection": {
                "rule": model.selection.rule,
                "dims": model.selection.dims,
                "gamma": model.selection.gamma,
                "beta": model.selection.beta,
                "achieved_power": model.selection.achieved_power,
            },
        },
    )


# ---------------------------------------------------------------------------
# classical FDA and its small-sample workarounds
# ---------------------------------------------------------------------------

def _top_generalized_directions(between, within, k):
    """Eigenvectors of the k largest generalized eigenvalues of
    (between, within); within must be positive definite."""
    vals = np.linalg.eigvalsh(within)
    if vals[0] <= linalg.RANK_TOL * max(vals[-1], 0.0):
        raise ValidationError(
            "within-class scatter is singular; plain FDA does not apply "
            "(small-sample regime)")
    w, V = scipy.linalg.eigh(between, within)
    return V[:, ::-1][:, :k], w[::-1][:k]


def _baseline_model(X, y, directions, method, normalized, info=None):
    labels, groups = group_by_label(X, y)
    basis = linalg.gram_schmidt(directions)
    refs = np.array([basis.T @ g.mean(axis=0) for g in groups])
    return DiscriminantModel(
        basis=basis,
        method=method + ("+N" if normalized else ""),
        class_labels=tuple(labels),
        class_refs=refs,
        whitening_map=None,
        normalized=normalized,
        info=info or {},
    )


def fda(X, y, normalized: bool = False) -> DiscriminantModel:
    """Classical Fisher discriminant analysis (requires nonsingular
    within-class scatter)."""
    labels, groups = group_by_label(X, y)
    means = np.array([g.mean(axis=0) for g in groups])
    counts = np.array([g.shape[0] for g in groups])
    Sb = between_scatter(means, counts)
    Sw = within_scatter(groups)
    D, vals = _top_generalized_directions(Sb, Sw, len(labels) - 1)
    return _baseline_model(X, y, D, "FDA", normalized,
                           info={"eigenvalues": vals.tolist()})


def reg_lda(X, y, delta: float = 1e-4,
            normalized: bool = False) -> DiscriminantModel:
    """FDA with a ridge term added to the within-class scatter.

    delta defaults to 1e-4, the value used throughout the evaluation
    protocol.
    """
    if delta <= 0:
        raise ValidationError("delta must be positive")
    labels, groups = group_by_label(X, y)
    means = np.array([g.mean(axis=0) for g in groups])
    counts = np.array([g.shape[0] for g in groups])
    Sb = between_scatter(means, counts)
    Sw = within_scatter(groups) + delta * np.eye(Sb.shape[0])
    _, V = scipy.linalg.eigh(Sb, Sw)
    D = V[:, ::-1][:, :len(labels) - 1]
    return _baseline_model(X, y, D, "regLDA", normalized,
                           info={"delta": delta})


def pca_lda(X, y, residual_threshold: float = 1e-2,
            normalized: bool = False) -> DiscriminantModel:
    """PCA dimension reduction followed by FDA in the reduced space.

    Keeps the smallest number of centered principal components whose
    relative sum of squared residuals drops to the threshold, then runs FDA
    there.  If the reduced within-class scatter is still singular the
    reduced problem falls back to a ridge with delta = 1e-8 and the model
    is flagged (info["fallback"]).
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 2:
        raise ValidationError("pcaLDA needs a pooled sample count >= 2")
    if residual_threshold < 0:
        raise ValidationError("residual threshold must be >= 0")
    labels, _ = group_by_label(X, y)
    centered = X - X.mean(axis=0)
    cov = centered.T @ centered / X.shape[0]
    eig = linalg.sym_eig(cov)
    vals = np.clip(eig.values[::-1], 0.0, None)
    vecs = eig.vectors[:, ::-1]
    total = vals.sum()
    if total <= 0:
        raise ValidationError("pooled data has no variance")
    residual = 1.0 - np.cumsum(vals) / total
    k = int(np.searchsorted(residual <= residual_threshold + 1e-15, True) + 1)
    k = min(max(k, 1), vals.size)
    P = vecs[:, :k]

    Z = centered @ P
    zgroups = [Z[np.asarray(y) == label] for label in labels]
    means = np.array([g.mean(axis=0) for g in zgroups])
    counts = np.array([g.shape[0] for g in zgroups])
    Sb = between_scatter(means, counts)
    Sw = within_scatter(zgroups)
    info = {"n_components": k, "residual_threshold": residual_threshold}
    try:
        D, _ = _top_generalized_directions(Sb, Sw, len(labels) - 1)
    except ValidationError:
        _, V = scipy.linalg.eigh(Sb, Sw + 1e-8 * np.eye(k))
        D = V[:, ::-1][:, :len(labels) - 1]
        info["fallback"] = "regularized reduced-space FDA (delta=1e-8)"
    return _baseline_model(X, y, P @ D, "pcaLDA", normalized, info=info)


def null_lda(X, y, normalized: bool = False) -> DiscriminantModel:
    """Discriminant directions inside the null space of the within-class
    scatter: project the between-class scatter there and diagonalize."""
    labels, groups = group_by_label(X, y)
    means = np.array([g.mean(axis=0) for g in groups])
    counts = np.array([g.shape[0] for g in groups])
    Sw = within_scatter(groups)
    eig = linalg.sym_eig(Sw)
    null_mask = eig.values <= linalg.RANK_TOL * max(eig.values[-1], 0.0)
    if not np.any(null_mask):
        raise NotApplicableError(
            "within-class scatter has no null space (sample count exceeds "
            "dimension); nullLDA does not apply")
    N = eig.vectors[:, null_mask]
    Sb_null = N.T @ between_scatter(means, counts) @ N
    eig_b = linalg.sym_eig(Sb_null)
    k = len(labels) - 1
    D = N @ eig_b.vectors[:, ::-1][:, :min(k, N.shape[1])]
    return _baseline_model(X, y, D, "nullLDA", normalized,
                           info={"null_dim": int(N.shape[1])})
