"""Class-subspace fitting and difference-subspace constructions.

A class subspace is the span of the leading eigenvectors of the class
autocorrelation matrix R_c = (1/n_c) sum_i x_i x_i^T, i.e. PCA *without*
mean subtraction.  Because no centering is applied, the first basis vector
of a class tracks the direction of its sample mean whenever the mean
dominates the spread, which is what the whole discriminant construction
in :mod:`gfda.fisher` leans on.
"""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg
from .errors import DegeneratePairError, ValidationError

OVERLAP_TOL = 1e-8


@dataclass(frozen=True)
class ClassModel:
    """Uncentered-PCA model of one class.

    basis : (L, N_c) orthonormal columns, eigenvalue order (largest first)
    eigenvalues : (N_c,) nonincreasing eigenvalues of the autocorrelation
        matrix, one per basis column
    mean : (L,) sample mean
    count : number of samples the model was fitted from
    """

    label: object
    basis: np.ndarray
    eigenvalues: np.ndarray
    mean: np.ndarray
    count: int

    def __post_init__(self):
        linalg.as_ortho_basis(self.basis, f"class {self.label!r} basis")
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.ndim != 1 or ev.size != self.basis.shape[1]:
            raise ValidationError("eigenvalues must align with basis columns")
        if np.any(np.diff(ev) > 1e-12 * max(abs(ev[0]), 1.0) if ev.size else False):
            raise ValidationError("eigenvalues must be nonincreasing")
        if self.dim > min(self.count, self.ambient_dim):
            raise ValidationError(
                f"class {self.label!r}: {self.dim} basis vectors exceed "
                f"min(count={self.count}, L={self.ambient_dim})")

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class SubspaceEnsemble:
    """The C class models entering a discriminant construction."""

    classes: tuple
    ambient_dim: int

    def __post_init__(self):
        if len(self.classes) < 2:
            raise ValidationError("an ensemble needs at least 2 classes")
        labels = [c.label for c in self.classes]
        if len(set(labels)) != len(labels):
            raise ValidationError("class labels must be unique")
        for c in self.classes:
            if c.ambient_dim != self.ambient_dim:
                raise ValidationError(
                    f"class {c.label!r} lives in dimension {c.ambient_dim}, "
                    f"ensemble expects {self.ambient_dim}")

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def labels(self):
        return tuple(c.label for c in self.classes)


def fit_class(samples, label=None, dim: Optional[int] = None,
              energy: Optional[float] = None) -> ClassModel:
    """Fit a class subspace by uncentered PCA.

    Parameters
    ----------
    samples : (n, L) array, one sample per row.
    dim : keep exactly this many leading eigenvectors (must not exceed
        min(n, L) nor the numerical rank).
    energy : keep the smallest number of eigenvectors whose cumulative
        eigenvalue share reaches this fraction.

    With neither rule given, the full numerically nonzero spectrum is kept.
    When n < L the eigenvectors are computed from the n x n Gram matrix of
    the samples and lifted, which avoids forming the L x L autocorrelation
    matrix; the result is identical to the direct route.
    """
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValidationError("fit_class needs at least one sample")
    n, L = X.shape
    if dim is not None and energy is not None:
        raise ValidationError("give either dim or energy, not both")
    if dim is not None and not (1 <= dim <= min(n, L)):
        raise ValidationError(f"dim must be in [1, min(n={n}, L={L})]")
    if not np.any(X):
        raise ValidationError("all samples are zero vectors")

    if n < L:
        gram = (X @ X.T) / n
        vals, vecs = np.linalg.eigh(gram)
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
        keep = vals > linalg.RANK_TOL * vals[0]
        vals, vecs = vals[keep], vecs[:, keep]
        basis = (X.T @ vecs) / np.sqrt(n * vals)
        # lifting amplifies rounding noise for the smallest eigenvalues;
        # a QR pass restores exact orthonormality without reordering
        Q, R = np.linalg.qr(basis)
        basis = Q * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))
    else:
        R = (X.T @ X) / n
        eig = linalg.sym_eig(R)
        vals = eig.values[::-1]
        basis = eig.vectors[:, ::-1]
        keep = vals > linalg.RANK_TOL * vals[0]
        vals, basis = vals[keep], basis[:, keep]
    basis = linalg.fix_signs(basis)

    if dim is not None:
        if dim > vals.size:
            raise ValidationError(
                f"requested {dim} components but numerical rank is {vals.size}")
        vals, basis = vals[:dim], basis[:, :dim]
    elif energy is not None:
        if not (0.0 < energy <= 1.0):
            raise ValidationError("energy threshold must be in (0, 1]")
        share = np.cumsum(vals) / np.sum(vals)
        k = int(np.searchsorted(share, energy - 1e-15) + 1)
        k = min(k, vals.size)
        vals, basis = vals[:k], basis[:, :k]

    return ClassModel(label=label, basis=basis, eigenvalues=vals,
                      mean=X.mean(axis=0), count=n)


def fit_ensemble(X, labels, dim=None, energy=None) -> SubspaceEnsemble:
    """Fit one ClassModel per distinct label (sorted) and bundle them."""
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    classes = []
    for label in sorted(set(labels.tolist())):
        classes.append(fit_class(X[labels == label], label=label,
                                 dim=dim, energy=energy))
    return SubspaceEnsemble(classes=tuple(classes), ambient_dim=X.shape[1])


def projection_matrix(model: ClassModel) -> np.ndarray:
    """Orthogonal projection matrix P = Phi Phi^T of the class subspace."""
    return model.basis @ model.basis.T


def sum_matrix(ensemble: SubspaceEnsemble) -> np.ndarray:
    """Sum of the class projection matrices, G = sum_c P_c."""
    G = np.zeros((ensemble.ambient_dim, ensemble.ambient_dim))
    for c in ensemble.classes:
        G += projection_matrix(c)
    return G


def aligned_first_vectors(ensemble: SubspaceEnsemble) -> np.ndarray:
    """First basis vector of each class under the package sign convention.

    Returns a (C, L) array of working copies, each oriented toward its own
    class mean (a zero inner product keeps the fitted sign).  This is the
    orientation the mean/first-component correspondence refers to, and it
    makes the pairwise inner products of the working copies positive
    whenever the class means are positively correlated, the image-data
    regime in which the pairwise-positive convention is stated.  Any
    per-class orientation leaves the criterion spectrum and all
    decomposition identities untouched; it decides which representative of
    each difference vector enters the between matrix, and the class mean is
    the only meaningful reference for that choice.
    """
    out = []
    for c in ensemble.classes:
        v = c.basis[:, 0].copy()
        if v @ c.mean < 0:
            v = -v
        out.append(v)
    return np.array(out)


def difference_subspace_geometric(c1: ClassModel, c2: ClassModel,
                                  tol=OVERLAP_TOL) -> np.ndarray:
    """Difference subspace from normalized canonical-vector differences.

    For canonical pairs (u_i, v_i) of the two class subspaces the basis
    vectors are d_i = (v_i - u_i) / ||v_i - u_i||; they come out mutually
    orthogonal.  Requires dim(c1) >= dim(c2) and no identical canonical pair.
    """
    if c1.dim < c2.dim:
        raise ValidationError(
            "first argument must have the larger (or equal) dimension")
    angles = linalg.canonical_angles(c1.basis, c2.basis)
    high = np.nonzero(angles.cosines >= 1.0 - tol)[0]
    if high.size:
        raise DegeneratePairError(
            f"canonical pair {high[0]} has cosine "
            f"{angles.cosines[high[0]]:.12f}; the subspaces overlap",
            index=int(high[0]))
    diffs = angles.right - angles.left
    return diffs / np.linalg.norm(diffs, axis=0)


@dataclass(frozen=True)
class DifferenceSubspace:
    """Analytic difference subspace of two class subspaces.

    basis : eigenvectors of P1 + P2 with eigenvalue in (0, 1), ascending
    principal_basis : eigenvectors with eigenvalue in (1, 2), ascending
    eigenvalues : the full nonzero spectrum of P1 + P2, ascending
    """

    basis: np.ndarray
    principal_basis: np.ndarray
    eigenvalues: np.ndarray


def difference_subspace_analytic(c1: ClassModel, c2: ClassModel,
                                 tol=OVERLAP_TOL) -> DifferenceSubspace:
    """Difference subspace as the sub-unit eigenvectors of P1 + P2.

    Eigenvalues above 1 span the principal component subspace, eigenvalues
    below 1 the difference subspace; together they decompose the sum
    subspace.  An eigenvalue within tol of 2 means the subspaces share a
    direction (degenerate); eigenvalues within tol of exactly 1 belong to
    neither side and are excluded with a warning.
    """
    P = projection_matrix(c1) + projection_matrix(c2)
    eig = linalg.sym_eig(P)
    vals, vecs = eig.values, eig.vectors

    nonzero = vals > linalg.RANK_TOL * vals[-1]
    vals, vecs = vals[nonzero], vecs[:, nonzero]

    if vals.size == 0 or np.any(vals >= 2.0 - tol):
        hit = int(np.argmax(vals)) if vals.size else 0
        raise DegeneratePairError(
            "subspaces overlap: P1 + P2 has an eigenvalue at 2 "
            f"(index {hit})", index=hit)

    near_one = np.abs(vals - 1.0) <= tol
    if np.any(near_one):
        warnings.warn(
            f"{int(near_one.sum())} eigenvalue(s) of P1 + P2 within {tol} of "
            "exactly 1 excluded from both the difference and principal sides",
            RuntimeWarning, stacklevel=2)
    lower = vals < 1.0 - tol
    upper = vals > 1.0 + tol
    return DifferenceSubspace(
        basis=vecs[:, lower],
        principal_basis=vecs[:, upper],
        eigenvalues=vals,
    )


@dataclass(frozen=True)
class GdsSelection:
    """How the GDS dimension was chosen."""

    rule: str  # "fixed" or "power"
    dims: int
    gamma: Optional[float] = None
    beta: Optional[float] = None
    achieved_power: Optional[float] = None


@dataclass(frozen=True)
class GdsModel:
    """Generalized difference subspace of an ensemble.

    basis : (L, N_d) eigenvectors of G for the N_d smallest nonzero
        eigenvalues
    eigenvalues : the corresponding eigenvalues, ascending
    selection : record of the dimension rule
    """

    basis: np.ndarray
    eigenvalues: np.ndarray
    selection: GdsSelection


def gds(ensemble: SubspaceEnsemble, dims: Optional[int] = None,
        gamma: Optional[float] = None) -> GdsModel:
    """Generalized difference subspace of C class subspaces.

    Eigendecomposes G = sum_c P_c and keeps eigenvectors of the smallest
    eigenvalues *within the sum subspace* (eigenvalue > 0); directions
    orthogonal to every class subspace carry no information and are never
    selected.

    Exactly one rule must be given: ``dims`` fixes N_d, while ``gamma``
    grows N_d until the cumulative discriminant power of the selected
    eigenvectors reaches beta = C (C - 1) * gamma.  Fully degenerate
    spectra (e.g. mutually orthogonal classes) are resolved by the
    deterministic eigenvector order of sym_eig; any basis of the tied
    eigenspace is equally valid.
    """
    if (dims is None) == (gamma is None):
        raise ValidationError("give exactly one of dims or gamma")
    G = sum_matrix(ensemble)
    eig = linalg.sym_eig(G)
    keep = eig.values > linalg.RANK_TOL * eig.values[-1]
    vals, vecs = eig.values[keep], eig.vectors[:, keep]

    if dims is not None:
        if not (1 <= dims <= vals.size):
            raise ValidationError(
                f"GDS dimension {dims} outside the rank of G ({vals.size})")
        sel = GdsSelection(rule="fixed", dims=dims)
        return GdsModel(basis=vecs[:, :dims], eigenvalues=vals[:dims],
                        selection=sel)

    if not (0.0 < gamma <= 1.0):
        raise ValidationError("gamma must be in (0, 1]")
    from .fisher import discriminant_power_curve, scatter_ladder

    pair = scatter_ladder(ensemble, "gFDA")
    C = ensemble.n_classes
    beta = C * (C - 1) * gamma
    powers = discriminant_power_curve(vecs, pair)
    cumulative = np.cumsum(powers)
    reached = np.nonzero(cumulative >= beta - 1e-9)[0]
    if reached.size == 0:
        raise ValidationError(
            f"cumulative discriminant power {cumulative[-1]:.6f} never "
            f"reaches beta = {beta:.6f}; the class subspaces overlap too much")
    n_d = int(reached[0]) + 1
    sel = GdsSelection(rule="power", dims=n_d, gamma=gamma, beta=beta,
                       achieved_power=float(cumulative[n_d - 1]))
    return GdsModel(basis=vecs[:, :n_d], eigenvalues=vals[:n_d], selection=sel)


def gds_decomposition(ensemble: SubspaceEnsemble):
    """Split G into its between-difference and residual parts.

    For C classes of equal subspace dimension N, with z = phi_1^j - phi_1^k
    and z' = phi_1^j + phi_1^k taken over sign-aligned first basis vectors,

        G = (1 / (2 (C - 1))) * B + W5

    where B is the pairwise-difference matrix over the first basis vectors
    and W5 collects the z' terms plus all higher basis directions.  Returns
    the two summands (the first already carries its coefficient).
    """
    dims = {c.dim for c in ensemble.classes}
    if len(dims) != 1:
        raise ValidationError(
            f"classes must share one subspace dimension, got {sorted(dims)}")
    C = ensemble.n_classes
    L = ensemble.ambient_dim
    firsts = aligned_first_vectors(ensemble)

    B = np.zeros((L, L))
    W5 = np.zeros((L, L))
    coef = 1.0 / (2.0 * (C - 1))
    for j in range(C):
        for k in range(j + 1, C):
            z = firsts[j] - firsts[k]
            zp = firsts[j] + firsts[k]
            B += np.outer(z, z)
            W5 += coef * np.outer(zp, zp)
    for c in ensemble.classes:
        rest = c.basis[:, 1:]
        W5 += rest @ rest.T
    return coef * B, W5
