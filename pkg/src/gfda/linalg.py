"""Dense symmetric-matrix numerics used by every other module.

All routines work on plain float ndarrays: a symmetric matrix is an (n, n)
array, an orthonormal basis is an (L, k) array whose columns are the basis
vectors.  Eigenvalues are always reported in ascending order and eigenvector
signs are fixed deterministically (first nonzero component positive), so
downstream constructions are reproducible bit for bit.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Relative rank threshold shared by every rank-revealing operation.
RANK_TOL = 1e-10

# Tolerances for the structural invariants of the two array "types".
SYMMETRY_TOL = 1e-12
ORTHO_IP_TOL = 1e-10
UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class EigResult:
    """Full spectrum of a symmetric matrix.

    values : (n,) eigenvalues, ascending
    vectors : (n, n) orthonormal eigenvectors, column i paired with values[i]
    """

    values: np.ndarray
    vectors: np.ndarray


def as_sym_matrix(M, name="matrix"):
    """Validate and return M as a float symmetric matrix.

    Symmetry must hold to within SYMMETRY_TOL relative to the largest entry
    magnitude.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {M.shape}")
    scale = np.max(np.abs(M)) if M.size else 0.0
    if scale > 0 and np.max(np.abs(M - M.T)) > SYMMETRY_TOL * scale:
        raise ValidationError(f"{name} is not symmetric")
    return M


def as_ortho_basis(Q, name="basis"):
    """Validate and return Q as an (L, k) array with orthonormal columns."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim == 1:
        Q = Q[:, None]
    if Q.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional")
    if Q.shape[1] == 0:
        return Q
    gram = Q.T @ Q
    if np.max(np.abs(np.diag(gram) - 1.0)) > UNIT_NORM_TOL * 10:
        raise ValidationError(f"{name} columns are not unit vectors")
    off = gram - np.diag(np.diag(gram))
    if off.size and np.max(np.abs(off)) > ORTHO_IP_TOL:
        raise ValidationError(f"{name} columns are not mutually orthogonal")
    return Q


def fix_signs(V):
    """Flip eigenvector columns so the first nonzero component is positive.

    The sign convention makes every spectral factorization in the package
    deterministic.  Returns a copy.
    """
    V = np.array(V, dtype=float)
    for j in range(V.shape[1]):
        col = V[:, j]
        big = np.abs(col).max()
        if big == 0.0:
            continue
        nz = np.nonzero(np.abs(col) > 1e-12 * big)[0]
        if nz.size and col[nz[0]] < 0:
            V[:, j] = -col
    return V


def sym_eig(M) -> EigResult:
    """Eigendecompose a symmetric matrix.

    Returns the full spectrum in ascending order with sign-fixed orthonormal
    eigenvectors.  Raises ValidationError for non-symmetric input.
    """
    M = as_sym_matrix(M)
    values, vectors = np.linalg.eigh(M)
    return EigResult(values=values, vectors=fix_signs(vectors))


def gram_schmidt(vectors, tol=RANK_TOL):
    """Rank-revealing modified Gram-Schmidt orthonormalization.

    Parameters
    ----------
    vectors : sequence of 1-D arrays, or a 2-D array whose columns are the
        vectors to orthonormalize.
    tol : float
        A vector whose residual norm after projection falls below
        tol * (its own norm) is treated as dependent and dropped.

    Returns
    -------
    (L, r) array with orthonormal columns spanning the input span.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        cols = [np.asarray(vectors[:, j], dtype=float) for j in range(vectors.shape[1])]
    else:
        cols = [np.asarray(v, dtype=float).ravel() for v in vectors]
    if not cols:
        raise ValidationError("gram_schmidt needs at least one vector")
    dim = cols[0].size
    if any(c.size != dim for c in cols):
        raise ValidationError("gram_schmidt vectors must share the ambient dimension")

    basis = []
    for v in cols:
        norm0 = np.linalg.norm(v)
        if norm0 == 0.0:
            continue
        w = v.copy()
        for _ in range(2):  # one re-orthogonalization pass for stability
            for q in basis:
                w -= (q @ w) * q
        norm = np.linalg.norm(w)
        if norm <= tol * norm0:
            continue
        basis.append(w / norm)
    if not basis:
        raise ValidationError("gram_schmidt input has numerical rank 0")
    return np.column_stack(basis)


@dataclass(frozen=True)
class CanonicalAngles:
    """Canonical (principal) angles between two subspaces.

    cosines : min(dim U, dim V) values in [0, 1], descending
    left, right : paired canonical vectors, columns aligned with cosines;
        left[:, i] lies in U, right[:, i] in V and left[:, i].T @ right[:, i]
        equals cosines[i] (>= 0).
    """

    cosines: np.ndarray
    left: np.ndarray
    right: np.ndarray


def canonical_angles(U, V) -> CanonicalAngles:
    """Canonical angle cosines between span(U) and span(V).

    The cosines are the singular values of U.T @ V; the canonical vector
    pairs are recovered from the corresponding singular vectors.
    """
    U = as_ortho_basis(U, "U")
    V = as_ortho_basis(V, "V")
    if U.shape[0] != V.shape[0]:
        raise ValidationError(
            f"ambient dimensions differ: {U.shape[0]} vs {V.shape[0]}")
    W, s, Zt = np.linalg.svd(U.T @ V)
    k = s.size  # = min(dim U, dim V)
    W = W[:, :k]
    Z = Zt.T[:, :k]
    # Fix the joint sign of each pair deterministically; flipping both
    # members leaves the inner product (the cosine) unchanged.
    for i in range(k):
        col = W[:, i]
        big = np.abs(col).max()
        if big == 0.0:
            continue
        nz = np.nonzero(np.abs(col) > 1e-12 * big)[0]
        if nz.size and col[nz[0]] < 0:
            W[:, i] = -col
            Z[:, i] = -Z[:, i]
    return CanonicalAngles(
        cosines=np.clip(s, 0.0, 1.0),
        left=U @ W,
        right=V @ Z,
    )


def whitening(S, rank_tol=RANK_TOL):
    """Whitening map A of a positive semidefinite matrix S.

    A = V_r diag(lambda_r ** -0.5) restricted to eigenvalues above
    rank_tol * (largest eigenvalue), so that A.T @ S @ A is the identity on
    the retained rank.  Columns follow ascending eigenvalue order.

    Raises ValidationError when S has an eigenvalue below
    -rank_tol * ||S||_F (not positive semidefinite).
    """
    S = as_sym_matrix(S)
    eig = sym_eig(S)
    fro = np.linalg.norm(S)
    if eig.values[0] < -rank_tol * fro:
        raise ValidationError(
            f"matrix is not positive semidefinite (min eigenvalue {eig.values[0]:.3e})")
    largest = eig.values[-1] if eig.values.size else 0.0
    keep = eig.values > rank_tol * max(largest, 0.0)
    return eig.vectors[:, keep] / np.sqrt(eig.values[keep])
