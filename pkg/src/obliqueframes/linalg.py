"""Dense real linear algebra primitives.

Orthonormalization, Moore-Penrose pseudoinverses, principal subspace
angles, and orthogonal/oblique projections, all on plain numpy arrays.
Everything here is a pure function of immutable inputs; arrays stored on
dataclasses are marked read-only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZero, DimensionMismatch, DirectSumViolation

# Orthonormality slack allowed on a stored Subspace basis.
ORTH_TOL = 1e-10


@dataclass(frozen=True)
class Tolerance:
    """Numerical cutoffs used throughout the library.

    rank_tol: relative singular-value cutoff for rank decisions; ``None``
        means the usual max(n_rows, n_cols) * machine epsilon.
    eq_tol: absolute residual tolerance for operator-equality checks.
    """

    rank_tol: float | None = None
    eq_tol: float = 1e-9

    def __post_init__(self):
        if self.rank_tol is not None and not self.rank_tol > 0:
            raise ValueError("rank_tol must be positive")
        if not self.eq_tol > 0:
            raise ValueError("eq_tol must be positive")

    def rank_cutoff(self, shape) -> float:
        if self.rank_tol is not None:
            return self.rank_tol
        return max(shape) * float(np.finfo(float).eps)


DEFAULT_TOL = Tolerance()


def _as_float_array(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of R^n carried as an orthonormal column basis."""

    ambient_dim: int
    basis: np.ndarray  # (n, d) with orthonormal columns

    def __post_init__(self):
        basis = _as_float_array(self.basis, "basis")
        if basis.ndim != 2:
            raise ValueError("basis must be a 2-d array")
        n, d = basis.shape
        if n != self.ambient_dim:
            raise DimensionMismatch(
                f"basis has {n} rows, ambient_dim is {self.ambient_dim}"
            )
        if not 1 <= d <= n:
            raise ValueError(f"subspace dimension {d} outside [1, {n}]")
        gram = basis.T @ basis
        if np.max(np.abs(gram - np.eye(d))) > ORTH_TOL:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", _freeze(basis))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def contains(self, x, eq_tol: float = DEFAULT_TOL.eq_tol) -> bool:
        """Whether x lies in the subspace up to a relative residual."""
        x = _as_float_array(x, "x")
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            return True
        resid = x - self.basis @ (self.basis.T @ x)
        return np.linalg.norm(resid) <= eq_tol * nrm

    def project(self, x) -> np.ndarray:
        return self.basis @ (self.basis.T @ np.asarray(x, dtype=float))


def orthonormal_basis(vectors, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of span{vectors} with SVD rank truncation.

    Raises AllZero when every vector is numerically zero.
    """
    X = _as_float_array(np.column_stack([np.asarray(v, float) for v in vectors]),
                        "vectors")
    u, s, _ = np.linalg.svd(X, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        raise AllZero("cannot span a subspace with all-zero vectors")
    rank = int(np.sum(s > tol.rank_cutoff(X.shape) * s[0]))
    return Subspace(ambient_dim=X.shape[0], basis=u[:, :rank])


def pseudoinverse(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse with singular values below the cutoff zeroed."""
    M = _as_float_array(M, "matrix")
    return np.linalg.pinv(M, rcond=tol.rank_cutoff(M.shape))


def subspace_angle_cos(W: Subspace, V: Subspace) -> float:
    """cos of the maximum principal angle from W into V.

    Equals inf over unit f in W of ||P_V f||; zero when some direction of
    W is orthogonal to all of V (in particular whenever dim V < dim W).
    """
    if W.ambient_dim != V.ambient_dim:
        raise DimensionMismatch("subspaces live in different ambient spaces")
    M = V.basis.T @ W.basis
    if M.shape[0] < M.shape[1]:
        return 0.0
    s = np.linalg.svd(M, compute_uv=False)
    return float(np.clip(s[-1], 0.0, 1.0))


def orthogonal_projection(W: Subspace) -> np.ndarray:
    return W.basis @ W.basis.T


def oblique_projection(W: Subspace, V: Subspace,
                       tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Projection onto W that annihilates the orthogonal complement of V.

    Well defined exactly when the ambient space is the direct sum of W and
    V-perp; equivalently both subspace angle cosines are positive and the
    dimensions agree.  Raises DirectSumViolation otherwise.
    """
    if W.ambient_dim != V.ambient_dim:
        raise DimensionMismatch("subspaces live in different ambient spaces")
    if W.dim != V.dim:
        raise DirectSumViolation(
            f"dim W = {W.dim} differs from dim V = {V.dim}"
        )
    cut = tol.rank_cutoff((W.ambient_dim, W.ambient_dim))
    c_wv = subspace_angle_cos(W, V)
    c_vw = subspace_angle_cos(V, W)
    if c_wv <= cut or c_vw <= cut:
        raise DirectSumViolation(
            f"subspace angle cosines {c_wv:.3e}, {c_vw:.3e} too small"
        )
    G = V.basis.T @ W.basis
    return W.basis @ np.linalg.solve(G, V.basis.T)


def orthogonal_complement(W: Subspace) -> Subspace:
    """Orthonormal basis of the orthogonal complement of W."""
    n, d = W.basis.shape
    if d == n:
        raise ValueError("the full space has a trivial complement")
    u, _, _ = np.linalg.svd(W.basis, full_matrices=True)
    return Subspace(ambient_dim=n, basis=u[:, d:])


def spectral_norm(M) -> float:
    return float(np.linalg.norm(np.asarray(M, dtype=float), 2))


def psd_sqrt(M) -> np.ndarray:
    """Symmetric square root of a PSD matrix, eigenvalues clamped at 0."""
    M = _as_float_array(M, "matrix")
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def psd_pinv_sqrt(M, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Square root of the pseudoinverse of a PSD matrix."""
    M = _as_float_array(M, "matrix")
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    cutoff = tol.rank_cutoff(M.shape) * max(np.max(np.abs(vals)), 0.0)
    inv = np.where(vals > cutoff, 1.0 / np.where(vals > cutoff, vals, 1.0), 0.0)
    return (vecs * np.sqrt(inv)) @ vecs.T
