"""Finite frames for a subspace and their oblique duals.

A frame is an ordered family of vectors spanning a declared subspace W.
Against a second subspace V that splits the ambient space with W-perp,
every frame admits oblique duals: families in V whose mixed outer-product
sum reproduces the oblique projection onto W.  The canonical dual and the
full affine parameterization of all duals are provided, together with the
consistent-reconstruction check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotAFrame, RangeViolation
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    _as_float_array,
    _freeze,
    oblique_projection,
    pseudoinverse,
    spectral_norm,
)


@dataclass(frozen=True)
class FiniteFrame:
    """An ordered family of vectors together with its claimed span."""

    vectors: np.ndarray  # (N, n), one frame vector per row
    subspace: Subspace

    def __post_init__(self):
        vecs = _as_float_array(self.vectors, "vectors")
        if vecs.ndim != 2:
            raise ValueError("vectors must form a 2-d array")
        if vecs.shape[1] != self.subspace.ambient_dim:
            raise DimensionMismatch(
                f"vectors have length {vecs.shape[1]}, "
                f"ambient dimension is {self.subspace.ambient_dim}"
            )
        object.__setattr__(self, "vectors", _freeze(vecs))

    @classmethod
    def create(cls, vectors, subspace: Subspace,
               tol: Tolerance = DEFAULT_TOL) -> "FiniteFrame":
        """Validated constructor: every vector must lie in the subspace
        and the family must span it."""
        frame = cls(np.atleast_2d(np.asarray(vectors, dtype=float)), subspace)
        for i, w in enumerate(frame.vectors):
            if not subspace.contains(w, tol.eq_tol):
                raise NotAFrame(f"vector {i} lies outside the claimed subspace")
        s = np.linalg.svd(frame.matrix, compute_uv=False)
        rank = int(np.sum(s > tol.rank_cutoff(frame.matrix.shape) * s[0])) \
            if s.size and s[0] > 0 else 0
        if rank != subspace.dim:
            raise NotAFrame(
                f"vectors span a {rank}-dimensional space, "
                f"claimed dimension is {subspace.dim}"
            )
        return frame

    @property
    def matrix(self) -> np.ndarray:
        """Synthesis matrix, one frame vector per column (n x N)."""
        return self.vectors.T

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class ObliqueDualPair:
    """A synthesis frame on W and an analysis frame on V, plus the
    spectral-norm residual of the mixed reconstruction identity."""

    analysis: FiniteFrame
    synthesis: FiniteFrame
    residual: float

    def __post_init__(self):
        if len(self.analysis) != len(self.synthesis):
            raise DimensionMismatch("analysis and synthesis lengths differ")
        if self.residual < 0:
            raise ValueError("residual must be nonnegative")


def frame_operator(F: FiniteFrame) -> np.ndarray:
    """Sum of outer products of the frame vectors (symmetric PSD)."""
    return F.matrix @ F.matrix.T


def frame_bounds(F: FiniteFrame, tol: Tolerance = DEFAULT_TOL) -> tuple[float, float]:
    """Extreme eigenvalues of the frame operator restricted to the span."""
    B = F.subspace.basis
    restricted = B.T @ frame_operator(F) @ B
    vals = np.linalg.eigvalsh(restricted)
    lo, hi = float(vals[0]), float(vals[-1])
    if lo <= tol.rank_cutoff(restricted.shape) * max(hi, 0.0):
        raise NotAFrame("lower frame bound vanishes: the family is span-deficient")
    return lo, hi


def dual_residual(synthesis: FiniteFrame, analysis: FiniteFrame,
                  tol: Tolerance = DEFAULT_TOL) -> float:
    """Spectral norm of sum_i w_i v_i^T minus the oblique projection."""
    pi = oblique_projection(synthesis.subspace, analysis.subspace, tol)
    mixed = synthesis.matrix @ analysis.vectors
    return spectral_norm(mixed - pi)


def is_oblique_dual(Fw: FiniteFrame, Fv: FiniteFrame,
                    tol: Tolerance = DEFAULT_TOL) -> tuple[bool, float]:
    """Check whether Fv is an oblique dual of Fw on its subspace."""
    if len(Fw) != len(Fv):
        raise DimensionMismatch(
            f"frame lengths differ: {len(Fw)} vs {len(Fv)}"
        )
    resid = dual_residual(Fw, Fv, tol)
    return resid <= tol.eq_tol, resid


def canonical_oblique_dual(F: FiniteFrame, V: Subspace,
                           tol: Tolerance = DEFAULT_TOL) -> ObliqueDualPair:
    """The minimal-energy oblique dual: v_j is the oblique projection onto
    V of the pseudoinverse frame operator applied to w_j."""
    pi_vw = oblique_projection(V, F.subspace, tol)
    s_pinv = pseudoinverse(frame_operator(F), tol)
    analysis_vecs = (pi_vw @ s_pinv @ F.matrix).T
    analysis = FiniteFrame.create(analysis_vecs, V, tol)
    return ObliqueDualPair(
        analysis=analysis,
        synthesis=F,
        residual=dual_residual(F, analysis, tol),
    )


def oblique_dual_family(F: FiniteFrame, V: Subspace, H,
                        tol: Tolerance = DEFAULT_TOL) -> ObliqueDualPair:
    """Oblique dual generated by a free family H in V.

    v_i = canonical_i + h_i - sum_j <S^+ w_i, w_j> h_j.  Every choice of H
    yields a valid dual; H = 0 recovers the canonical one.
    """
    Hm = np.atleast_2d(np.asarray(H, dtype=float))
    if Hm.shape[0] != len(F):
        raise DimensionMismatch(
            f"expected {len(F)} parameter vectors, got {Hm.shape[0]}"
        )
    if Hm.shape[1] != F.subspace.ambient_dim:
        raise DimensionMismatch("parameter vectors have wrong length")
    for i, h in enumerate(Hm):
        if not V.contains(h, tol.eq_tol):
            raise RangeViolation(f"parameter vector {i} lies outside V")

    pi_vw = oblique_projection(V, F.subspace, tol)
    s_pinv = pseudoinverse(frame_operator(F), tol)
    canonical = pi_vw @ s_pinv @ F.matrix          # (n, N)
    gram = F.matrix.T @ s_pinv @ F.matrix          # <S^+ w_i, w_j>
    correction = Hm.T @ gram.T                     # column i: sum_j G_ij h_j
    analysis_vecs = (canonical + Hm.T - correction).T
    analysis = FiniteFrame.create(analysis_vecs, V, tol)
    return ObliqueDualPair(
        analysis=analysis,
        synthesis=F,
        residual=dual_residual(F, analysis, tol),
    )


def reconstruct(f, pair: ObliqueDualPair) -> tuple[np.ndarray, float]:
    """Synthesize from the samples of f against the analysis frame.

    Returns the reconstruction and the worst-case sampling discrepancy
    max_i |<f - fhat, v_i>|, which vanishes exactly for dual pairs.
    """
    f = _as_float_array(f, "f")
    samples = pair.analysis.vectors @ f
    fhat = pair.synthesis.matrix @ samples
    consistency = float(np.max(np.abs(pair.analysis.vectors @ (f - fhat)))) \
        if len(pair.analysis) else 0.0
    return fhat, consistency
