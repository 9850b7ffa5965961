"""Mixed-frame potentials, coherence bounds, and dual-family optimization.

The p-th order potential of a dual pair is the entrywise p-norm of the
mixed Gram matrix G_ij = <w_i, v_j>.  For p = 2 the minimum over all
oblique duals of a fixed synthesis frame equals the subspace dimension
and is attained exactly at the canonical dual; even p > 2 obey Jensen
chains, and the off-diagonal maximum obeys a Welch-type lower bound whose
saturation is an equiangular-tightness certificate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolated, InternalConsistencyError, NonConvergence, NotADual
from .frames import FiniteFrame, ObliqueDualPair, dual_residual, frame_operator
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    oblique_projection,
    orthogonal_projection,
    pseudoinverse,
    psd_pinv_sqrt,
    spectral_norm,
)

# Absolute tolerance for declaring a bound saturated on unit-scale fixtures.
SATURATION_TOL = 1e-8


@dataclass(frozen=True)
class PotentialReport:
    p: float
    value: float
    lower_bound: float | None
    gap: float | None
    saturated: bool
    saturation_tol: float = SATURATION_TOL


@dataclass(frozen=True)
class CoherenceReport:
    max_off_diagonal_sq: float
    welch_bound: float
    diagonal_constant: bool
    saturated: bool
    saturation_tol: float = SATURATION_TOL


def _check_dual(pair: ObliqueDualPair, tol: Tolerance):
    if pair.residual > tol.eq_tol:
        raise NotADual(
            f"pair residual {pair.residual:.3e} exceeds tolerance {tol.eq_tol:.1e}"
        )


def _is_even_order(p: float) -> bool:
    return p > 0 and abs(p - round(p)) < 1e-12 and round(p) % 2 == 0


def mixed_gram_entries(pair: ObliqueDualPair) -> np.ndarray:
    """Mixed Gram matrix G with G_ij = <w_i, v_j>."""
    return pair.synthesis.vectors @ pair.analysis.vectors.T


def dual_p_potential(pair: ObliqueDualPair, p: float = 2.0,
                     tol: Tolerance = DEFAULT_TOL) -> PotentialReport:
    """Full double-sum potential sum_ij |<w_i, v_j>|^p with its lower bound.

    The bound is d_W for p = 2 and N^(2-p) d_W^(p/2) for even p; for other
    p only the value is reported.
    """
    _check_dual(pair, tol)
    if not p > 0:
        raise ValueError("potential order p must be positive")
    G = mixed_gram_entries(pair)
    value = float(np.sum(np.abs(G) ** p))
    N = len(pair.synthesis)
    d = pair.synthesis.subspace.dim
    if _is_even_order(p):
        lower = float(d) if p == 2 else float(N ** (2.0 - p) * d ** (p / 2.0))
        gap = value - lower
        return PotentialReport(p, value, lower, gap, saturated=gap <= SATURATION_TOL)
    return PotentialReport(p, value, None, None, saturated=False)


def diagonal_potential(pair: ObliqueDualPair, p: float = 2.0,
                       tol: Tolerance = DEFAULT_TOL) -> PotentialReport:
    """Diagonal potential sum_i |<w_i, v_i>|^p.

    Bounded below by d_W^2/N for p = 2 and N^(1-p) d_W^p for even p;
    saturated exactly when every diagonal entry equals d_W/N.
    """
    _check_dual(pair, tol)
    if not p > 0:
        raise ValueError("potential order p must be positive")
    diag = np.einsum("ij,ij->i", pair.synthesis.vectors, pair.analysis.vectors)
    value = float(np.sum(np.abs(diag) ** p))
    N = len(pair.synthesis)
    d = pair.synthesis.subspace.dim
    if _is_even_order(p):
        lower = float(d * d / N) if p == 2 else float(N ** (1.0 - p) * d ** p)
        saturated = bool(np.max(np.abs(diag - d / N)) <= SATURATION_TOL)
        return PotentialReport(p, value, lower, value - lower, saturated)
    return PotentialReport(p, value, None, None, saturated=False)


def welch_type_bound(N: int, d: int) -> float:
    """Lower bound on the squared off-diagonal mixed inner products."""
    if N <= 1:
        return 0.0
    return d * (N - d) / (N * N * (N - 1.0))


def constant_diagonal_bound(N: int, d: int, p: float) -> float:
    """Refined even-p potential bound for pairs with constant mixed-Gram
    diagonal; tight exactly for equiangular canonical duals."""
    if not _is_even_order(p):
        raise ValueError("the refined bound applies to even orders only")
    diag_term = float(d) ** p / float(N) ** (p - 1.0)
    if N <= 1:
        return diag_term
    k = p / 2.0
    off = abs(d - d * d / N) ** k / (N ** (k - 1.0) * (N - 1.0) ** (k - 1.0))
    return off + diag_term


def mixed_coherence(pair: ObliqueDualPair,
                    tol: Tolerance = DEFAULT_TOL) -> CoherenceReport:
    """Largest squared off-diagonal mixed inner product vs. its bound.

    Requires a constant mixed-Gram diagonal; raises HypothesisViolated
    otherwise, since the bound is only valid under that hypothesis.
    """
    _check_dual(pair, tol)
    G = mixed_gram_entries(pair)
    N = G.shape[0]
    d = pair.synthesis.subspace.dim
    diag = np.diag(G)
    if np.max(diag) - np.min(diag) > tol.eq_tol:
        raise HypothesisViolated(
            "mixed Gram diagonal is not constant; the coherence bound does not apply"
        )
    if N == 1:
        return CoherenceReport(0.0, 0.0, diagonal_constant=True, saturated=True)
    off = np.abs(G[~np.eye(N, dtype=bool)]) ** 2
    max_off = float(np.max(off))
    bound = welch_type_bound(N, d)
    return CoherenceReport(
        max_off_diagonal_sq=max_off,
        welch_bound=bound,
        diagonal_constant=True,
        saturated=max_off - bound <= SATURATION_TOL,
    )


def mixed_gram(pair: ObliqueDualPair,
               tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray | None]:
    """Mixed Gram matrix and, at coherence saturation, its signature part.

    When the Welch-type bound is met with N > d_W, the Gram decomposes as
    (d_W/N)(I + c Q) with Q symmetric, hollow, and entrywise +-1; Q is
    returned in that case and checked, otherwise None.
    """
    _check_dual(pair, tol)
    G = mixed_gram_entries(pair)
    N = G.shape[0]
    d = pair.synthesis.subspace.dim
    try:
        report = mixed_coherence(pair, tol)
    except HypothesisViolated:
        return G, None
    if not report.saturated or N <= d:
        return G, None
    scale = (N / d) * np.sqrt(d * (N - 1.0) / (N - d))
    Q = (G - (d / N) * np.eye(N)) * scale
    if spectral_norm(Q - Q.T) > tol.eq_tol:
        raise InternalConsistencyError("signature matrix is not symmetric")
    if np.max(np.abs(np.diag(Q))) > tol.eq_tol:
        raise InternalConsistencyError("signature matrix has nonzero diagonal")
    off = Q[~np.eye(N, dtype=bool)]
    if np.max(np.abs(np.abs(off) - 1.0)) > tol.eq_tol:
        raise InternalConsistencyError("signature entries are not unimodular")
    return G, Q


def etf_lift(F: FiniteFrame,
             tol: Tolerance = DEFAULT_TOL) -> tuple[FiniteFrame, bool]:
    """Whitened, renormalized copy of the frame and an equiangular-tight test.

    The lift psi_i = sqrt(N/d) (S^+)^(1/2) w_i always has frame operator
    (N/d) P_W on the span; it is flagged equiangular-tight when the lifted
    vectors are unit norm and share a common off-diagonal |<psi_i, psi_j>|.
    """
    N = len(F)
    d = F.subspace.dim
    root = psd_pinv_sqrt(frame_operator(F), tol)
    lifted = (np.sqrt(N / d) * root @ F.matrix).T
    psi = FiniteFrame.create(lifted, F.subspace, tol)

    norms = np.linalg.norm(psi.vectors, axis=1)
    unit = bool(np.max(np.abs(norms - 1.0)) <= tol.eq_tol)
    op_resid = spectral_norm(frame_operator(psi)
                             - (N / d) * orthogonal_projection(F.subspace))
    tight = op_resid <= tol.eq_tol
    gram = psi.vectors @ psi.vectors.T
    off = np.abs(gram[~np.eye(N, dtype=bool)])
    equiangular = off.size == 0 or float(np.max(off) - np.min(off)) <= tol.eq_tol
    return psi, bool(unit and tight and equiangular)


@dataclass(frozen=True)
class OptimizerOptions:
    """Steepest-descent settings for the dual-potential minimization.

    grad_tol defaults to 1e-7: below roughly 1e-8 the objective's float
    granularity near its minimum makes smaller gradient norms unreachable,
    while 1e-7 already pins the minimizer to ~1e-7 accuracy.
    """

    step_size: float = 1.0
    max_iters: int = 10000
    grad_tol: float = 1e-7
    seed: int = 0
    init_scale: float = 0.5
    armijo_c: float = 1e-4
    shrink: float = 0.5


@dataclass(frozen=True)
class _FamilyGeometry:
    """Precomputed pieces of the dual-family parameterization on V.

    Coefficients C (dim V x N) act through H = B_V C; the mixed Gram is
    the affine map G(C) = G0 + P C Q.
    """

    frame: FiniteFrame
    sampling: Subspace
    canonical: np.ndarray  # (n, N) canonical dual columns
    G0: np.ndarray         # (N, N)
    P: np.ndarray          # (N, dim V)
    Q: np.ndarray          # (N, N)

    @classmethod
    def build(cls, F: FiniteFrame, V: Subspace, tol: Tolerance) -> "_FamilyGeometry":
        pi_vw = oblique_projection(V, F.subspace, tol)
        s_pinv = pseudoinverse(frame_operator(F), tol)
        canonical = pi_vw @ s_pinv @ F.matrix
        gram = F.matrix.T @ s_pinv @ F.matrix
        return cls(
            frame=F,
            sampling=V,
            canonical=canonical,
            G0=F.matrix.T @ canonical,
            P=F.matrix.T @ V.basis,
            Q=np.eye(len(F)) - gram,
        )

    def analysis_matrix(self, C: np.ndarray) -> np.ndarray:
        return self.canonical + self.sampling.basis @ C @ self.Q

    def pair(self, C: np.ndarray, tol: Tolerance) -> ObliqueDualPair:
        analysis = FiniteFrame.create(self.analysis_matrix(C).T, self.sampling, tol)
        return ObliqueDualPair(
            analysis=analysis,
            synthesis=self.frame,
            residual=dual_residual(self.frame, analysis, tol),
        )


def potential_objective(F: FiniteFrame, V: Subspace, C, p: float = 2.0,
                        tol: Tolerance = DEFAULT_TOL) -> float:
    """Dual p-potential of the family with coefficient matrix C on V."""
    geom = _FamilyGeometry.build(F, V, tol)
    G = geom.G0 + geom.P @ np.asarray(C, float) @ geom.Q
    return float(np.sum(np.abs(G) ** p))


def potential_gradient(F: FiniteFrame, V: Subspace, C, p: float = 2.0,
                       tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Analytic gradient of potential_objective with respect to C."""
    geom = _FamilyGeometry.build(F, V, tol)
    return _gradient(geom, np.asarray(C, float), p)


def _value(geom: _FamilyGeometry, C: np.ndarray, p: float) -> float:
    G = geom.G0 + geom.P @ C @ geom.Q
    return float(np.sum(np.abs(G) ** p))


def _gradient(geom: _FamilyGeometry, C: np.ndarray, p: float) -> np.ndarray:
    G = geom.G0 + geom.P @ C @ geom.Q
    dG = p * G * np.abs(G) ** (p - 2.0) if p != 2.0 else 2.0 * G
    return geom.P.T @ dG @ geom.Q.T


def minimize_dual_potential(
    F: FiniteFrame,
    V: Subspace,
    p: float = 2.0,
    opts: OptimizerOptions = OptimizerOptions(),
    tol: Tolerance = DEFAULT_TOL,
) -> tuple[ObliqueDualPair, list[float]]:
    """Steepest descent over the dual family from a random start.

    The trial step is the Barzilai-Borwein quotient when it is positive
    (plain steepest descent needs far more iterations on these quadratics),
    safeguarded by backtracking Armijo so the trajectory is non-increasing.
    Raises NonConvergence when the gradient norm is still above tolerance
    at the iteration cap or when the line search can no longer decrease
    the objective.
    """
    if not _is_even_order(p):
        raise ValueError("minimization is defined for even potential orders")
    geom = _FamilyGeometry.build(F, V, tol)
    rng = np.random.default_rng(opts.seed)
    C = opts.init_scale * rng.standard_normal((V.dim, len(F)))

    step = opts.step_size
    value = _value(geom, C, p)
    grad = _gradient(geom, C, p)
    trajectory = [value]
    prev_c = prev_grad = None
    for _ in range(opts.max_iters):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= opts.grad_tol:
            return geom.pair(C, tol), trajectory
        t = step
        if prev_c is not None:
            s = C - prev_c
            y = grad - prev_grad
            sy = float(np.sum(s * y))
            if sy > 0:
                t = float(np.sum(s * s)) / sy
        while True:
            cand = C - t * grad
            cand_value = _value(geom, cand, p)
            if cand_value <= value - opts.armijo_c * t * gnorm * gnorm:
                break
            t *= opts.shrink
            if t < 1e-20:
                raise NonConvergence(
                    f"line search stalled with gradient norm {gnorm:.3e} "
                    f"above {opts.grad_tol:.1e}"
                )
        prev_c, prev_grad = C, grad
        C, value = cand, cand_value
        grad = _gradient(geom, C, p)
        step = min(t / opts.shrink, 1e6)
        trajectory.append(value)
    raise NonConvergence(
        f"gradient norm {gnorm:.3e} above {opts.grad_tol:.1e} "
        f"after {opts.max_iters} iterations"
    )
