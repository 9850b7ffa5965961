"""Oblique dual probabilistic frames via transport couplings.

A measure on V is an oblique dual of a measure on W when some coupling's
mixed second moment reproduces the oblique projection onto W.  This module
builds canonical duals by pushforward, parameterizes all pushforward-type
duals, transfers duals between sampling subspaces, checks probabilistic
consistent reconstruction, and evaluates the dual potential with its
pushforward and general lower bounds.

Only finitely supported measures are represented.  The canonical
construction itself is a linear pushforward and extends verbatim to
continuous measures: e.g. the standard Gaussian on the first axis of the
plane, sampled along the diagonal line, has as canonical dual the
degenerate Gaussian with covariance [[1, 1], [1, 1]] -- that case is left
as this remark.
"""
from __future__ import annotations

import numpy as np

from .errors import (
    InternalConsistencyError,
    MarginalMismatch,
    NotADual,
    NotAFrame,
    RangeViolation,
)
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    oblique_projection,
    orthonormal_basis,
    pseudoinverse,
    spectral_norm,
)
from .measures import (
    DiscreteMeasure,
    classify_probabilistic_frame,
    measure_frame_operator,
    pushforward,
    weak_equal,
)
from .potentials import SATURATION_TOL, PotentialReport
from .transport import Coupling, graph_coupling


def support_span(mu: DiscreteMeasure, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Span of the positively weighted atoms."""
    return orthonormal_basis(list(mu.support()), tol)


def _require_frame(mu: DiscreteMeasure, W: Subspace, tol: Tolerance,
                   who: str) -> tuple[float, float]:
    report = classify_probabilistic_frame(mu, W, tol)
    if not report.is_frame:
        raise NotAFrame(f"{who} is not a probabilistic frame for its subspace")
    return report.bounds


def _validate_coupling(gamma: Coupling, mu: DiscreteMeasure,
                       nu: DiscreteMeasure):
    from .transport import _marginal, aggregate_declared
    if not weak_equal(_marginal(np.asarray(gamma.x), np.asarray(gamma.weights)),
                      aggregate_declared(mu)):
        raise MarginalMismatch("coupling's first marginal is not the given measure")
    if not weak_equal(_marginal(np.asarray(gamma.y), np.asarray(gamma.weights)),
                      aggregate_declared(nu)):
        raise MarginalMismatch("coupling's second marginal is not the given measure")


def canonical_dual_map(mu: DiscreteMeasure, W: Subspace, V: Subspace,
                       tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Matrix of the canonical dual map: oblique projection onto V composed
    with the pseudoinverse moment matrix."""
    _require_frame(mu, W, tol, "the measure")
    pi_vw = oblique_projection(V, W, tol)
    return pi_vw @ pseudoinverse(measure_frame_operator(mu), tol)


def canonical_dual_measure(mu: DiscreteMeasure, W: Subspace, V: Subspace,
                           tol: Tolerance = DEFAULT_TOL
                           ) -> tuple[DiscreteMeasure, Coupling]:
    """Canonical oblique dual measure with its graph coupling."""
    T = canonical_dual_map(mu, W, V, tol)
    gamma = graph_coupling(mu, lambda x: T @ x)
    return gamma.marginal_y, gamma


def is_oblique_dual_measure(mu: DiscreteMeasure, nu: DiscreteMeasure,
                            gamma: Coupling, tol: Tolerance = DEFAULT_TOL
                            ) -> tuple[bool, float]:
    """Verify a coupling certificate for oblique duality.

    The subspaces are the spans of the two supports; the residual is the
    spectral distance between the coupling's mixed moment and the oblique
    projection.  A seeded probe set re-derives the same identity from the
    reconstruction formulas and raises InternalConsistencyError on any
    disagreement between the two evaluation routes.
    """
    _validate_coupling(gamma, mu, nu)
    W = support_span(mu, tol)
    V = support_span(nu, tol)
    pi_wv = oblique_projection(W, V, tol)
    moment = gamma.moment_matrix()
    residual = spectral_norm(moment - pi_wv)
    ok = residual <= tol.eq_tol

    rng = np.random.default_rng(0)
    n = mu.ambient_dim
    slack = 1e-8
    for _ in range(4):
        f = rng.standard_normal(n)
        g = rng.standard_normal(n)
        budget = residual * np.linalg.norm(f) * max(np.linalg.norm(g), 1.0) + slack
        fw = W.project(f)
        synth = np.einsum("k,ki,k->i", gamma.weights, gamma.x, gamma.y @ fw)
        if np.linalg.norm(synth - fw) > budget:
            raise InternalConsistencyError("reconstruction probe disagrees")
        synth = np.einsum("k,ki,k->i", gamma.weights, gamma.x, gamma.y @ f)
        if np.linalg.norm(synth - pi_wv @ f) > budget:
            raise InternalConsistencyError("oblique synthesis probe disagrees")
        sampled = np.einsum("k,k,ki->i", gamma.weights, gamma.x @ f, gamma.y)
        if np.linalg.norm(sampled - pi_wv.T @ f) > budget:
            raise InternalConsistencyError("adjoint synthesis probe disagrees")
        bilinear = float(np.sum(gamma.weights * (gamma.x @ g) * (gamma.y @ f)))
        if abs(bilinear - float(g @ pi_wv @ f)) > budget:
            raise InternalConsistencyError("bilinear probe disagrees")
        bilinear = float(np.sum(gamma.weights * (gamma.x @ f) * (gamma.y @ g)))
        if abs(bilinear - float(g @ pi_wv.T @ f)) > budget:
            raise InternalConsistencyError("adjoint bilinear probe disagrees")
    return ok, float(residual)


def pushforward_dual_map(mu: DiscreteMeasure, W: Subspace, V: Subspace, h,
                         tol: Tolerance = DEFAULT_TOL):
    """Dual map T(x) = canonical(x) + h(x) - centering, for h into V.

    Pushing mu forward by T (with its graph coupling) always produces an
    oblique dual; h identically zero gives the canonical map.
    """
    h_at = {}
    for k, x in enumerate(mu.points):
        hx = np.asarray(h(x), dtype=float)
        if mu.weights[k] > 0 and not V.contains(hx, tol.eq_tol):
            raise RangeViolation(f"h leaves the sampling subspace at atom {k}")
        h_at[k] = hx
    T0 = canonical_dual_map(mu, W, V, tol)
    s_pinv = pseudoinverse(measure_frame_operator(mu), tol)
    # Correction matrix sum_k w_k h(x_k) x_k^T applied through S^+.
    corr = np.einsum("k,ki,kj->ij",
                     mu.weights,
                     np.array([h_at[k] for k in range(mu.num_atoms)]),
                     mu.points) @ s_pinv

    def T(x):
        x = np.asarray(x, dtype=float)
        return T0 @ x + np.asarray(h(x), dtype=float) - corr @ x

    return T


def transfer_dual_to_K(nu: DiscreteMeasure, gamma: Coupling, W: Subspace,
                       K: Subspace, tol: Tolerance = DEFAULT_TOL
                       ) -> tuple[DiscreteMeasure, Coupling]:
    """Carry a dual on V to a dual on K by obliquely projecting the
    sampling atoms, keeping the coupling's first coordinates."""
    moment = gamma.moment_matrix()
    pw = W.basis @ W.basis.T
    if spectral_norm(moment @ pw - pw) > tol.eq_tol:
        raise NotADual("the coupling does not reconstruct the synthesis subspace")
    pi_kw = oblique_projection(K, W, tol)
    nu_k = pushforward(nu, lambda y: pi_kw @ y)
    gamma_k = Coupling(
        gamma.x,
        gamma.y @ pi_kw.T,
        gamma.weights,
        gamma.marginal_x,
        nu_k,
    )
    return nu_k, gamma_k


def probabilistic_consistency_check(mu: DiscreteMeasure, nu: DiscreteMeasure,
                                    gamma: Coupling, probes,
                                    tol: Tolerance = DEFAULT_TOL) -> float:
    """Worst sampling discrepancy of coupling-based reconstruction.

    For each probe f the reconstruction is synthesized through the
    coupling and tested against every positively weighted sampling atom;
    the maximum |<f - fhat, z>| over probes and atoms is returned.
    """
    _validate_coupling(gamma, mu, nu)
    moment = gamma.moment_matrix()
    support = nu.support()
    worst = 0.0
    for f in probes:
        f = np.asarray(f, dtype=float)
        fhat = moment @ f
        if support.shape[0]:
            worst = max(worst, float(np.max(np.abs(support @ (f - fhat)))))
    return worst


def pf_dual_potential(mu: DiscreteMeasure, nu: DiscreteMeasure, mode: str,
                      bounds_of_mu: tuple[float, float],
                      coupling: Coupling | None = None,
                      tol: Tolerance = DEFAULT_TOL) -> PotentialReport:
    """Dual potential of a measure pair with the applicable lower bound.

    mode 'pushforward' uses the dimension bound (tightness-free); mode
    'general' uses the (A/B)-weighted bound for a frame with bounds A, B.
    When a coupling certificate is supplied it is verified first.
    """
    if mode not in ("pushforward", "general"):
        raise ValueError(f"unknown potential mode {mode!r}")
    if coupling is not None:
        ok, resid = is_oblique_dual_measure(mu, nu, coupling, tol)
        if not ok:
            raise NotADual(f"certificate residual {resid:.3e} too large")
    W = support_span(mu, tol)
    V = support_span(nu, tol)
    d = W.dim
    s_mu = measure_frame_operator(mu)
    s_nu = measure_frame_operator(nu)
    value = float(np.trace(s_mu @ s_nu))

    lo, hi = bounds_of_mu
    if mode == "pushforward":
        lower = float(d)
        saturated = value - lower <= SATURATION_TOL
    else:
        lower = float(lo / hi * d)
        report = classify_probabilistic_frame(mu, W, tol)
        canonical, _ = canonical_dual_measure(mu, W, V, tol)
        saturated = bool(report.is_tight and weak_equal(nu, canonical))
    return PotentialReport(p=2.0, value=value, lower_bound=lower,
                           gap=value - lower, saturated=saturated)


def minimal_energy_coefficients(mu: DiscreteMeasure, W: Subspace, V: Subspace,
                                f, tol: Tolerance = DEFAULT_TOL
                                ) -> tuple[np.ndarray, float]:
    """Minimal weighted-energy synthesis coefficients for a target vector.

    omega(x_k) = <f, T x_k> with T the canonical dual map; the weighted
    synthesis sum reproduces the oblique projection of f, and the weighted
    energy is minimal among all coefficient choices with that property.
    """
    f = np.asarray(f, dtype=float)
    T = canonical_dual_map(mu, W, V, tol)
    omega = mu.points @ (T.T @ f)
    pi_wv = oblique_projection(W, V, tol)
    synth = np.einsum("k,ki->i", mu.weights * omega, mu.points)
    target = pi_wv @ f
    if np.linalg.norm(synth - target) > tol.eq_tol * (1.0 + np.linalg.norm(f)):
        raise InternalConsistencyError("synthesis identity failed")
    energy = float(np.sum(mu.weights * omega * omega))
    return omega, energy
