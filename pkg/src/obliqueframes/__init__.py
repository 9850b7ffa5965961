"""Oblique dual frames, probabilistic frames, and transport duality."""

from .approx import (
    ApproxDualReport,
    InteriorityReport,
    InteriorityTrial,
    PerturbationCertificate,
    approx_dual_residual,
    consistency_conversions,
    interiority_experiment,
    perturbation_certificate,
)
from .duality import (
    canonical_dual_map,
    canonical_dual_measure,
    is_oblique_dual_measure,
    minimal_energy_coefficients,
    pf_dual_potential,
    probabilistic_consistency_check,
    pushforward_dual_map,
    support_span,
    transfer_dual_to_K,
)
from .errors import (
    AllZero,
    DimensionMismatch,
    DirectSumViolation,
    FrameError,
    HypothesisViolated,
    InternalConsistencyError,
    MarginalMismatch,
    NonConvergence,
    NotADual,
    NotAFrame,
    ParseError,
    RangeViolation,
    SupportOutsideSubspace,
)
from .frames import (
    FiniteFrame,
    ObliqueDualPair,
    canonical_oblique_dual,
    dual_residual,
    frame_bounds,
    frame_operator,
    is_oblique_dual,
    oblique_dual_family,
    reconstruct,
)
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    oblique_projection,
    orthogonal_complement,
    orthogonal_projection,
    orthonormal_basis,
    pseudoinverse,
    psd_pinv_sqrt,
    psd_sqrt,
    spectral_norm,
    subspace_angle_cos,
)
from .measures import (
    DiscreteMeasure,
    MeasureFrameReport,
    classify_probabilistic_frame,
    dirac,
    linear_pushforward,
    measure_frame_operator,
    pushforward,
    second_moment,
    uniform_atoms,
    weak_equal,
)
from .potentials import (
    CoherenceReport,
    OptimizerOptions,
    PotentialReport,
    constant_diagonal_bound,
    diagonal_potential,
    dual_p_potential,
    etf_lift,
    minimize_dual_potential,
    mixed_coherence,
    mixed_gram,
    mixed_gram_entries,
    potential_gradient,
    potential_objective,
    welch_type_bound,
)
from .transport import (
    Coupling,
    TransportCertificate,
    TriCoupling,
    coupling_cost,
    exact_w2,
    glue,
    graph_coupling,
    identity_coupling,
    product_coupling,
    solve_transport,
)

__version__ = "0.1.0"
