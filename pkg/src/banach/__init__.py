"""Euclidean structure in finite-dimensional normed spaces.

Gauges of symmetric convex bodies, John position and contact
certificates, spherical statistics of norms, sparse-vector arrangements,
and restricted-isometry style embeddings, with a small CLI for running
reproducible experiment grids.
"""

from .errors import (
    BanachError,
    ConfigError,
    DegenerateInputError,
    DomainError,
    InvalidBodyError,
    UnsupportedOperationError,
)
from .bodies import (
    BallIntersection,
    Body,
    FacetPolytope,
    GaugeValue,
    HullBody,
    LinearImage,
    PNormBody,
    VertexPolytope,
    body_from_spec,
    body_to_spec,
    dual_gauge,
    euclid_project,
    gauge,
    gauge_many,
    hull_gauge,
)
from .john import (
    Ellipsoid,
    JohnCertificate,
    SandwichReport,
    analytic_john_radius,
    john_scale,
    john_transform,
    mvee,
    sphere_gauge_extremes,
    verify_sandwich,
)
from .sphere import (
    BEstimate,
    CdfComparison,
    DuEstimate,
    Lemma1Table,
    LevyReport,
    OrderStatsResult,
    OrthogonalSample,
    SmallBallReport,
    StatsSummary,
    d_u_estimate,
    estimate_b,
    estimate_stats,
    lemma1_ratio,
    levy_check,
    order_stats_experiment,
    sample_grassmann,
    sample_orthogonal,
    sample_sphere,
    schsch_compare,
    small_ball,
)
from .arrange import (
    BlockReport,
    DistortionRange,
    KashinRow,
    LocHilbertReport,
    RandomBasisRow,
    SparsityProfile,
    SubspaceBasis,
    basis_columns_subspace,
    block_decomposition,
    coordinate_subspace,
    cyclic_length,
    distortion_budget,
    haar_subspace,
    kashin_experiment,
    kol_proxy,
    linfty_refute,
    loc_hilbert_check,
    random_basis_experiment,
    sparsity,
    subspace_distortion,
)
from .ripjl import (
    CotypeGapReport,
    HilbertianBasis,
    JlReport,
    RipReport,
    SketchOperator,
    cotype_gap_check,
    gaussian_rip,
    gaussian_sketch,
    general_rip,
    hilbertian_basis,
    jl_sparse,
)

__version__ = "0.1.0"

__all__ = [
    "BanachError",
    "ConfigError",
    "DegenerateInputError",
    "DomainError",
    "InvalidBodyError",
    "UnsupportedOperationError",
    "Body",
    "PNormBody",
    "FacetPolytope",
    "VertexPolytope",
    "LinearImage",
    "HullBody",
    "BallIntersection",
    "GaugeValue",
    "gauge",
    "dual_gauge",
    "gauge_many",
    "euclid_project",
    "hull_gauge",
    "body_from_spec",
    "body_to_spec",
    "Ellipsoid",
    "JohnCertificate",
    "SandwichReport",
    "mvee",
    "john_transform",
    "verify_sandwich",
    "analytic_john_radius",
    "john_scale",
    "sphere_gauge_extremes",
    "OrthogonalSample",
    "StatsSummary",
    "BEstimate",
    "LevyReport",
    "SmallBallReport",
    "CdfComparison",
    "DuEstimate",
    "Lemma1Table",
    "OrderStatsResult",
    "sample_sphere",
    "sample_orthogonal",
    "sample_grassmann",
    "estimate_stats",
    "estimate_b",
    "levy_check",
    "small_ball",
    "schsch_compare",
    "d_u_estimate",
    "lemma1_ratio",
    "order_stats_experiment",
    "SparsityProfile",
    "SubspaceBasis",
    "DistortionRange",
    "RandomBasisRow",
    "KashinRow",
    "BlockReport",
    "LocHilbertReport",
    "sparsity",
    "cyclic_length",
    "kol_proxy",
    "distortion_budget",
    "coordinate_subspace",
    "haar_subspace",
    "basis_columns_subspace",
    "subspace_distortion",
    "random_basis_experiment",
    "kashin_experiment",
    "block_decomposition",
    "loc_hilbert_check",
    "linfty_refute",
    "SketchOperator",
    "RipReport",
    "JlReport",
    "HilbertianBasis",
    "CotypeGapReport",
    "gaussian_sketch",
    "gaussian_rip",
    "general_rip",
    "hilbertian_basis",
    "jl_sparse",
    "cotype_gap_check",
    "__version__",
]
