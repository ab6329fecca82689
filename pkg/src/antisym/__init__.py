"""Anti-symmetric feature maps and everything needed to trust them.

The map eta concatenates projected pairwise-difference products with their
power-sum multiples. Its components are anti-symmetric, vanish exactly when
two particles coincide, and separate particle multisets, so any continuous
anti-symmetric target factors as f = g(eta(x)) with a continuous odd g.
This package builds the map, certifies those properties by randomized
testing, characterizes where the map's Jacobian loses rank, fits odd models
g in closed form, and reproduces the curves showing that g can be less
regular than f.
"""

from .errors import (
    AntisymError,
    CollidingInput,
    ConfigError,
    DimensionMismatch,
    DomainViolation,
    IllConditioned,
    NoCollision,
    NonpositiveEps,
    OrbitCheckInfeasible,
    SpecTooSmall,
)
from .geometry import (
    ProjectionMode,
    ProjectionSet,
    build_projection_set,
    find_separating_projection,
    projection_count,
)
from .features import (
    FeatureMapSpec,
    FeatureVector,
    ParticleConfiguration,
    build_feature_map,
    eval_eta,
    eval_eta_array,
    eval_eta_batch,
    eval_phi,
    eval_psi,
    export_features_csv,
    export_features_json,
    multi_indices_up_to,
    read_configs_csv,
)
from .verify import (
    CertificationReport,
    certify_antisymmetry,
    certify_orbit_separation,
    certify_psi_separation,
    certify_zero_iff_collision,
    mutant_eta,
    mutant_psi,
)
from .calculus import (
    JacobianResult,
    check_full_rank_off_singular,
    check_product_rule_blocks,
    check_singular_column_pairs,
    jacobian,
)
from .represent import (
    FitDiagnostics,
    OddModel,
    TargetFunction,
    TargetKind,
    abs_diff_target,
    c1_obstruction_curve,
    check_well_defined,
    closed_form_c1_quotient,
    closed_form_lipschitz_ratio,
    custom_target,
    eval_target,
    fit_odd_model,
    lipschitz_ratio_curve,
    pow43_diff_target,
    slater_target,
)

__version__ = "0.1.0"
