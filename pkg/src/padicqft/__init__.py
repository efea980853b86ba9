"""Desk-scale numerics for p-adic Euclidean quantum fields."""

__version__ = "0.1.0"

from .padic import (
    BallSpec,
    PadicRational,
    PadicVector,
    character,
    fractional_part,
    norm,
    sphere_character_integral,
    vector_norm,
)
from .lattice import (
    LatticeField,
    LatticeGeometry,
    alias_free_radius,
    convolve,
    dft,
    fft_plan,
    idft,
    load_field,
    save_field,
    sobolev_norm,
)
from .symbols import (
    EllipticPolynomial,
    SymbolSpec,
    apply_operator,
    bound_constants,
    ellipticity_check,
    padic_abs_poly,
    symbol_eval,
)
from .green import GreenFunction, decay_scan, green_apply, green_build, radial_oracle
from .noise import (
    FieldSample,
    InteractionH,
    LevySpec,
    bochner_validate,
    h_to_levy,
    levy_eval,
    sample_convolved,
    sample_gaussian_white,
    sample_levy_white,
)
from .wick import (
    ChaosVector,
    KondratievNormParams,
    kondratiev_norm,
    os1_bound_check,
    phi_h,
    phi_h_convolved,
    s_transform,
    t_transform,
    wick_analytic,
    wick_monomial_eval,
    wick_product,
)
from .schwinger import (
    EuclideanTransform,
    PartitionTable,
    cluster_check,
    invariance_check,
    mc_schwinger,
    os4_symmetry_check,
    partition_expand,
    t_transform_derivative_schwinger,
    truncated_schwinger,
)
