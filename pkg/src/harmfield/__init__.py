"""Harmonic vector fields on pseudo-Riemannian hyperquadrics with (p,q) Cheeger-Gromoll type metrics."""
from .cgmetric import MetricParams, energy_density, h_pq, omega, signature_class, vertical_energy_density
from .errors import (
    DegenerateTangent,
    HarmfieldError,
    NonInvertible,
    NotConstantLength,
    NotPreharmonic,
    NullPivot,
    SchemaError,
    Singular,
    SingularPatch,
    ZeroField,
)
from .fields import (
    AmbientPolyField,
    ConformalGradientField,
    KillingField,
    j_twist,
    local_geometry,
    para_kahler_J,
    push_forward,
    rough_laplacian,
)
from .harmonic import (
    classify_cgf,
    constant_length_check,
    first_variation,
    general_killing_condition,
    is_pq_harmonic,
    killing_harmonic_condition_2d,
    preharmonic_lambda,
    solve_metric_params,
    spinnaker,
    tau_pq,
    weitzenbock_residual,
)
from .pseudolin import Signature, inner, is_anti_isometry, is_isometry, orthonormalize
from .quadric import SURFACES, H, Quadric, S, canonical_anti_isometry, sample_points
from .surfaces2d import (
    Killing2D,
    fixed_points,
    harmonic_killing_catalog,
    killing_congruent,
    lambda_2d,
    normal_form,
    twist_correspondence,
)

__version__ = "0.1.0"
