"""Cohomological dynamics of compact Kähler-manifold automorphisms.

Exact spectral analysis of pullback actions on cohomology: dynamical
degrees and entropy, Jordan structure with limit operators of normalized
powers, relative degrees on quotient cohomology, Cesàro limits of invariant
classes, Hölder-continuous limit functions of expanding iterations, and
exact mixing checks for torus models.
"""

__version__ = "0.1.0"

from .degrees import (
    DegreeProfile,
    RelativeDegreeProfile,
    cesaro_class_limit,
    check_concavity,
    degree_chain_check,
    degree_sequence,
    dynamical_degrees,
    inverse_action,
    relative_degrees,
    submultiplicativity_check,
)
from .errors import KahlerDynError
from .exact import ExactMatrix, format_exact, parse_exact
from .green import (
    HolderEstimate,
    IterationSetup,
    dynamics_adapted_lags,
    green_limit_torus,
    holder_exponent_estimate,
    holder_iteration,
    minimal_power_for_exponent,
    recurrence_machinery,
)
from .jordan import (
    AsymptoticReport,
    JordanData,
    ThetaGroup,
    char_poly,
    eigen_structure,
    lambda_infinity,
    perron_frobenius_check,
    power_asymptotics,
)
from .mixing import (
    CorrelationReport,
    TrigPolynomial,
    ergodic_average_check,
    grid_correlation,
    haar_character_correlation,
    random_hyperbolic_automorphism,
)
from .models import (
    GradedCohomologyAction,
    MazurModel,
    TorusAutomorphism,
    mazur_action,
    mazur_involutions,
    raw_action,
    torus_action,
)

__all__ = [
    "AsymptoticReport",
    "CorrelationReport",
    "DegreeProfile",
    "ExactMatrix",
    "GradedCohomologyAction",
    "HolderEstimate",
    "IterationSetup",
    "JordanData",
    "KahlerDynError",
    "MazurModel",
    "RelativeDegreeProfile",
    "ThetaGroup",
    "TorusAutomorphism",
    "TrigPolynomial",
    "__version__",
    "cesaro_class_limit",
    "char_poly",
    "check_concavity",
    "degree_chain_check",
    "degree_sequence",
    "dynamical_degrees",
    "dynamics_adapted_lags",
    "eigen_structure",
    "ergodic_average_check",
    "format_exact",
    "green_limit_torus",
    "grid_correlation",
    "haar_character_correlation",
    "holder_exponent_estimate",
    "holder_iteration",
    "inverse_action",
    "lambda_infinity",
    "mazur_action",
    "mazur_involutions",
    "minimal_power_for_exponent",
    "parse_exact",
    "perron_frobenius_check",
    "power_asymptotics",
    "random_hyperbolic_automorphism",
    "raw_action",
    "relative_degrees",
    "submultiplicativity_check",
    "torus_action",
]
