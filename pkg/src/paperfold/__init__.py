"""paperfold: exact computation on polygon boundary self-gluings.

The library builds the quotient metric structure (the scar) of a scheme
that glues boundary segments of a plane polygon in pairs, certifies the
divergence condition under which the flat conformal structure extends
across the singular set, and evaluates explicit moduli of continuity for
the normalized uniformizing map.  All metric data is exact rational; all
reported integral bounds are certified one-sided.
"""

from .scheme import (
    CantorSpec,
    FiniteScheme,
    FoldingScheme,
    Meta,
    Multipolygon,
    Pairing,
    Polygon,
    Rule,
    RulePiece,
    SchemeError,
    SingularSpec,
    builtin_example,
    is_plain,
    truncate,
    truncate_max_gap,
    validate,
)
from .pfs import PfsError, parse_scheme, serialize_scheme
from .scar import (
    ComponentInfo,
    PointClass,
    ScarGraph,
    ScarPair,
    StructureError,
    ball_component,
    classify_point,
    component_certified,
    euler_check,
    lambda_units,
    point_units,
)
from .criterion import (
    CriterionParams,
    DivergenceCertificate,
    GoodnessProfile,
    LambdaAnalysis,
    breakpoints,
    divergence_report,
    goodness,
    injectivity_radius,
    integral_lower_bound,
    mcmullen_system,
)
from .collar import (
    CollarSpec,
    DiskBoundary,
    annulus_module_bound,
    build_collar,
    disk_boundary,
    grotzsch_bound,
)
from .modulus import (
    ModulusParams,
    ModulusProfile,
    PointGeom,
    RhoEvaluator,
    geometry_functions,
    modulus_params,
    rho_global,
    rho_point,
)

__all__ = [
    "CantorSpec", "FiniteScheme", "FoldingScheme", "Meta", "Multipolygon",
    "Pairing", "Polygon", "Rule", "RulePiece", "SchemeError", "SingularSpec",
    "builtin_example", "is_plain", "truncate", "truncate_max_gap", "validate",
    "PfsError", "parse_scheme", "serialize_scheme",
    "ComponentInfo", "PointClass", "ScarGraph", "ScarPair", "StructureError",
    "ball_component", "classify_point", "component_certified", "euler_check",
    "lambda_units", "point_units",
    "CriterionParams", "DivergenceCertificate", "GoodnessProfile",
    "LambdaAnalysis", "breakpoints", "divergence_report", "goodness",
    "injectivity_radius", "integral_lower_bound", "mcmullen_system",
    "CollarSpec", "DiskBoundary", "annulus_module_bound", "build_collar",
    "disk_boundary", "grotzsch_bound",
    "ModulusParams", "ModulusProfile", "PointGeom", "RhoEvaluator",
    "geometry_functions", "modulus_params", "rho_global", "rho_point",
]
