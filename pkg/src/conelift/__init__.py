"""Legendrian lifts of Lagrangian immersions into CP^{n-1}: hemispherical
charts, the lifting integral, double point separations, certificates for
the lifted cones, model immersions and Lagrangian grid diagrams."""

from .config import DEFAULT, Tolerances
from .doublepoints import DoublePointRecord, check_condition2, find_double_points
from .grids import (
    GridDiagram,
    HypercubeDiagram,
    RadialGridDiagram,
    build_product_immersion,
    hypercube_from_grids,
    product_lift_condition,
    radial_holonomy,
    to_radial,
    validate_hypercube,
    validate_lagrangian_grid,
)
from .immersion import ParameterDomain, ParametricImmersion, PathSpec
from .lifting import LiftedMap, build_lift, check_condition1, lifting_integral, separation
from .models import HLParams, TrivialConeParams, hl_immersion, hl_perturbed, trivial_cone_immersion
from .verifier import (
    VerificationReport,
    verify_lagrangian_cone,
    verify_lagrangian_projection,
    verify_legendrian_lift,
    verify_special_lagrangian,
)

__all__ = [
    "DEFAULT", "Tolerances", "DoublePointRecord", "check_condition2", "find_double_points",
    "GridDiagram", "HypercubeDiagram", "RadialGridDiagram", "build_product_immersion",
    "hypercube_from_grids", "product_lift_condition", "radial_holonomy", "to_radial",
    "validate_hypercube", "validate_lagrangian_grid", "ParameterDomain", "ParametricImmersion",
    "PathSpec", "LiftedMap", "build_lift", "check_condition1", "lifting_integral", "separation",
    "HLParams", "TrivialConeParams", "hl_immersion", "hl_perturbed", "trivial_cone_immersion",
    "VerificationReport", "verify_lagrangian_cone", "verify_lagrangian_projection",
    "verify_legendrian_lift", "verify_special_lagrangian",
]
