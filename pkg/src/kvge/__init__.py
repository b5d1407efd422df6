"""Existence certificates and collocation solutions for nonlocal
Kirchhoff-type boundary value problems with variable-exponent growth."""

from .certify import (
    BoxExtremum,
    Certificate,
    ProblemSpec,
    check_certificate,
    check_corollary_2_10,
    check_corollary_2_11,
    check_theorem_2_8,
    check_theorem_3_6,
    check_theorem_4_4,
    extremal_f,
    lambda_window,
    localization_bounds,
    select_theorem,
)
from .expr import Expression, parse, to_source
from .green import BoundaryModel
from .grid import GridFunction
from .kernel import Kernel
from .solve import SolutionProfile, apply_T, inner_solve, outer_solve, verify_profile
from .varexp import (
    ExponentProfile,
    M_bar,
    M_rho_convex,
    M_star,
    RhoBounds,
    eps,
    extract_bounds,
    m_rho,
    phi,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryModel", "BoxExtremum", "Certificate", "ExponentProfile",
    "Expression", "GridFunction", "Kernel", "M_bar", "M_rho_convex", "M_star",
    "ProblemSpec", "RhoBounds", "SolutionProfile", "apply_T",
    "check_certificate", "check_corollary_2_10", "check_corollary_2_11",
    "check_theorem_2_8", "check_theorem_3_6", "check_theorem_4_4", "eps",
    "extract_bounds", "extremal_f", "inner_solve", "lambda_window",
    "localization_bounds", "m_rho", "outer_solve", "parse", "phi",
    "select_theorem", "to_source", "verify_profile",
]
