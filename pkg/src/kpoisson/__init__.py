"""Numerical toolkit for Poisson structures on Lorentz and Poincare groups."""
from .lorentz import (
    Component,
    QuadraticSpace,
    classify_component,
    exp_closed,
    exp_series,
    form_k,
    form_k_tilde,
    lambda_op,
    make_minkowski,
)
from .groups import AElement, CElement, Frame, NotInGamma, factor_bc, factor_gamma
from .brackets import PolyFunction, bracket_structural, bracket_zakrzewski, match_h
from .schouten import IsoAlgebra, Multivector, make_bv, make_omega, schouten_22
from .affine import Line, group_compatible, is_poisson_action, structures_equal
from .verify import CheckResult, SuiteConfig, emit_report, run_suite

__version__ = "0.1.0"
