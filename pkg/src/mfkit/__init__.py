"""Exact construction and verification of Lagrangian multiforms."""

from .divergence import (
    BasisExhausted,
    NotADivergence,
    NotExact,
    align_gauge,
    div_decompose,
    divergence_of,
    inv_total_derivative,
    is_null_lagrangian,
    verify_divergence,
)
from .eom import EOMRule, EOMSystem, NonTerminating, commuting_check, reduce_mod_eom
from .jetalgebra import (
    Context,
    ContextMismatch,
    DiffPoly,
    GaussianRational,
    max_order,
    partial_jet,
    total_derivative,
    total_derivative_multi,
)
from .multiform import (
    KForm,
    NotASymmetry,
    build_multiform,
    closure_check,
    exterior_derivative,
    multiform_el_equations,
    transfer_derivatives,
)
from .textio import (
    DocumentError,
    ExprSyntaxError,
    dumps_document,
    load_document,
    loads_document,
    parse_expr,
    print_expr,
    save_document,
)
from .varcalc import (
    Characteristic,
    VectorDensity,
    euler,
    frechet,
    frechet_adjoint,
    helmholtz_check,
    ibp_reduce,
    prolong_apply,
    symmetry_check,
    variational_derivative,
)

__all__ = [name for name in dir() if not name.startswith("_")]
