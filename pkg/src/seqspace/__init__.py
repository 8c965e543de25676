"""Toolkit for the paranormed difference space l(r,s,t,p;Delta^(m)) at finite truncation."""
from __future__ import annotations

__version__ = "0.1.0"

from .numeric import (
    BadExponent,
    DimensionMismatch,
    LossOfPrecision,
    NumericMode,
    NumericPolicyError,
    RangeError,
    SeqSpaceError,
    SeriesDivergence,
    ValidationError,
    ZeroR,
    ZeroS0,
    ZeroT,
)
from .families import ExponentSequence, SequenceFamily, SpaceParams, preset
from .triangles import (
    build_A,
    build_composite,
    build_delta,
    build_inverse_composite,
    compute_d_coefficients,
    determinant_oracle_d,
)
from .spaces import (
    basis_vector,
    bk_norm,
    forward_transform,
    inverse_transform,
    paranorm,
    reconstruct,
    remainder_curve,
)
from .duals import build_E, check_condition, dual_membership, mapping_class_test
from .compact import (
    OperatorSpec,
    associated_matrix,
    bv_norm,
    chi_estimate,
    classify_compact,
    l1_norm,
    operator_norm,
)
