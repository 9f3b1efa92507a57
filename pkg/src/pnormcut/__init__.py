"""Encode MAX-CUT as a matrix p-norm problem, compute the norms, decode the cut.

Hot numeric kernels run under numba when it is installed; set
``PNORMCUT_BACKEND=numpy`` to force the pure-numpy reference kernels.
"""

from ._kernels import BACKEND
from .gadget import (deficiency_bound, gadget_matrix, gadget_value, pair_inequality_terms,
                     sphere_samples)
from .graph import (CutResult, EnumerationLimitError, Graph, GraphError, cut_value,
                    incidence_matrix, maxcut_bruteforce, parse_graph, random_connected_graph)
from .matrix import DenseMatrix, MatrixFormatError, dumps_matrix, parse_matrix, write_matrix
from .norms import (AscentConfig, NormEstimate, dual_norm_pair, infinity_p_norm_exact,
                    mixed_pq_sign_maximizer_check, norm_1, norm_inf, p_norm_ascent,
                    p_norm_sign_search, polish_hp, rayleigh)
from .numerics import (HPScalar, PExponent, conjugate, decode_precision_bits, format_hp,
                       pow_abs, precision)
from .reduction import (BlockSpec, ConstructionError, DecodeResult, InsufficientPrecisionError,
                        ReductionInstance, build_z, build_zdoublestar, build_zstar, build_ztilde,
                        decode_maxcut, decode_maxcut_from_inftyp, pad_square,
                        required_epsilon_inftyp, required_epsilon_pnorm, round_to_signs,
                        solve_maxcut_via_pnorm)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AscentConfig", "BlockSpec", "ConstructionError", "CutResult", "DecodeResult",
    "DenseMatrix", "EnumerationLimitError", "Graph", "GraphError", "HPScalar",
    "InsufficientPrecisionError", "MatrixFormatError", "NormEstimate", "PExponent",
    "ReductionInstance", "build_z", "build_zdoublestar", "build_zstar", "build_ztilde",
    "conjugate", "cut_value", "decode_maxcut", "decode_maxcut_from_inftyp",
    "decode_precision_bits", "deficiency_bound", "dual_norm_pair", "dumps_matrix",
    "format_hp", "gadget_matrix", "gadget_value", "incidence_matrix", "infinity_p_norm_exact",
    "maxcut_bruteforce", "mixed_pq_sign_maximizer_check", "norm_1", "norm_inf",
    "p_norm_ascent", "p_norm_sign_search", "pad_square", "pair_inequality_terms",
    "parse_graph", "parse_matrix", "polish_hp", "pow_abs", "precision",
    "random_connected_graph", "rayleigh", "required_epsilon_inftyp", "required_epsilon_pnorm",
    "round_to_signs", "solve_maxcut_via_pnorm", "sphere_samples", "write_matrix",
]
