"""Certified norm computations in the logarithmic mixed-Tsirelson space S and a GM-type variant."""

from .arith import CertScalar, f_eval, sqrt_f_eval
from .vectors import BlockSequence, FiniteVector, IndexInterval, MonomialVector
from .snorm import NormResult, norm_S, norm_l
from .yardstick import build_yardstick, is_admissible
from .gm import GMParams, gm_norm, validate_certificate

__version__ = "0.1.0"

__all__ = [
    "BlockSequence",
    "CertScalar",
    "FiniteVector",
    "GMParams",
    "IndexInterval",
    "MonomialVector",
    "NormResult",
    "build_yardstick",
    "f_eval",
    "gm_norm",
    "is_admissible",
    "norm_S",
    "norm_l",
    "sqrt_f_eval",
    "validate_certificate",
]
