"""Exact minimum-bandwidth cooperative regenerating codes and their repair-bandwidth bounds."""

from .codec import CodeParams, NodeShare, encode, execute_repair, plan_repair, reconstruct, repair
from .errors import (
    CorruptionError,
    InsufficientSharesError,
    MBCRError,
    ParameterError,
    SingularMatrixError,
    UnsupportedFailurePatternError,
    UnsupportedRegimeError,
)
from .gf import Field, get_field

__all__ = [
    "CodeParams",
    "CorruptionError",
    "Field",
    "InsufficientSharesError",
    "MBCRError",
    "NodeShare",
    "ParameterError",
    "SingularMatrixError",
    "UnsupportedFailurePatternError",
    "UnsupportedRegimeError",
    "encode",
    "execute_repair",
    "get_field",
    "plan_repair",
    "reconstruct",
    "repair",
]

__version__ = "0.1.0"
