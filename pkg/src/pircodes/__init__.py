"""Workbench for binary PIR codes: certificates, constructions, bounds and ILPs."""

from .gf2core import GeneratorMatrix, PointMultiset, parse_matrix
from .recovery import RecoveryCertificate, decide_k_pir, validate_certificate

__version__ = "0.1.0"

__all__ = [
    "GeneratorMatrix",
    "PointMultiset",
    "RecoveryCertificate",
    "decide_k_pir",
    "parse_matrix",
    "validate_certificate",
]
