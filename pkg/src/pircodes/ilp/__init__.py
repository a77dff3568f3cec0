"""Integer programs for PIR code lengths: building, reduction, solving, export."""

from .build import (
    EXACT,
    LOWER,
    ExtractionError,
    apply_symmetry,
    build_exact,
    build_lower,
    cyclic_generator,
    extract_code,
    recovery_point_sets,
    restore_keys,
)
from .model import IlpModel, ModelError, export_lp, parse_lp
from .solver import SolveOutcome, solve

__all__ = [
    "EXACT", "LOWER", "ExtractionError", "IlpModel", "ModelError", "SolveOutcome",
    "apply_symmetry", "build_exact", "build_lower", "cyclic_generator", "export_lp",
    "extract_code", "parse_lp", "recovery_point_sets", "restore_keys", "solve",
]
