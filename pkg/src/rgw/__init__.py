"""Invariant geometry of reductive homogeneous spaces from structure constants."""

from rgw.core_algebra import DEFAULT_TOL, InvalidSpaceError, SpaceSpec, StructureError, validate_space

__all__ = ["DEFAULT_TOL", "InvalidSpaceError", "SpaceSpec", "StructureError", "validate_space"]
__version__ = "0.1.0"
