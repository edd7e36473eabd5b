"""Fusion rings of A_r at level k: exact eigenvalues, generators, zeros and Galois action."""

from __future__ import annotations

from .characters import CharacterTable, chi, s_matrix
from .cyclotomic import CycNumber
from .weight_lattice import AlgebraSpec, Weight

__all__ = ["AlgebraSpec", "CharacterTable", "CycNumber", "Weight", "chi", "s_matrix"]
__version__ = "0.1.0"
