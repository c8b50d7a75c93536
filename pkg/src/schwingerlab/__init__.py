"""Finite-space workbench for Schwinger oscillator maps.

Submodules: :mod:`.opcore` (dense operator algebra), :mod:`.fock` (mode
spaces and ladder operators), :mod:`.grassmann` (exact exterior-algebra
calculus), :mod:`.schwinger` (su(2) constructions), :mod:`.thermo`
(partition functions and rotor equivalence) and :mod:`.cli`.
"""

from .opcore import DomainError, Operator, ShapeError, SizeError

__version__ = "0.1.0"

__all__ = ["DomainError", "Operator", "ShapeError", "SizeError", "__version__"]
