"""Associative multiplications on C^n: perturbation bounds, spectra and moduli."""

from .core import (
    Multiplication,
    StructureTensor,
    find_unit,
    make_multiplication,
    multiply,
)
from .norms import L1, L2, LINF, NormContext

__all__ = [
    "L1",
    "L2",
    "LINF",
    "Multiplication",
    "NormContext",
    "StructureTensor",
    "find_unit",
    "make_multiplication",
    "multiply",
]
__version__ = "0.1.0"
