"""Damped-oscillator quantum dynamics: Caldirola-Kanai operators, the Bateman dual system and its reduction."""

from .coeffring import ExpPoly
from .weylalg import PhysParams, WeylOp, op_commutator, op_equal, op_mul

__all__ = ["ExpPoly", "PhysParams", "WeylOp", "op_commutator", "op_equal", "op_mul"]
__version__ = "0.1.0"
