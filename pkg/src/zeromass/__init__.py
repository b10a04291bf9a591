"""Radial solutions of a zero-mass Schrodinger equation with a singular potential.

Numerical companion to the problem

    -Laplace u + A |x|**(-alpha) u = u**(p-1),  u > 0,  x in R^N,

restricted to radial solutions.
"""

from ._validation import ConvergenceError, DomainError
from .scaling import Parameters, PhiProfile, VProfile

__all__ = ["ConvergenceError", "DomainError", "Parameters", "PhiProfile", "VProfile"]
__version__ = "0.1.0"
