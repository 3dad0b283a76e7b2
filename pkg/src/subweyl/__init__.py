"""Certified sub-Weyl bounds for zeta on the critical line.

The package computes explicit constants A with |zeta(1/2+it)| <= A t^(27/164)
using directed-rounding interval arithmetic, searches interval parameter
schemes, and numerically checks the exponential-sum inequalities the bound
rests on.
"""

__version__ = "0.1.0"
