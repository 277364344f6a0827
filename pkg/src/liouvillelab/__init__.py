"""Numerical laboratory for concentrating solutions of the singular
Liouville problem ``-Delta v = lam |x|^2 V(x) e^v`` on the unit disk."""

__version__ = "0.1.0"
