"""Finite-dimensional reduction: existence test and bubble location.

A concentrating family exists exactly when the Hessian of ``V`` at the
origin has positive determinant. Its location parameter is
``b ~ sqrt(lam/32) * (t*, 0)`` in the Hessian eigenframe, where ``t*``
solves ``J(t*) = -(pi/4) (g1 - g2)/(g1 + g2)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from .potential import Potential
from .special_integrals import QuadratureSpec, integral_J

__all__ = [
    "Classification",
    "DegenerateHessianError",
    "NoBlowUpFamilyError",
    "classify",
    "solve_reduced_equation",
    "reduced_residual",
    "predict_b",
]

# tight enough that the root residual stays below 1e-9
_ROOT_QUAD = QuadratureSpec(tol=1e-11)


class DegenerateHessianError(ValueError):
    """One Hessian eigenvalue vanishes; the classification does not apply."""


class NoBlowUpFamilyError(ValueError):
    """The Hessian determinant is not positive, so no family exists."""


@dataclass(frozen=True)
class Classification:
    exists: bool
    ratio: float | None
    b_tilde_star: float | None
    b1_sign: int | None
    gamma1: float
    gamma2: float

    def summary(self) -> str:
        if not self.exists:
            return "NO blow-up family (det D2V(0) <= 0)"
        rel = {1: "b1 > 0", -1: "b1 < 0", 0: "b1 = 0"}[self.b1_sign]
        return f"blow-up family EXISTS; {rel}; b_tilde_1* = {self.b_tilde_star:.12g}"


def _check_gammas(g1: float, g2: float) -> None:
    if g1 == 0 or g2 == 0:
        raise DegenerateHessianError(f"degenerate critical point: gammas = ({g1}, {g2})")


def classify(V: Potential | tuple[float, float]) -> Classification:
    g1, g2 = V.gammas if isinstance(V, Potential) else map(float, V)
    _check_gammas(g1, g2)
    if g1 * g2 <= 0:
        ratio = (g1 - g2) / (g1 + g2) if g1 + g2 != 0 else None
        return Classification(False, ratio, None, None, g1, g2)
    ratio = (g1 - g2) / (g1 + g2)
    sign = int(np.sign(abs(g2) - abs(g1)))
    return Classification(True, ratio, solve_reduced_equation(g1, g2), sign, g1, g2)


@lru_cache(maxsize=None)
def _J(t: float) -> float:
    return integral_J(t, _ROOT_QUAD)


def reduced_residual(t: float, gamma1: float, gamma2: float) -> float:
    """``J(t) + (pi/4) (g1 - g2)/(g1 + g2)``."""
    return _J(float(t)) + 0.25 * np.pi * (gamma1 - gamma2) / (gamma1 + gamma2)


@lru_cache(maxsize=None)
def _root_for_target(target: float) -> float:
    if target == 0.0:
        return 0.0
    # J is odd and increasing; solve on the positive side
    sgn = 1.0 if target > 0 else -1.0
    goal = abs(target)
    hi = 1.0
    while _J(hi) < goal:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError(f"target {target} too close to the limit pi/4")
    root = optimize.brentq(lambda t: _J(t) - goal, 0.0, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    return sgn * root


def solve_reduced_equation(gamma1: float, gamma2: float) -> float:
    """Unique root of ``J(t) = -(pi/4) (g1 - g2)/(g1 + g2)``.

    Requires ``g1 * g2 > 0`` so the target lies strictly inside the range
    ``(-pi/4, pi/4)`` of ``J``.
    """
    _check_gammas(gamma1, gamma2)
    if gamma1 * gamma2 <= 0:
        raise NoBlowUpFamilyError(f"gamma1 * gamma2 must be positive, got ({gamma1}, {gamma2})")
    ratio = (gamma1 - gamma2) / (gamma1 + gamma2)
    return _root_for_target(-0.25 * np.pi * ratio)


def predict_b(lam: float, gamma1: float, gamma2: float) -> complex:
    """Leading-order location ``sqrt(lam/32) * t*`` (real in the eigenframe)."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    return complex(np.sqrt(lam / 32.0) * solve_reduced_equation(gamma1, gamma2), 0.0)
