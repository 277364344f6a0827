"""Explicit bubbles, the disk Green's function and the approximate kernel.

Points are complex numbers ``x = x1 + i x2``; any function taking a point
also accepts a pair ``(x1, x2)`` or numpy arrays of complex points. The
bubble scale is ``mu = lam / 32`` throughout.

Two projections are provided for the concentrated bubble and its kernel
functions: closed-form surrogates that drop an ``O(lam)`` (or
``O(sqrt(lam))``) remainder, and exact discrete projections computed by
subtracting the harmonic extension of the boundary values on a
:class:`~liouvillelab.disk_spectral.DiskGrid`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .disk_spectral import DiskField, DiskGrid, project

__all__ = [
    "BubbleParams",
    "CoincidentPointsError",
    "as_point",
    "eval_limit_bubble",
    "pde_residual_pointwise",
    "eval_W_lambda",
    "green_function",
    "green_regular_part",
    "eval_projected_bubble",
    "eval_kernel_Z",
    "eval_projected_kernel",
    "bubble_field",
    "kernel_field",
    "exact_projected_bubble",
    "exact_projected_kernel",
]

COINCIDENT_EPS = 1e-12


class CoincidentPointsError(ValueError):
    """The two arguments of the Green's function are too close."""


def as_point(x) -> np.ndarray | complex:
    """Complex representation of a point or an array of points."""
    if isinstance(x, tuple) and len(x) == 2:
        return np.asarray(x[0], dtype=float) + 1j * np.asarray(x[1], dtype=float)
    arr = np.asarray(x)
    if arr.ndim == 0:
        return complex(arr)
    return arr.astype(complex)


@dataclass(frozen=True)
class BubbleParams:
    """Parameters ``(N, tau, b)`` of a bubble of the limiting problem."""

    tau: float
    b: complex = 0j
    N: int = 1

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "b", complex(self.b))


def eval_limit_bubble(p: BubbleParams, x) -> np.ndarray | float:
    """``log(8 (N+1)^2 tau / (tau + |x^(N+1) - b|^2)^2)``."""
    z = as_point(x)
    d = np.abs(z ** (p.N + 1) - p.b) ** 2
    return np.log(8.0 * (p.N + 1) ** 2 * p.tau) - 2.0 * np.log(p.tau + d)


def pde_residual_pointwise(p: BubbleParams, x, h: float) -> float:
    """Five-point residual ``-Delta_h U - |x|^(2N) e^U`` of the limiting problem."""
    z = complex(as_point(x))
    if not h > 0:
        raise ValueError("step must be positive")
    u = lambda w: eval_limit_bubble(p, w)
    lap = (u(z + h) + u(z - h) + u(z + 1j * h) + u(z - 1j * h) - 4.0 * u(z)) / h**2
    return float(-lap - abs(z) ** (2 * p.N) * np.exp(u(z)))


def eval_W_lambda(lam: float, b: complex, x) -> np.ndarray | float:
    """Concentrated bubble ``log(lam / (lam/32 + |x^2 - b|^2)^2)``."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    z = as_point(x)
    return np.log(lam) - 2.0 * np.log(lam / 32.0 + np.abs(z * z - b) ** 2)


def green_function(x, y) -> np.ndarray | float:
    """Dirichlet Green's function of ``-Delta`` on the unit disk."""
    x, y = as_point(x), as_point(y)
    dist = np.abs(x - y)
    if np.any(dist < COINCIDENT_EPS):
        raise CoincidentPointsError(f"|x - y| below {COINCIDENT_EPS:g}")
    return -np.log(dist) / (2.0 * np.pi) + green_regular_part(x, y)


def green_regular_part(x, y) -> np.ndarray | float:
    """Regular part ``(1/4pi) log(|x|^2 |y|^2 - 2 <x, y> + 1)``.

    This equals ``(1/2pi) log(|x| |y - x/|x|^2|)``; it tends to ``-inf``
    only when ``x = y`` lies on the circle.
    """
    x, y = as_point(x), as_point(y)
    quad = np.abs(x) ** 2 * np.abs(y) ** 2 - 2.0 * (x * np.conj(y)).real + 1.0
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(quad, 0.0)) / (4.0 * np.pi)


def eval_projected_bubble(lam: float, b: complex, x) -> np.ndarray | float:
    """Closed-form surrogate ``-2 log(lam/32 + |x^2 - b|^2) + 8 pi H(x^2, b)``.

    Differs from the exact projection by ``O(lam)`` uniformly on the disk.
    """
    z = as_point(x)
    return -2.0 * np.log(lam / 32.0 + np.abs(z * z - b) ** 2) + 8.0 * np.pi * green_regular_part(z * z, b)


def eval_kernel_Z(j: int, lam: float, b: complex, x) -> np.ndarray | float:
    """Kernel functions of the linearization around the bubble.

    ``j = 0`` gives the dilation mode, ``j = 1, 2`` the translation modes
    in the real and imaginary directions of ``x^2``.
    """
    mu = lam / 32.0
    z = as_point(x)
    w = z * z - b
    den = mu + np.abs(w) ** 2
    if j == 0:
        return (mu - np.abs(w) ** 2) / den
    if j == 1:
        return np.sqrt(mu) * w.real / den
    if j == 2:
        return np.sqrt(mu) * w.imag / den
    raise ValueError(f"kernel index must be 0, 1 or 2, got {j}")


def eval_projected_kernel(j: int, lam: float, b: complex, x) -> np.ndarray | float:
    """Closed-form surrogate for the projection of ``Z^j``."""
    z = eval_kernel_Z(j, lam, b, x)
    return z + 1.0 if j == 0 else z


# --- grid versions ------------------------------------------------------------

def bubble_field(grid: DiskGrid, lam: float, b: complex) -> DiskField:
    return grid.sample(lambda z: eval_W_lambda(lam, b, z))


def kernel_field(grid: DiskGrid, j: int, lam: float, b: complex) -> DiskField:
    return grid.sample(lambda z: eval_kernel_Z(j, lam, b, z))


def exact_projected_bubble(grid: DiskGrid, lam: float, b: complex) -> DiskField:
    """Discrete projection of the concentrated bubble onto zero boundary data."""
    return project(bubble_field(grid, lam, b))


def exact_projected_kernel(grid: DiskGrid, j: int, lam: float, b: complex) -> DiskField:
    return project(kernel_field(grid, j, lam, b))
