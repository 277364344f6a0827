"""Whole-plane integrals that drive the finite-dimensional reduction.

All integrals are computed in polar coordinates about the point where
the integrand is non-smooth. The angular integral uses a trapezoid rule
whose nodes are mirrored exactly across both coordinate axes, so
integrands that are odd in ``x1`` or ``x2`` integrate to exactly zero.
The radial integral uses adaptive Gauss-Kronrod (``scipy.integrate.quad``)
on geometrically growing panels out to a radius beyond which an analytic
tail bound is negligible.

Sign convention: the vector field ``F`` uses the kernel ``|x + xi|`` so
that ``F((t, 0)) = (J(t), 0)``. The other common convention, ``|x - xi|``,
gives exactly ``-F``; pass ``convention="minus"`` to obtain it.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "QuadratureWarning",
    "integrate_radial_decay",
    "integral_I",
    "integral_J",
    "field_F",
    "jacobian_F_on_axis",
    "square_substitution_check",
    "SUBSTITUTION_CATALOG",
    "monte_carlo_estimates",
]

Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


class QuadratureWarning(UserWarning):
    """Raised (as a warning) when the requested tolerance was not met."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Truncation radius, absolute tolerance and subdivision limit.

    ``R=None`` picks the radius from the tail bound of the integrand.
    """

    R: float | None = None
    tol: float = 1e-8
    limit: int = 200

    def __post_init__(self):
        if self.R is not None and not self.R > 0:
            raise ValueError(f"truncation radius must be positive, got {self.R}")
        if not self.tol > 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")
        if self.limit < 1:
            raise ValueError(f"subdivision limit must be >= 1, got {self.limit}")


class QuadResult(NamedTuple):
    value: float
    error: float


DEFAULT = QuadratureSpec()


def _tail_radius(offset: float, tol: float, decay: float) -> float:
    # 2 pi int_R^inf r (1 + (r - d)^2)^(-decay/2) dr <= 2 pi R^(2 - decay) / (decay - 2)
    # once R > 2 d; solve for tol / 10.
    target = tol / 10.0
    radius = (2.0 * np.pi / ((decay - 2.0) * target)) ** (1.0 / (decay - 2.0))
    return max(50.0, 2.0 * offset + 50.0, radius)


class _AngularRule:
    """Trapezoid rule in angle with nodes mirrored across both axes."""

    def __init__(self, n_quarter: int):
        k = np.arange(n_quarter)
        t = 0.5 * np.pi * (k + 0.5) / n_quarter
        c, s = np.cos(t), np.sin(t)
        # quadrants: (c, s), (-c, s), (-c, -s), (c, -s)
        self.cos = np.concatenate([c, -c, -c, c])
        self.sin = np.concatenate([s, s, -s, -s])
        self.n_quarter = n_quarter
        self.weight = 2.0 * np.pi / (4 * n_quarter)

    def apply(self, values: np.ndarray) -> float:
        q = self.n_quarter
        a = values[0:q].sum()
        b = values[q:2 * q].sum()
        c = values[2 * q:3 * q].sum()
        d = values[3 * q:4 * q].sum()
        # (A + B) + (C + D) cancels exactly for integrands odd in x1 or in x2
        return float(((a + b) + (c + d)) * self.weight)


_RULES: dict[int, _AngularRule] = {}


def _rule(n_quarter: int) -> _AngularRule:
    if n_quarter not in _RULES:
        _RULES[n_quarter] = _AngularRule(n_quarter)
    return _RULES[n_quarter]


def _ring(integrand: Integrand, center: complex, rho: float, tol: float) -> float:
    """Angular integral at radius ``rho``, doubling until it settles."""
    n = 16
    prev = None
    while True:
        rule = _rule(n)
        x1 = center.real + rho * rule.cos
        x2 = center.imag + rho * rule.sin
        val = rule.apply(integrand(x1, x2))
        if prev is not None and abs(val - prev) <= tol:
            return val
        if n >= 1 << 14:
            return val
        prev = val
        n *= 2


def integrate_radial_decay(integrand: Integrand, center: complex = 0.0, q: QuadratureSpec = DEFAULT,
                           bump: complex | None = None, decay: float = 3.0) -> QuadResult:
    """Integral of ``integrand(x1, x2)`` over the plane.

    Parameters
    ----------
    integrand : callable
        Vectorized function of the two coordinates.
    center : complex
        Pole of the polar coordinates; put it on any point where the
        integrand is not smooth.
    q : QuadratureSpec
        Radius, tolerance and subdivision limit.
    bump : complex, optional
        Location of the integrand's main mass when it differs from the
        center, used to place panel breaks.
    decay : float
        Algebraic decay exponent of the integrand at infinity (> 2).

    Returns
    -------
    QuadResult
        Value and an estimate of the absolute error.
    """
    center = complex(center)
    offset = abs(complex(bump) - center) if bump is not None else 0.0
    offset = max(offset, abs(center))
    radius = q.R if q.R is not None else _tail_radius(offset, q.tol, decay)

    breaks = [0.0]
    if bump is not None:
        d = abs(complex(bump) - center)
        for p in (d - 2.0, d, d + 2.0):
            if p > breaks[-1] + 1e-9:
                breaks.append(p)
    edge = max(breaks[-1], 1.0)
    while edge * 2.0 < radius:
        edge *= 2.0
        breaks.append(edge)
    breaks.append(radius)
    breaks = sorted(set(b for b in breaks if 0.0 <= b <= radius))

    panel_tol = q.tol / (2.0 * len(breaks))
    ring_tol = panel_tol * 1e-2

    def radial(rho: float) -> float:
        return rho * _ring(integrand, center, rho, ring_tol)

    total, err = 0.0, 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e = integrate.quad(radial, lo, hi, epsabs=panel_tol, epsrel=0.0, limit=q.limit)
        total += val
        err += e
    if q.R is None:
        err += q.tol / 10.0
    if err > q.tol:
        warnings.warn(f"quadrature reached error {err:.3e} > requested {q.tol:.3e}", QuadratureWarning,
                      stacklevel=2)
    return QuadResult(total, err)


def integral_I(xi: complex, q: QuadratureSpec = DEFAULT) -> float:
    """``I(xi) = int z1/|z| (1 + |z - xi|^2)^-2 dz`` over the plane."""
    xi = complex(xi)

    def f(x1, x2):
        rad = np.hypot(x1, x2)
        return x1 / rad / (1.0 + (x1 - xi.real) ** 2 + (x2 - xi.imag) ** 2) ** 2

    return integrate_radial_decay(f, 0.0, q, bump=xi, decay=4.0).value


def _abs_kernel(xi: complex, weight: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> Integrand:
    def f(x1, x2):
        return np.hypot(x1 + xi.real, x2 + xi.imag) * weight(x1, x2) / (1.0 + x1 * x1 + x2 * x2) ** 3
    return f


def integral_J(xi1: float, q: QuadratureSpec = DEFAULT) -> float:
    """``J(t) = int |x + (t, 0)| x1 (1 + |x|^2)^-3 dx`` over the plane."""
    xi = complex(float(xi1), 0.0)
    f = _abs_kernel(xi, lambda x1, x2: x1)
    return integrate_radial_decay(f, -xi, q, bump=0.0, decay=4.0).value


def field_F(xi: complex, q: QuadratureSpec = DEFAULT, convention: str = "plus") -> tuple[float, float]:
    """Vector field ``F(xi) = int |x + xi| x (1 + |x|^2)^-3 dx``.

    ``convention="minus"`` uses ``|x - xi|`` instead, which equals ``-F``.
    """
    if convention not in ("plus", "minus"):
        raise ValueError("convention must be 'plus' or 'minus'")
    xi = complex(xi)
    if convention == "minus":
        # |x - xi| is the plus kernel at -xi
        xi = -xi
    f1 = integrate_radial_decay(_abs_kernel(xi, lambda x1, x2: x1), -xi, q, bump=0.0, decay=4.0).value
    f2 = integrate_radial_decay(_abs_kernel(xi, lambda x1, x2: x2), -xi, q, bump=0.0, decay=4.0).value
    return f1, f2


def jacobian_F_on_axis(xi1: float, q: QuadratureSpec = DEFAULT) -> np.ndarray:
    """Jacobian ``dF_i/dxi_j`` at ``xi = (xi1, 0)`` for the ``|x + xi|`` kernel.

    Entries are computed directly from the differentiated integrands
    ``(x_j + xi_j)/|x + xi| * x_i (1 + |x|^2)^-3``.
    """
    xi = complex(float(xi1), 0.0)
    jac = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            def f(x1, x2, i=i, j=j):
                shifted = (x1 + xi.real, x2 + xi.imag)
                rad = np.hypot(*shifted)
                xs = (x1, x2)
                return shifted[j] / rad * xs[i] / (1.0 + x1 * x1 + x2 * x2) ** 3
            jac[i, j] = integrate_radial_decay(f, -xi, q, bump=0.0, decay=4.0).value
    return jac


# --- change of variables x -> x^2 ------------------------------------------

def _shifted_inverse_square(b: complex) -> Callable[[np.ndarray], np.ndarray]:
    return lambda y: (1.0 + np.abs(y - b) ** 2) ** -2


SUBSTITUTION_CATALOG: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "inverse_square": lambda y: (1.0 + np.abs(y) ** 2) ** -2,
    "inverse_cube": lambda y: (1.0 + np.abs(y) ** 2) ** -3,
    "imag_inverse_cube": lambda y: y.imag * (1.0 + np.abs(y) ** 2) ** -3,
    "real_sq_inverse_cube": lambda y: y.real ** 2 * (1.0 + np.abs(y) ** 2) ** -3,
    "shifted_inverse_square": _shifted_inverse_square(0.3 + 0.2j),
}


def square_substitution_check(f: Callable[[np.ndarray], np.ndarray] | str,
                              q: QuadratureSpec = DEFAULT) -> tuple[float, float]:
    """Both sides of ``int |x|^2 f(x^2) dx = 1/2 int f(y) dy``.

    ``f`` is a function of a complex argument or a catalog name. Returns
    ``(lhs, rhs)``.
    """
    if isinstance(f, str):
        try:
            f = SUBSTITUTION_CATALOG[f]
        except KeyError:
            raise ValueError(f"unknown catalog entry {f!r}; known: {sorted(SUBSTITUTION_CATALOG)}") from None

    def lhs_integrand(x1, x2):
        x = x1 + 1j * x2
        return np.abs(x) ** 2 * f(x * x)

    def rhs_integrand(y1, y2):
        return f(y1 + 1j * y2)

    # |x|^2 f(x^2) decays twice as fast as f
    lhs = integrate_radial_decay(lhs_integrand, 0.0, q, decay=6.0).value
    rhs = 0.5 * integrate_radial_decay(rhs_integrand, 0.0, q, decay=4.0).value
    return lhs, rhs


# --- Monte Carlo oracle -----------------------------------------------------

def _sample_cauchy(rng: np.random.Generator, n: int, center: complex) -> tuple[np.ndarray, np.ndarray]:
    """Draw from the density ``(1/pi)(1 + |z - c|^2)^-2``."""
    u = rng.random(n)
    rho = np.sqrt(u / (1.0 - u))
    th = rng.random(n) * 2.0 * np.pi
    return center.real + rho * np.cos(th), center.imag + rho * np.sin(th)


def monte_carlo_estimates(samples: int = 10_000_000, seed: int = 0, xi: complex = 1.0,
                          chunk: int = 1_000_000) -> dict[str, tuple[float, float]]:
    """Importance-sampled estimates of ``I(xi)``, ``J(Re xi)`` and ``F(xi)``.

    Returns a mapping from name to ``(mean, standard_error)``. Samples come
    from a planar Cauchy-type density whose tails match the integrands, so
    every estimator has finite variance.
    """
    rng = np.random.default_rng(seed)
    xi = complex(xi)
    names = ("I", "J", "F1", "F2")
    s1 = dict.fromkeys(names, 0.0)
    s2 = dict.fromkeys(names, 0.0)
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        # I: sample around xi, ratio f/p = pi * z1/|z|
        z1, z2 = _sample_cauchy(rng, n, xi)
        vals = {"I": np.pi * z1 / np.hypot(z1, z2)}
        # J and F: sample around 0, ratio = pi |x + xi| x_i / (1 + |x|^2)
        x1, x2 = _sample_cauchy(rng, n, 0.0)
        base = np.pi * np.hypot(x1 + xi.real, x2 + xi.imag) / (1.0 + x1 * x1 + x2 * x2)
        vals["F1"] = base * x1
        vals["F2"] = base * x2
        base_j = np.pi * np.hypot(x1 + xi.real, x2) / (1.0 + x1 * x1 + x2 * x2)
        vals["J"] = base_j * x1
        for k in names:
            s1[k] += float(vals[k].sum())
            s2[k] += float((vals[k] ** 2).sum())
        done += n
    out = {}
    for k in names:
        mean = s1[k] / samples
        var = s2[k] / samples - mean * mean
        out[k] = (mean, float(np.sqrt(max(var, 0.0) / samples)))
    return out
