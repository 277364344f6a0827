"""Scaling laws in ``lam`` and blow-up profile diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .bubbles import eval_W_lambda
from .disk_spectral import DiskField, DiskGrid, evaluate, harmonic_extension, integrate_disk
from .potential import Potential

__all__ = [
    "ScalingFit",
    "InsufficientSpanError",
    "MaximumOnBoundaryError",
    "fit_loglog",
    "weight_norm_theory",
    "error_norm_theory",
    "weight_norm_scaling",
    "error_norm_scaling",
    "error_remainder_norms",
    "bubble_fit",
    "simple_blowup_indicator",
    "non_simple_suspected",
]


class InsufficientSpanError(ValueError):
    """Too few samples, or they span less than two decades."""


class MaximumOnBoundaryError(ValueError):
    """The field attains its maximum on the circle: not a concentrating profile."""


@dataclass
class ScalingFit:
    """Least-squares fit of ``log(value)`` against ``log(lam)``."""

    lambdas: list
    values: list
    slope: float
    intercept: float
    theory: float
    r2: float
    max_deviation: float
    rms_log_residual: float
    label: str = ""
    extra: dict = field(default_factory=dict)

    def model(self, lam) -> np.ndarray:
        return np.exp(self.intercept) * np.asarray(lam, dtype=float) ** self.slope

    @property
    def well_fitted(self) -> bool:
        """``R^2 >= 0.99``, or a flat law fitted to 1% in log space.

        ``R^2`` compares against the spread of the data and carries no
        information when the data are nearly constant.
        """
        return self.r2 >= 0.99 or self.rms_log_residual <= 0.01

    def matches(self, tol: float = 0.05) -> bool:
        return abs(self.slope - self.theory) <= tol and self.well_fitted

    def at_least(self, tol: float = 0.05) -> bool:
        """One-sided law: measured decay at least as fast as theory, within ``tol``."""
        return self.slope >= self.theory - tol and self.well_fitted

    def constant_drift(self) -> float:
        """Relative spread of ``value / lam**theory`` across the samples."""
        c = np.asarray(self.values) / np.asarray(self.lambdas) ** self.theory
        return float((c.max() - c.min()) / np.abs(c).mean())

    def summary(self) -> str:
        return (f"{self.label} slope={self.slope:.6f} theory={self.theory:.6f} r2={self.r2:.6f} "
                f"max_dev={self.max_deviation:.3e} n={len(self.lambdas)}")

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        lines = ["lambda,value,model"]
        for lam, val, mod in zip(self.lambdas, self.values, self.model(self.lambdas)):
            lines.append(f"{lam:.12e},{val:.12e},{mod:.12e}")
        lines.append("# " + self.summary())
        path.write_text("\n".join(lines) + "\n")
        return path


def fit_loglog(lambdas: Sequence[float], values: Sequence[float], theory: float, label: str = "") -> ScalingFit:
    lam = np.asarray(lambdas, dtype=float)
    val = np.asarray(values, dtype=float)
    if lam.size < 4:
        raise InsufficientSpanError(f"need at least 4 samples, got {lam.size}")
    if np.log10(lam.max() / lam.min()) < 2.0 - 1e-9:
        raise InsufficientSpanError("samples must span at least two decades")
    if np.any(val <= 0) or np.any(lam <= 0):
        raise ValueError("log-log fit needs positive data")
    x, y = np.log(lam), np.log(val)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return ScalingFit(lambdas=lam.tolist(), values=val.tolist(), slope=float(slope), intercept=float(intercept),
                      theory=float(theory), r2=r2, max_deviation=float(np.abs(resid).max()),
                      rms_log_residual=float(np.sqrt(ss_res / lam.size)), label=label)


def weight_norm_theory(s: float, p: float) -> float:
    return s / 4.0 - (p - 1.0) / (2.0 * p)


def error_norm_theory(p: float) -> float:
    return 0.75 - (p - 1.0) / (2.0 * p)


def _lp_norm(grid: DiskGrid, vals: np.ndarray, p: float) -> float:
    return integrate_disk(DiskField(grid, np.abs(vals) ** p)) ** (1.0 / p)


def _grid_for(lam: float, n_r: int, n_theta: int) -> DiskGrid:
    return DiskGrid.for_lambda(lam, n_r, n_theta)


def _resolve_b_rule(b_rule, V: Potential | None) -> Callable[[float], complex]:
    if callable(b_rule):
        return b_rule
    if b_rule is not None:
        return lambda lam: complex(b_rule)
    if V is None:
        return lambda lam: 0j
    from .reduction import predict_b
    return lambda lam: predict_b(lam, *V.gammas)


def weight_norm_scaling(s: float, p: float, lambdas: Sequence[float], b_rule=None,
                        n_r: int = 128, n_theta: int = 128) -> ScalingFit:
    """``L^p`` norm of ``|x|^(2+s) e^{W}`` against ``lam``.

    ``b_rule`` maps ``lam`` to the bubble location (default ``b = 0``).
    """
    if not 0 <= s <= 3 or p < 1:
        raise ValueError("need 0 <= s <= 3 and p >= 1")
    rule = _resolve_b_rule(b_rule, None)
    values = []
    for lam in lambdas:
        g = _grid_for(lam, n_r, n_theta)
        z = g.z
        f = np.abs(z) ** (2.0 + s) * np.exp(eval_W_lambda(lam, rule(lam), z))
        values.append(_lp_norm(g, f, p))
    return fit_loglog(lambdas, values, weight_norm_theory(s, p), label=f"weight_norm s={s:g} p={p:g}")


def _error_term(grid: DiskGrid, lam: float, V: Potential, b: complex) -> tuple[np.ndarray, np.ndarray]:
    z = grid.z
    w = eval_W_lambda(lam, b, z)
    pw = w - harmonic_extension(grid, w[-1]).values
    base = np.abs(z) ** 2 * np.exp(w)
    return base - lam * V(z) * np.abs(z) ** 2 * np.exp(pw), base


def error_norm_scaling(p: float, V: Potential, lambdas: Sequence[float], b_rule=None,
                       n_r: int = 128, n_theta: int = 128) -> ScalingFit:
    """``L^p`` norm of ``R = |x|^2 e^W - lam V |x|^2 e^{PW}`` with the exact projection."""
    rule = _resolve_b_rule(b_rule, V)
    values = []
    for lam in lambdas:
        g = _grid_for(lam, n_r, n_theta)
        r, _ = _error_term(g, lam, V, rule(lam))
        values.append(_lp_norm(g, r, p))
    return fit_loglog(lambdas, values, error_norm_theory(p), label=f"error_norm p={p:g}")


def error_remainder_norms(V: Potential, lambdas: Sequence[float], coefficient: float = -0.5, b_rule=None,
                          n_r: int = 128, n_theta: int = 128) -> tuple[np.ndarray, np.ndarray]:
    """``L^1`` norms of ``R`` and of ``R - coefficient (g1 x1^2 + g2 x2^2) |x|^2 e^W``.

    The second-order Taylor term of ``V`` enters ``R`` with coefficient
    ``-1/2``; subtracting it must leave a remainder that decays faster.
    """
    rule = _resolve_b_rule(b_rule, V)
    full, rem = [], []
    g1, g2 = V.gammas
    for lam in lambdas:
        g = _grid_for(lam, n_r, n_theta)
        r, base = _error_term(g, lam, V, rule(lam))
        lead = coefficient * (g1 * g.x1**2 + g2 * g.x2**2) * base
        full.append(_lp_norm(g, r, 1.0))
        rem.append(_lp_norm(g, r - lead, 1.0))
    return np.array(full), np.array(rem)


# --- profile diagnostics ---------------------------------------------------

def _locate_maximum(v: DiskField) -> complex:
    g = v.grid
    i, j = np.unravel_index(np.argmax(v.values), v.values.shape)
    if i == g.n_r - 1:
        raise MaximumOnBoundaryError("maximum attained on the boundary")
    z0 = g.z[i, j]
    # quadratic fit along the three-point stencils in r and theta as a start
    h = max(g.r[i] - (g.r[i - 1] if i > 0 else 0.0), 1e-6)
    dth = g.theta[1]
    simplex = np.array([[z0.real, z0.imag],
                        [z0.real + 0.5 * h, z0.imag],
                        [z0.real, z0.imag + 0.5 * max(h, g.r[i] * dth)]])

    def neg(p):
        w = complex(p[0], p[1])
        if abs(w) > 1.0:
            return np.inf
        return -float(evaluate(v, w)[0])

    res = optimize.minimize(neg, simplex[0], method="Nelder-Mead",
                            options={"initial_simplex": simplex, "xatol": 1e-13, "fatol": 1e-15,
                                     "maxiter": 2000})
    best = complex(res.x[0], res.x[1])
    if -res.fun < v.values[i, j]:
        best = z0
    return best


def bubble_fit(v: DiskField, lam: float, V: Potential | None = None) -> tuple[float, complex, float]:
    """Fit the single-bubble profile to ``v``.

    Locates the maximum point ``beta`` (grid maximum refined on the
    spectral interpolant) and returns ``tau = lam V(beta) e^{v(beta)}/32``,
    ``b = beta^2`` and the sup over the grid of ``|v - model|`` with
    ``model = log(32 tau / (1 + tau |x^2 - b|^2)^2) - log(lam V(beta))``.
    """
    beta = _locate_maximum(v)
    vb = float(evaluate(v, beta)[0])
    vbeta = float(V(beta)) if V is not None else 1.0
    tau = lam * vbeta * np.exp(vb) / 32.0
    b = beta * beta
    z = v.grid.z
    model = np.log(32.0 * tau) - 2.0 * np.log1p(tau * np.abs(z * z - b) ** 2) - np.log(lam * vbeta)
    return float(tau), complex(b), float(np.abs(v.values - model).max())


def simple_blowup_indicator(v: DiskField, lam: float) -> float:
    """``sup (v + 4 log|x| + log lam)`` over the grid."""
    r = v.grid.r[:, None]
    return float((v.values + 4.0 * np.log(r) + np.log(lam)).max())


def non_simple_suspected(lambdas: Sequence[float], indicators: Sequence[float], max_variation: float = 2.0,
                         decades: float = 2.0) -> bool:
    """Flag growth of the indicator over the last ``decades`` of ``lam``."""
    lam = np.asarray(lambdas, dtype=float)
    ind = np.asarray(indicators, dtype=float)
    window = lam <= lam.min() * 10.0**decades
    sel = ind[window]
    return bool(sel.max() - sel.min() > max_variation)
