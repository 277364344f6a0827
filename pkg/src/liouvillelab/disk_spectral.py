"""Spectral discretization of scalar fields on the closed unit disk.

Fields live on a polar tensor grid: equispaced angles times a radial
Chebyshev grid that never touches the origin. The radial grid is the
positive half of a Chebyshev grid on [-1, 1] with an even number of
points, so ``r = 0`` falls strictly between two nodes. Each angular
Fourier mode ``m`` is extended to negative radii with parity ``(-1)^m``,
which removes the coordinate singularity at the origin. An odd sinh map
``r = sinh(a s) / sinh(a)`` pulls nodes towards the origin, where
concentrating solutions develop features of width ``lambda**(1/4)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "DiskGrid",
    "DiskField",
    "default_stretch",
    "laplacian",
    "apply_laplacian",
    "dirichlet_solve",
    "solve_poisson",
    "batched_mode_solve",
    "harmonic_extension",
    "project",
    "gradient_at_origin",
    "value_at_origin",
    "integrate_disk",
    "integrate_boundary",
    "boundary_normal_derivative",
    "evaluate",
    "write_field_csv",
    "read_field_csv",
]


def _cheb(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev differentiation matrix on ``n + 1`` Gauss-Lobatto points."""
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.hstack([2.0, np.ones(n - 1), 2.0]) * (-1.0) ** np.arange(n + 1)
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n + 1))
    d -= np.diag(d.sum(axis=1))
    return d, x


def default_stretch(lam: float) -> float:
    """Radial map parameter that resolves a bubble of scale ``lam**(1/4)``.

    Tuned on the exact radial solution: at ``n_r = 128`` it keeps the
    error near 1e-11 for ``lam`` between 1e-1 and 1e-5.
    """
    return float(np.clip(3.5 + 0.5 * np.log10(1.0 / lam), 2.0, 8.0))


class DiskGrid:
    """Polar collocation grid on the unit disk.

    Parameters
    ----------
    n_r : int
        Number of radial nodes in (0, 1]; the last node is ``r = 1``.
    n_theta : int
        Number of equispaced angles, even.
    stretch : float
        Parameter ``a`` of the radial map ``sinh(a s)/sinh(a)``; 0 means
        no map.

    Notes
    -----
    Radii are stored in ascending order. Values are arrays of shape
    ``(n_r, n_theta)``. Operators are assembled lazily and cached; the
    grid itself is immutable.
    """

    def __init__(self, n_r: int = 128, n_theta: int = 256, stretch: float = 5.0):
        n_r, n_theta = int(n_r), int(n_theta)
        if n_r < 8:
            raise ValueError(f"n_r must be >= 8, got {n_r}")
        if n_theta < 8 or n_theta % 2:
            raise ValueError(f"n_theta must be an even integer >= 8, got {n_theta}")
        if not np.isfinite(stretch) or stretch < 0:
            raise ValueError(f"stretch must be finite and >= 0, got {stretch}")
        self.n_r = n_r
        self.n_theta = n_theta
        self.stretch = float(stretch)

        n = 2 * n_r - 1
        d, s_all = _cheb(n)
        self._n = n
        self._s_all = s_all
        self._d_full = d
        # ascending radii: node j = n_r - 1 has the smallest positive s
        self._pos = np.arange(n_r)[::-1]
        self._neg = n - self._pos
        s = s_all[self._pos]
        self.s = s
        a = self.stretch
        if a == 0.0:
            g, g1, g2 = s.copy(), np.ones_like(s), np.zeros_like(s)
        else:
            sh = np.sinh(a)
            g = np.sinh(a * s) / sh
            g1 = a * np.cosh(a * s) / sh
            g2 = a * a * np.sinh(a * s) / sh
        g[-1] = 1.0
        self.r = g
        self._g1 = g1
        self._g2 = g2
        self.theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
        self.modes = np.arange(n_theta // 2 + 1)

    # --- basic geometry -------------------------------------------------
    @property
    def key(self) -> tuple[int, int, float]:
        return (self.n_r, self.n_theta, self.stretch)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DiskGrid) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"DiskGrid(n_r={self.n_r}, n_theta={self.n_theta}, stretch={self.stretch:g})"

    @classmethod
    def for_lambda(cls, lam: float, n_r: int = 128, n_theta: int = 256) -> "DiskGrid":
        return cls(n_r, n_theta, default_stretch(lam))

    @cached_property
    def z(self) -> np.ndarray:
        """Grid points as complex numbers, shape ``(n_r, n_theta)``."""
        return self.r[:, None] * np.exp(1j * self.theta[None, :])

    @property
    def x1(self) -> np.ndarray:
        return self.z.real

    @property
    def x2(self) -> np.ndarray:
        return self.z.imag

    @cached_property
    def min_radial_spacing(self) -> float:
        return float(min(self.r[0], np.diff(self.r).min()))

    def map_inverse(self, r: np.ndarray) -> np.ndarray:
        """Computational coordinate ``s`` for physical radius ``r``."""
        r = np.asarray(r, dtype=float)
        a = self.stretch
        if a == 0.0:
            return r
        return np.arcsinh(r * np.sinh(a)) / a

    # --- radial operators -----------------------------------------------
    def _fold(self, mat: np.ndarray, parity: int) -> np.ndarray:
        pos, neg = self._pos, self._neg
        return mat[np.ix_(pos, pos)] + parity * mat[np.ix_(pos, neg)]

    @cached_property
    def _radial_ops(self) -> dict[int, tuple[np.ndarray, np.ndarray]]:
        d = self._d_full
        d2 = d @ d
        g1, g2 = self._g1, self._g2
        ops = {}
        for parity in (1, -1):
            ds = self._fold(d, parity)
            d2s = self._fold(d2, parity)
            d1r = ds / g1[:, None]
            d2r = d2s / g1[:, None] ** 2 - (g2 / g1**3)[:, None] * ds
            ops[parity] = (d1r, d2r)
        return ops

    def radial_derivative_matrix(self, parity: int) -> np.ndarray:
        """``d/dr`` acting on a mode with the given parity (+1 even, -1 odd)."""
        return self._radial_ops[parity][0]

    @cached_property
    def _bessel_part(self) -> dict[int, np.ndarray]:
        # D2 + (1/r) D1 for each parity
        out = {}
        for parity, (d1r, d2r) in self._radial_ops.items():
            out[parity] = d2r + d1r / self.r[:, None]
        return out

    def mode_parity(self, m: int) -> int:
        return 1 if m % 2 == 0 else -1

    def mode_laplacian(self, m: int) -> np.ndarray:
        """Dense radial Laplacian for angular mode ``m`` (all radial nodes)."""
        return self._bessel_part[self.mode_parity(m)] - np.diag(m * m / self.r**2)

    @cached_property
    def interior_mode_laplacians(self) -> np.ndarray:
        """Stack of radial Laplacians restricted to interior nodes.

        Shape ``(n_modes, n_r - 1, n_r - 1)``. Dirichlet data at ``r = 1``
        drops out when the boundary value is zero.
        """
        n_int = self.n_r - 1
        out = np.empty((self.modes.size, n_int, n_int))
        for m in self.modes:
            out[m] = self.mode_laplacian(int(m))[:n_int, :n_int]
        return out

    @cached_property
    def _dirichlet_inverses(self) -> np.ndarray:
        return np.linalg.inv(-self.interior_mode_laplacians)

    # --- quadrature -----------------------------------------------------
    @cached_property
    def radial_weights(self) -> np.ndarray:
        """Weights ``w_i`` with ``sum_i w_i F(r_i) ~ int_0^1 F(r) r dr``."""
        # int_0^1 F(g(s)) g g' ds with E(s) = F g g'/s even in s; substitute
        # u = s^2 and integrate exactly on polynomials in u at the nodes u_i.
        u = self.s**2
        t = 2.0 * u - 1.0
        k = np.arange(self.n_r)
        vand = np.cos(np.outer(np.arccos(np.clip(t, -1.0, 1.0)), k))
        # int_0^1 T_k(2u - 1) du
        moments = np.where(k % 2 == 0, 1.0 / (1.0 - k.astype(float) ** 2 + (k == 1)), 0.0)
        omega = np.linalg.solve(vand.T, moments)
        return omega * self.r * self._g1 / (2.0 * self.s)

    @cached_property
    def area_weights(self) -> np.ndarray:
        w = self.radial_weights[:, None] * np.full(self.n_theta, 2.0 * np.pi / self.n_theta)
        w.setflags(write=False)
        return w

    @cached_property
    def boundary_weights(self) -> np.ndarray:
        w = np.full(self.n_theta, 2.0 * np.pi / self.n_theta)
        w.setflags(write=False)
        return w

    # --- interpolation --------------------------------------------------
    @cached_property
    def _bary_weights(self) -> np.ndarray:
        w = (-1.0) ** np.arange(self._n + 1)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def _lagrange_rows(self, s: np.ndarray, derivative: bool = False) -> np.ndarray:
        """Lagrange basis (or its derivative) on the full grid at points ``s``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        nodes = self._s_all
        w = self._bary_weights
        diff = s[:, None] - nodes[None, :]
        hit = diff == 0.0
        diff = np.where(hit, 1.0, diff)
        q = w / diff
        ell = q / q.sum(axis=1, keepdims=True)
        if derivative:
            inv = 1.0 / diff
            ell = ell * (inv.sum(axis=1, keepdims=True) - inv)
            # exact nodes: fall back to the differentiation matrix rows
            rows, cols = np.nonzero(hit)
            ell[rows] = self._d_full[cols]
            return ell
        rows, cols = np.nonzero(hit)
        ell[rows] = 0.0
        ell[rows, cols] = 1.0
        return ell

    def radial_interpolation(self, r: np.ndarray, parity: int, derivative: bool = False) -> np.ndarray:
        """Folded interpolation rows mapping nodal mode values to radii ``r``."""
        s = self.map_inverse(r)
        rows = self._lagrange_rows(s, derivative)
        folded = rows[:, self._pos] + parity * rows[:, self._neg]
        if derivative and self.stretch != 0.0:
            a = self.stretch
            gp = a * np.cosh(a * np.atleast_1d(s)) / np.sinh(a)
            folded = folded / gp[:, None]
        return folded

    # --- fields ---------------------------------------------------------
    def field(self, values: np.ndarray) -> "DiskField":
        return DiskField(self, values)

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> "DiskField":
        """Field from a function of the complex coordinate ``z``."""
        return DiskField(self, np.broadcast_to(func(self.z), self.z.shape))

    def zeros(self) -> "DiskField":
        return DiskField(self, np.zeros((self.n_r, self.n_theta)))


@dataclass(frozen=True, eq=False)
class DiskField:
    """Real scalar field sampled on a :class:`DiskGrid`.

    The value array is copied and frozen on construction.
    """

    grid: DiskGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        shape = (self.grid.n_r, self.grid.n_theta)
        if vals.shape != shape:
            raise ValueError(f"values have shape {vals.shape}, grid expects {shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @cached_property
    def modes(self) -> np.ndarray:
        """Angular Fourier coefficients, normalized so mode 0 is the mean."""
        c = np.fft.rfft(self.values, axis=1) / self.grid.n_theta
        c.setflags(write=False)
        return c

    @property
    def boundary_values(self) -> np.ndarray:
        return self.values[-1]

    def max(self) -> float:
        return float(self.values.max())

    def _coerce(self, other):
        if isinstance(other, DiskField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return DiskField(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return DiskField(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return DiskField(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other):
        return DiskField(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return DiskField(self.grid, -self.values)


def _apply_modes(grid: DiskGrid, coeffs: np.ndarray, mats: dict[int, np.ndarray]) -> np.ndarray:
    """Apply parity-dependent radial matrices column-wise to mode coefficients."""
    out = np.empty((mats[1].shape[0], coeffs.shape[1]), dtype=coeffs.dtype)
    even = grid.modes % 2 == 0
    out[:, even] = mats[1] @ coeffs[:, even]
    out[:, ~even] = mats[-1] @ coeffs[:, ~even]
    return out


def _to_values(grid: DiskGrid, coeffs: np.ndarray) -> np.ndarray:
    return np.fft.irfft(coeffs * grid.n_theta, n=grid.n_theta, axis=1)


def batched_mode_solve(mats: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Apply a stack of real per-mode matrices to complex mode columns.

    ``mats`` has shape ``(n_modes, k, k)`` and ``coeffs`` shape
    ``(k, n_modes)``.
    """
    stacked = np.stack([coeffs.real.T, coeffs.imag.T], axis=-1)
    out = np.matmul(mats, stacked)
    return (out[..., 0] + 1j * out[..., 1]).T


def apply_laplacian(grid: DiskGrid, values: np.ndarray) -> np.ndarray:
    """Laplacian of a raw value array; see :func:`laplacian`."""
    c = np.fft.rfft(values, axis=1) / grid.n_theta
    out = _apply_modes(grid, c, grid._bessel_part)
    out -= (grid.modes.astype(float) ** 2)[None, :] / grid.r[:, None] ** 2 * c
    return _to_values(grid, out)


def laplacian(f: DiskField) -> DiskField:
    """Polar Laplacian of ``f``, evaluated spectrally at every node."""
    return DiskField(f.grid, apply_laplacian(f.grid, f.values))


def solve_poisson(grid: DiskGrid, rhs: np.ndarray) -> np.ndarray:
    """Raw-array version of :func:`dirichlet_solve`."""
    c = np.fft.rfft(np.asarray(rhs, dtype=float)[:-1], axis=1) / grid.n_theta
    u = np.zeros((grid.n_r, grid.modes.size), dtype=complex)
    u[:-1] = batched_mode_solve(grid._dirichlet_inverses, c)
    return _to_values(grid, u)


def dirichlet_solve(rhs: DiskField | np.ndarray, grid: DiskGrid | None = None) -> DiskField:
    """Solve ``-Delta u = rhs`` in the disk with ``u = 0`` on the boundary.

    Only interior values of ``rhs`` are used.
    """
    if isinstance(rhs, DiskField):
        grid = rhs.grid
        rhs = rhs.values
    elif grid is None:
        raise ValueError("grid is required when rhs is an array")
    return DiskField(grid, solve_poisson(grid, rhs))


def harmonic_extension(grid: DiskGrid, boundary: np.ndarray) -> DiskField:
    """Harmonic function in the disk with the given values at ``r = 1``.

    Mode ``m`` of the boundary data extends as ``r**m``, which is exact.
    """
    boundary = np.asarray(boundary, dtype=float)
    if boundary.shape != (grid.n_theta,):
        raise ValueError(f"boundary data must have shape ({grid.n_theta},)")
    c = np.fft.rfft(boundary) / grid.n_theta
    coeffs = grid.r[:, None] ** grid.modes[None, :].astype(float) * c[None, :]
    return DiskField(grid, _to_values(grid, coeffs))


def project(f: DiskField) -> DiskField:
    """Projection onto zero boundary data with the same Laplacian."""
    return f - harmonic_extension(f.grid, f.boundary_values)


def value_at_origin(f: DiskField) -> float:
    g = f.grid
    row = g.radial_interpolation(np.array([0.0]), parity=1)[0]
    return float(row @ f.modes[:, 0].real)


def gradient_at_origin(f: DiskField) -> tuple[float, float]:
    """Cartesian gradient at the origin from the first angular mode."""
    g = f.grid
    row = g.radial_interpolation(np.array([0.0]), parity=-1, derivative=True)[0]
    d = row @ f.modes[:, 1]
    return float(2.0 * d.real), float(-2.0 * d.imag)


def integrate_disk(f: DiskField, weight: Callable[[np.ndarray], np.ndarray] | np.ndarray | None = None) -> float:
    """Area integral of ``f * weight`` over the unit disk.

    ``weight`` may be a function of the complex coordinate or an array on
    the grid.
    """
    vals = f.values
    if weight is not None:
        w = weight(f.grid.z) if callable(weight) else weight
        vals = vals * w
    return float(np.sum(vals * f.grid.area_weights))


def integrate_boundary(f: DiskField | np.ndarray, weight: Callable[[np.ndarray], np.ndarray] | np.ndarray | None = None,
                       grid: DiskGrid | None = None) -> float:
    """Integral over the unit circle of boundary data times ``weight``.

    ``f`` is a field (its ``r = 1`` values are used) or an array over the
    angular nodes. ``weight`` is a function of the angle or an array.
    """
    if isinstance(f, DiskField):
        grid = f.grid
        vals = f.boundary_values
    else:
        if grid is None:
            raise ValueError("grid is required when f is an array")
        vals = np.asarray(f, dtype=float)
    if weight is not None:
        w = weight(grid.theta) if callable(weight) else weight
        vals = vals * w
    return float(np.sum(vals * grid.boundary_weights))


def boundary_normal_derivative(f: DiskField) -> np.ndarray:
    """Outward normal derivative at each angular node of the boundary."""
    g = f.grid
    mats = {p: g.radial_derivative_matrix(p)[-1:] for p in (1, -1)}
    c = _apply_modes(g, f.modes, mats)
    return np.fft.irfft(c[0] * g.n_theta, n=g.n_theta)


def evaluate(f: DiskField, points: np.ndarray | complex) -> np.ndarray:
    """Spectral interpolation of ``f`` at arbitrary points of the disk.

    ``points`` are complex numbers ``x1 + i x2``.
    """
    g = f.grid
    z = np.atleast_1d(np.asarray(points, dtype=complex))
    shape = z.shape
    z = z.ravel()
    rad = np.abs(z)
    if np.any(rad > 1.0 + 1e-12):
        raise ValueError("points must lie in the closed unit disk")
    th = np.angle(z)
    c = f.modes
    even = g.modes % 2 == 0
    local = np.empty((z.size, g.modes.size), dtype=complex)
    local[:, even] = g.radial_interpolation(rad, 1) @ c[:, even]
    local[:, ~even] = g.radial_interpolation(rad, -1) @ c[:, ~even]
    m = g.modes.astype(float)
    scale = np.full(m.size, 2.0)
    scale[0] = 1.0
    scale[-1] = 1.0
    phase = np.exp(1j * th[:, None] * m[None, :])
    vals = np.sum(scale * (local * phase).real, axis=1)
    return vals.reshape(shape)


# --- serialization ------------------------------------------------------

def write_field_csv(f: DiskField, path: str | Path, metadata: dict | None = None) -> Path:
    """Write ``r, theta, value`` rows plus a JSON sidecar with grid metadata."""
    path = Path(path)
    g = f.grid
    rr, tt = np.meshgrid(g.r, g.theta, indexing="ij")
    lines = ["r,theta,value"]
    for r, t, v in zip(rr.ravel(), tt.ravel(), f.values.ravel()):
        lines.append(f"{r:.17g},{t:.17g},{v:.17g}")
    path.write_text("\n".join(lines) + "\n")
    meta = {"n_r": g.n_r, "n_theta": g.n_theta, "stretch": g.stretch, "layout": "row-major by radius"}
    if metadata:
        meta.update(metadata)
    _sidecar(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def read_field_csv(path: str | Path) -> tuple[DiskField, dict]:
    path = Path(path)
    meta = json.loads(_sidecar(path).read_text())
    grid = DiskGrid(meta["n_r"], meta["n_theta"], meta["stretch"])
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape != (grid.n_r * grid.n_theta, 3):
        raise ValueError(f"{path}: expected {grid.n_r * grid.n_theta} rows of r,theta,value")
    return DiskField(grid, data[:, 2].reshape(grid.n_r, grid.n_theta)), meta

