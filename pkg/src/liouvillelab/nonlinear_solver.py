"""Newton, bordered Lyapunov-Schmidt and continuation solvers.

The boundary value problem is ``-Delta v = lam V |x|^2 e^v`` in the unit
disk with ``v = 0`` on the circle. Every linear solve uses matrix-free
GMRES on the interior nodes, preconditioned by the exact per-mode inverse
of ``-Delta - qbar(r)``, where ``qbar`` is the angular mean of the
linearized potential ``q = lam V |x|^2 e^v``.

Residuals are measured in lifted form, ``max |(-Delta)^{-1} F(v)|``. The
raw collocation residual multiplies roundoff by the size of the
second-derivative matrix near the origin (about 1e8 on the default grid),
so it cannot be driven to 1e-10. The lifted residual is the same quantity
measured in the norm of the solution.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .asymptotics import bubble_fit
from .bubbles import eval_W_lambda, eval_kernel_Z
from .disk_spectral import (DiskField, DiskGrid, apply_laplacian, batched_mode_solve, default_stretch,
                            harmonic_extension, solve_poisson)
from .potential import Potential
from .reduction import NoBlowUpFamilyError, classify, predict_b

__all__ = [
    "Potential",
    "SolverConfig",
    "SolveResult",
    "BorderedResult",
    "LinearizedOperator",
    "SolverError",
    "InnerDivergenceError",
    "RootFindError",
    "ContinuationError",
    "NearSingularJacobianWarning",
    "lifted_residual",
    "newton_solve",
    "bordered_solve",
    "outer_reduction",
    "continuation_run",
    "lambda_schedule",
]

log = logging.getLogger(__name__)

# lifted residuals below this are at double-precision roundoff on the default grids
_ROUNDOFF = 1e-13


class SolverError(RuntimeError):
    """A nonlinear or linear solve failed."""


class InnerDivergenceError(SolverError):
    pass


class RootFindError(SolverError):
    """The outer root-find in ``b`` failed; ``samples`` holds a diagnostic grid of ``c(b)``."""

    def __init__(self, msg: str, samples: list | None = None):
        super().__init__(msg)
        self.samples = samples or []


class ContinuationError(SolverError):
    """Continuation aborted; ``results`` holds the steps that converged."""

    def __init__(self, msg: str, results: list):
        super().__init__(msg)
        self.results = results


class NearSingularJacobianWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances, schedule and grid for the nonlinear solvers.

    ``stretch=None`` picks the radial map for the smallest ``lam`` of the
    schedule.
    """

    tol: float = 1e-10
    max_iter: int = 25
    max_halvings: int = 10
    lambda_start: float = 1e-1
    lambda_end: float = 1e-4
    ratio: float = 0.7
    n_r: int = 128
    n_theta: int = 256
    stretch: float | None = None
    box_M: float = 20.0
    basin: float = 2.0
    inner_tol: float = 1e-11
    inner_max_iter: int = 50
    outer_tol: float = 1e-8
    outer_max_iter: int = 20
    gmres_rtol: float = 1e-12
    max_refinements: int = 3
    polish_steps: int = 1

    def __post_init__(self):
        for name in ("tol", "inner_tol", "outer_tol", "gmres_rtol", "lambda_start", "lambda_end", "box_M",
                     "basin"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.lambda_end > self.lambda_start:
            raise ValueError("lambda_end must not exceed lambda_start")
        if self.max_iter < 1 or self.max_halvings < 0 or self.polish_steps < 0:
            raise ValueError("iteration limits must be positive")

    def grid(self) -> DiskGrid:
        a = self.stretch if self.stretch is not None else default_stretch(self.lambda_end)
        return DiskGrid(self.n_r, self.n_theta, a)


@dataclass
class SolveResult:
    lam: float
    field: DiskField
    newton_iterations: int
    final_residual_norm: float
    converged: bool
    residual_history: list = field(default_factory=list)
    tau: float | None = None
    b_fit: complex | None = None
    fit_sup_err: float | None = None
    multipliers: tuple[float, float] | None = None
    b_reduction: complex | None = None
    phi: DiskField | None = None


@dataclass
class BorderedResult:
    phi: DiskField
    c: np.ndarray
    iterations: int
    constraint_residuals: np.ndarray
    residual: float


# --- linear algebra -----------------------------------------------------------

class LinearizedOperator:
    """``-Delta - q`` on interior nodes with zero Dirichlet data.

    Parameters
    ----------
    grid : DiskGrid
    q : ndarray
        Multiplication potential on the full grid.
    rtol : float
        GMRES tolerance relative to the preconditioned right side.
    deflation : list of ndarray, optional
        Full-grid vectors spanning the near-kernel (for a concentrated
        bubble, the projected kernel functions). GMRES then runs on the
        deflated system, which removes the small eigenvalues that
        otherwise cost hundreds of iterations.
    """

    def __init__(self, grid: DiskGrid, q: np.ndarray, rtol: float = 1e-12,
                 deflation: list[np.ndarray] | None = None):
        self.grid = grid
        self.q = np.asarray(q, dtype=float)
        self.rtol = rtol
        ni = grid.n_r - 1
        self._shape = (ni, grid.n_theta)
        qbar = self.q[:-1].mean(axis=1)
        self._pinv = np.linalg.inv(-grid.interior_mode_laplacians - np.diag(qbar)[None])
        n = ni * grid.n_theta
        self._A = LinearOperator((n, n), matvec=self._matvec, dtype=float)
        # left-preconditioned operator: residuals are measured after the
        # per-mode inverse, which removes the roundoff floor of the raw
        # collocation residual
        self._PA = LinearOperator((n, n), matvec=lambda x: self._precondition(self._matvec(x)), dtype=float)
        self.gmres_iterations = 0
        self._U = None
        if deflation:
            u = np.stack([np.asarray(d)[:-1].ravel() for d in deflation], axis=1)
            mu = np.stack([self._PA @ u[:, k] for k in range(u.shape[1])], axis=1)
            self._U, self._MU = u, mu
            self._Einv = np.linalg.inv(u.T @ mu)
            self._deflated = LinearOperator((n, n), matvec=lambda x: self._project(self._PA @ x), dtype=float)

    def _project(self, y: np.ndarray) -> np.ndarray:
        return y - self._MU @ (self._Einv @ (self._U.T @ y))

    def _full(self, x: np.ndarray) -> np.ndarray:
        u = np.zeros((self.grid.n_r, self.grid.n_theta))
        u[:-1] = x.reshape(self._shape)
        return u

    def _matvec(self, x: np.ndarray) -> np.ndarray:
        u = self._full(x)
        out = -apply_laplacian(self.grid, u)[:-1] - self.q[:-1] * u[:-1]
        return out.ravel()

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Operator applied to a full-grid array (boundary row ignored)."""
        return self._full(self._matvec(np.asarray(values)[:-1].ravel()))

    def _precondition(self, x: np.ndarray) -> np.ndarray:
        c = np.fft.rfft(x.reshape(self._shape), axis=1)
        y = batched_mode_solve(self._pinv, c)
        return np.fft.irfft(y, n=self.grid.n_theta, axis=1).ravel()

    def solve(self, rhs: np.ndarray, x0: np.ndarray | None = None) -> np.ndarray:
        """Solve ``(-Delta - q) u = rhs`` in the interior, ``u = 0`` on the circle."""
        b = self._precondition(np.asarray(rhs, dtype=float)[:-1].ravel())
        bnorm = np.linalg.norm(b)
        if bnorm == 0.0:
            return np.zeros((self.grid.n_r, self.grid.n_theta))
        guess = b if x0 is None else np.asarray(x0)[:-1].ravel()
        atol = self.rtol * bnorm
        count = [0]

        def cb(_):
            count[0] += 1

        def residual(x):
            return float(np.linalg.norm(self._PA @ x - b))

        # a short plain run suffices for diffuse bubbles; concentrated ones
        # stall on the near-kernel and switch to the deflated system
        x, _ = gmres(self._PA, b, x0=guess, rtol=0.0, atol=atol, restart=60, maxiter=1,
                     callback=cb, callback_type="pr_norm")
        res = residual(x)
        if res > atol and self._U is not None:
            # x = U E^-1 U^T (b - M xt) + xt with P M xt = P b
            xt, _ = gmres(self._deflated, self._project(b), x0=x, rtol=0.0, atol=atol, restart=80, maxiter=4,
                          callback=cb, callback_type="pr_norm")
            xd = self._U @ (self._Einv @ (self._U.T @ (b - self._PA @ xt))) + xt
            rd = residual(xd)
            if rd < res:
                x, res = xd, rd
        if res > atol:
            x, _ = gmres(self._PA, b, x0=x, rtol=0.0, atol=atol, restart=100, maxiter=8,
                         callback=cb, callback_type="pr_norm")
            res = residual(x)
        self.gmres_iterations += count[0]
        if res > 1e3 * atol:
            raise SolverError(f"GMRES did not converge (relative residual {res / bnorm:.2e})")
        return self._full(x)

    def smallest_eigenvalue(self, iterations: int = 12, seed: int = 0) -> float:
        """Magnitude estimate of the smallest eigenvalue by inverse iteration."""
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(self._shape)
        x = self._full(x.ravel())
        est = np.inf
        for _ in range(iterations):
            x = x / np.linalg.norm(x)
            y = self.solve(x)
            est = 1.0 / np.linalg.norm(y)
            x = y
        return float(est)


def _source(grid: DiskGrid, lam: float, V: Potential) -> np.ndarray:
    """``lam V |x|^2`` on the grid."""
    return lam * V(grid.z) * np.abs(grid.z) ** 2


def lifted_residual(v: np.ndarray, grid: DiskGrid, lam: float, V: Potential,
                    extra: np.ndarray | None = None) -> np.ndarray:
    """``v - (-Delta)^{-1}(lam V |x|^2 e^v + extra)`` for ``v`` with zero boundary data."""
    rhs = _source(grid, lam, V) * np.exp(v)
    if extra is not None:
        rhs = rhs + extra
    return v - solve_poisson(grid, rhs)


# --- Newton -------------------------------------------------------------------

def newton_solve(lam: float, V: Potential, initial: DiskField, cfg: SolverConfig = SolverConfig(),
                 deflation: list[np.ndarray] | None = None) -> SolveResult:
    """Damped Newton iteration for the full boundary value problem.

    Each step solves ``(-Delta - lam V |x|^2 e^v) dv = -F(v)`` and halves
    the step until the lifted residual decreases. Once below ``cfg.tol``,
    ``cfg.polish_steps`` further steps are taken: the integral identities
    see the unlifted residual, which is larger by the norm of the
    Laplacian. On failure the best iterate is returned with
    ``converged=False``. ``deflation`` is passed to
    :class:`LinearizedOperator`.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    grid = initial.grid
    src = _source(grid, lam, V)
    v = initial.values.copy()
    v[-1] = 0.0
    res = lifted_residual(v, grid, lam, V)
    norm = float(np.abs(res).max())
    history = [norm]
    it = 0
    op = None
    polish = cfg.polish_steps
    while it < cfg.max_iter:
        if norm <= cfg.tol:
            # extra steps cost one solve each and take the residual to roundoff
            if polish == 0 or norm <= _ROUNDOFF:
                break
            polish -= 1
        q = src * np.exp(v)
        op = LinearizedOperator(grid, q, cfg.gmres_rtol, deflation=deflation)
        # F = -Delta v - q_src e^v equals -Delta of the lifted residual
        f = -apply_laplacian(grid, res)
        dv = op.solve(-f)
        step = 1.0
        for _ in range(cfg.max_halvings + 1):
            trial = v + step * dv
            tres = lifted_residual(trial, grid, lam, V)
            tnorm = float(np.abs(tres).max())
            if np.isfinite(tnorm) and tnorm < norm:
                break
            step *= 0.5
        else:
            if norm > cfg.tol:
                log.warning("newton: no decrease after %d halvings at lam=%g", cfg.max_halvings, lam)
            break
        v, res, norm = trial, tres, tnorm
        history.append(norm)
        it += 1
        log.debug("newton lam=%g it=%d step=%g residual=%.3e", lam, it, step, norm)
    converged = norm <= cfg.tol
    if not converged and op is not None:
        eig = op.smallest_eigenvalue()
        if eig < 1e-8:
            warnings.warn(f"linearized operator nearly singular (|eig| ~ {eig:.2e}); "
                          "use the bordered solver", NearSingularJacobianWarning, stacklevel=2)
    return SolveResult(lam=lam, field=DiskField(grid, v), newton_iterations=it, final_residual_norm=norm,
                       converged=converged, residual_history=history)


# --- bordered inner problem ------------------------------------------------

@dataclass
class _BubbleData:
    """Quantities of the inner problem that depend only on ``(lam, b)``."""

    pw: np.ndarray
    q0: np.ndarray
    error: np.ndarray
    constraint: list[np.ndarray]
    kernels: list[np.ndarray]


def _bubble_data(grid: DiskGrid, lam: float, V: Potential, b: complex) -> _BubbleData:
    z = grid.z
    w = eval_W_lambda(lam, b, z)
    pw = w - harmonic_extension(grid, w[-1]).values
    pw[-1] = 0.0
    weight = np.abs(z) ** 2
    q0 = lam * V(z) * weight * np.exp(pw)
    error = weight * np.exp(w) - q0
    kernels = []
    for j in (0, 1, 2):
        zj = eval_kernel_Z(j, lam, b, z)
        pz = zj - harmonic_extension(grid, zj[-1]).values
        pz[-1] = 0.0
        kernels.append(pz)
    # discrete -Delta of the projected kernel: <grad phi, grad PZ> = <phi, -Delta PZ>
    constraint = [-apply_laplacian(grid, pz) for pz in kernels[1:]]
    return _BubbleData(pw, q0, error, constraint, kernels)


def _inner(grid: DiskGrid, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(a[:-1] * b[:-1] * grid.area_weights[:-1]))


def _constraint_residuals(grid: DiskGrid, phi: np.ndarray, data: _BubbleData) -> np.ndarray:
    out = []
    for w in data.constraint:
        scale = np.sum(np.abs(w[:-1]) * grid.area_weights[:-1])
        out.append(_inner(grid, phi, w) / scale)
    return np.array(out)


def bordered_solve(lam: float, V: Potential, b: complex, cfg: SolverConfig = SolverConfig(),
                   grid: DiskGrid | None = None, phi0: np.ndarray | None = None) -> BorderedResult:
    """Inner Lyapunov-Schmidt problem at a fixed location parameter ``b``.

    Solves ``-Delta phi - q0 phi = -R + N(phi) + c1 w1 + c2 w2`` with
    ``<phi, w_j> = 0``, where ``q0 = lam V |x|^2 e^{PW}``, ``R`` is the error
    of the projected bubble, ``N(phi) = q0 (e^phi - 1 - phi)`` and
    ``w_j = -Delta PZ^j``. The linear operator is frozen at ``phi = 0``;
    it is refreshed at the current iterate whenever the contraction
    stalls.
    """
    grid = grid or cfg.grid()
    if abs(b) > cfg.box_M * np.sqrt(lam):
        raise ValueError(f"|b| = {abs(b):.3g} exceeds M sqrt(lam) = {cfg.box_M * np.sqrt(lam):.3g}")
    data = _bubble_data(grid, lam, V, b)
    q0 = data.q0
    phi = np.zeros_like(q0) if phi0 is None else np.array(phi0, dtype=float)
    phi[-1] = 0.0

    def frozen(qf: np.ndarray):
        op = LinearizedOperator(grid, qf, cfg.gmres_rtol, deflation=data.kernels)
        ys = [op.solve(w) for w in data.constraint]
        schur = np.array([[_inner(grid, wi, yj) for yj in ys] for wi in data.constraint])
        return op, ys, schur

    # frozen operator at the current phi; the right side carries the rest
    qf = q0 * np.exp(phi)
    op, ys, schur = frozen(qf)
    prev_delta = np.inf
    c = np.zeros(2)
    for it in range(1, cfg.inner_max_iter + 1):
        # -Delta phi - qf phi = -R + q0 (e^phi - 1) - qf phi + sum c w, linearized about phi
        rhs = -data.error + q0 * (np.exp(phi) - 1.0) - qf * phi
        y0 = op.solve(rhs, x0=phi)
        c = -np.linalg.solve(schur, [_inner(grid, wi, y0) for wi in data.constraint])
        new = y0 + c[0] * ys[0] + c[1] * ys[1]
        new[-1] = 0.0
        delta = float(np.abs(new - phi).max())
        phi = new
        if delta <= cfg.inner_tol:
            break
        if not np.isfinite(delta) or delta > 1e3:
            raise InnerDivergenceError(f"inner iteration diverged at lam={lam:g}, b={b:.4g}")
        if delta > 0.3 * prev_delta:
            qf = q0 * np.exp(phi)
            op, ys, schur = frozen(qf)
        prev_delta = delta
    else:
        raise InnerDivergenceError(f"inner iteration did not reach {cfg.inner_tol:g} "
                                   f"in {cfg.inner_max_iter} steps (last update {delta:.2e})")
    extra = c[0] * data.constraint[0] + c[1] * data.constraint[1]
    full = data.pw + phi
    res = lifted_residual(full, grid, lam, V, extra)
    return BorderedResult(phi=DiskField(grid, phi), c=c, iterations=it,
                          constraint_residuals=_constraint_residuals(grid, phi, data),
                          residual=float(np.abs(res).max()))


# --- outer root-find ------------------------------------------------------------

@dataclass
class OuterResult:
    b: complex
    inner: BorderedResult
    iterations: int
    jacobian: np.ndarray
    history: list


def _sample_c(lam, V, cfg, grid, center: complex, span: float, n: int = 3) -> list:
    out = []
    for d1 in np.linspace(-span, span, n):
        for d2 in np.linspace(-span, span, n):
            bb = center + complex(d1, d2)
            try:
                c = bordered_solve(lam, V, bb, cfg, grid).c
                out.append((bb.real, bb.imag, float(c[0]), float(c[1])))
            except SolverError:
                out.append((bb.real, bb.imag, np.nan, np.nan))
    return out


def outer_reduction(lam: float, V: Potential, cfg: SolverConfig = SolverConfig(), grid: DiskGrid | None = None,
                    b0: complex | None = None, jacobian0: np.ndarray | None = None) -> OuterResult:
    """Find ``b`` with vanishing multipliers ``c(b)``.

    Damped Newton on ``b`` in the plane with a finite-difference Jacobian,
    updated by Broyden's rule between refreshes. ``jacobian0`` is a
    Jacobian with respect to ``b / sqrt(lam/32)`` from a nearby ``lam``.

    Iterates stay within ``cfg.basin`` of the predicted location, measured
    in units of ``sqrt(lam/32)``. Other roots of ``c`` exist at moderate
    ``lam`` (for instance two separated peaks at ``+-sqrt(b)`` with
    ``b1 < 0``); they belong to different families and are not returned.
    """
    cls = classify(V)
    if not cls.exists:
        raise NoBlowUpFamilyError(f"no concentrating family for gammas {V.gammas}; outer reduction refused")
    grid = grid or cfg.grid()
    sq = np.sqrt(lam / 32.0)
    b_pred = predict_b(lam, *V.gammas)
    b = complex(b_pred if b0 is None else b0)
    target = cfg.outer_tol * np.sqrt(lam)
    h = 1e-4 * sq

    cur = bordered_solve(lam, V, b, cfg, grid)

    def fd_jacobian(b, base):
        jac = np.empty((2, 2))
        for k, e in enumerate((1.0, 1j)):
            pert = bordered_solve(lam, V, b + h * e, cfg, grid, phi0=base.phi.values)
            jac[:, k] = (pert.c - base.c) / h
        return jac

    jac = jacobian0 / sq if jacobian0 is not None else fd_jacobian(b, cur)
    history = [float(np.linalg.norm(cur.c))]
    fresh = jacobian0 is None
    for it in range(1, cfg.outer_max_iter + 1):
        if np.linalg.norm(cur.c) <= target:
            return OuterResult(b, cur, it - 1, jac * sq, history)
        step = -np.linalg.solve(jac, cur.c)
        t = 1.0
        accepted = False
        for _ in range(6):
            trial_b = b + t * complex(step[0], step[1])
            if abs(trial_b) > cfg.box_M * np.sqrt(lam) or abs(trial_b - b_pred) > cfg.basin * sq:
                t *= 0.5
                continue
            try:
                trial = bordered_solve(lam, V, trial_b, cfg, grid, phi0=cur.phi.values)
            except SolverError:
                t *= 0.5
                continue
            if np.linalg.norm(trial.c) < np.linalg.norm(cur.c):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if fresh:
                raise RootFindError(f"outer Newton stalled at lam={lam:g}, b={b:.6g}",
                                    _sample_c(lam, V, cfg, grid, b, 2.0 * sq))
            jac = fd_jacobian(b, cur)
            fresh = True
            continue
        s = np.array([trial_b.real - b.real, trial_b.imag - b.imag])
        y = trial.c - cur.c
        jac = jac + np.outer(y - jac @ s, s) / (s @ s)
        fresh = False
        b, cur = trial_b, trial
        history.append(float(np.linalg.norm(cur.c)))
        log.debug("outer lam=%g it=%d b=(%.10g, %.3g) |c|=%.3e", lam, it, b.real, b.imag, history[-1])
    if np.linalg.norm(cur.c) <= target:
        return OuterResult(b, cur, cfg.outer_max_iter, jac * sq, history)
    raise RootFindError(f"outer Newton did not reach |c| <= {target:.2e} at lam={lam:g}",
                        _sample_c(lam, V, cfg, grid, b, 2.0 * sq))


# --- continuation ---------------------------------------------------------------

def lambda_schedule(start: float, end: float, ratio: float) -> list[float]:
    """Geometric schedule from ``start`` down to exactly ``end``."""
    lams = [float(start)]
    while lams[-1] * ratio > end * (1.0 + 1e-9):
        lams.append(lams[-1] * ratio)
    if lams[-1] > end * (1.0 + 1e-12):
        lams.append(float(end))
    return lams


def solve_on_branch(lam: float, V: Potential, cfg: SolverConfig, grid: DiskGrid,
                    b0: complex | None = None, jacobian0: np.ndarray | None = None) -> tuple[SolveResult, OuterResult]:
    """Bordered reduction at one ``lam`` followed by a full Newton polish."""
    outer = outer_reduction(lam, V, cfg, grid, b0, jacobian0)
    data = _bubble_data(grid, lam, V, outer.b)
    v0 = data.pw + outer.inner.phi.values
    res = newton_solve(lam, V, DiskField(grid, v0), cfg, deflation=data.kernels)
    res.multipliers = (float(outer.inner.c[0]), float(outer.inner.c[1]))
    res.b_reduction = outer.b
    res.phi = outer.inner.phi
    if res.converged:
        tau, bf, err = bubble_fit(res.field, lam, V)
        res.tau, res.b_fit, res.fit_sup_err = tau, bf, err
    return res, outer


def continuation_run(V: Potential, cfg: SolverConfig = SolverConfig(),
                     on_step: Callable[[SolveResult], None] | None = None) -> list[SolveResult]:
    """Follow the concentrating branch from ``lambda_start`` to ``lambda_end``.

    The first point starts from the predicted location; later points start
    from the previous location rescaled by ``sqrt(lam)``. A failed step
    is retried with the ratio replaced by its square root, at most
    ``max_refinements`` times in a row.
    """
    grid = cfg.grid()
    results: list[SolveResult] = []
    lam = cfg.lambda_start
    ratio = cfg.ratio
    b_prev, lam_prev, jac = None, None, None
    refinements = 0
    while True:
        b0 = None if b_prev is None else b_prev * np.sqrt(lam / lam_prev)
        try:
            res, outer = solve_on_branch(lam, V, cfg, grid, b0, jac)
            if not res.converged:
                raise SolverError(f"Newton polish did not converge at lam={lam:g} "
                                  f"(residual {res.final_residual_norm:.2e})")
        except SolverError as exc:
            if lam_prev is None or refinements >= cfg.max_refinements:
                raise ContinuationError(f"continuation failed at lam={lam:g}: {exc}", results) from exc
            refinements += 1
            ratio = np.sqrt(ratio)
            lam = max(lam_prev * ratio, cfg.lambda_end)
            log.info("refining continuation step: ratio -> %.4f", ratio)
            continue
        results.append(res)
        if on_step is not None:
            on_step(res)
        log.info("lam=%.4e b=%.6e max v=%.4f newton=%d residual=%.2e", lam, res.b_reduction.real,
                 res.field.max(), res.newton_iterations, res.final_residual_norm)
        if lam <= cfg.lambda_end * (1.0 + 1e-12):
            return results
        b_prev, lam_prev, jac = outer.b, lam, outer.jacobian
        refinements = 0
        lam = max(lam * ratio, cfg.lambda_end)
        if lam < cfg.lambda_end * (1.0 + 1e-9):
            lam = cfg.lambda_end
