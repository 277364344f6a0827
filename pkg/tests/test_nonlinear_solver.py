import numpy as np
import pytest

from liouvillelab.disk_spectral import DiskField, DiskGrid, apply_laplacian, default_stretch
from liouvillelab.nonlinear_solver import (LinearizedOperator, SolverConfig, _bubble_data, _inner,
                                           bordered_solve, lambda_schedule, lifted_residual, newton_solve,
                                           outer_reduction)
from liouvillelab.potential import Potential
from liouvillelab.reduction import NoBlowUpFamilyError, predict_b, solve_reduced_equation

CFG = SolverConfig()


def radial_exact(lam, grid, large=True):
    """``V = 1`` solutions ``log(32 a / (lam (1 + a r^4)^2))`` with ``32 a = lam (1 + a)^2``."""
    p = 2.0 - 32.0 / lam
    disc = np.sqrt(p * p - 4.0)
    a = (-p + disc) / 2.0 if large else (-p - disc) / 2.0
    return grid.sample(lambda z: np.log(32 * a / lam) - 2 * np.log1p(a * np.abs(z) ** 4))


def _grid(lam):
    return DiskGrid(128, 256, default_stretch(lam))


def _quadratic_tail(history):
    # the final step ends at roundoff, so judge the contraction one step earlier
    return history[-2] <= 0.1 * history[-3]


@pytest.mark.parametrize("kw", [dict(tol=0.0), dict(ratio=1.0), dict(lambda_start=1e-4, lambda_end=1e-3),
                                dict(max_iter=0), dict(basin=-1.0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_lambda_schedule_hits_end_exactly():
    lams = lambda_schedule(1e-1, 1e-4, 0.7)
    assert lams[0] == 1e-1 and lams[-1] == 1e-4
    assert np.all(np.diff(lams) < 0)
    assert np.all(np.array(lams[1:-1]) / np.array(lams[:-2]) == pytest.approx(0.7))
    assert len(lams) == 21
    assert lambda_schedule(1e-2, 1e-2, 0.5) == [1e-2]


def test_minimal_solution_from_zero():
    g = DiskGrid(64, 64, 3.0)
    res = newton_solve(0.1, Potential(1.0, 1.0), g.zeros(), CFG)
    assert res.converged and res.final_residual_norm <= 1e-10
    assert res.newton_iterations <= 8
    assert _quadratic_tail(res.residual_history)
    # the small solution stays O(lam)
    assert res.field.max() < 0.1


def test_radial_symmetry_is_preserved():
    lam = 0.05
    g = DiskGrid(64, 64, 3.0)
    res = newton_solve(lam, Potential(0.0, 0.0), g.zeros(), CFG)
    assert res.converged
    assert np.var(res.field.values, axis=1).max() <= 1e-9
    assert np.abs(res.field.values - radial_exact(lam, g, large=False).values).max() <= 1e-10


def test_newton_recovers_exact_concentrated_solution():
    lam = 1e-3
    g = DiskGrid(96, 32, default_stretch(lam))
    exact = radial_exact(lam, g)
    start = exact + g.sample(lambda z: 0.05 * (1 - np.abs(z) ** 2))
    res = newton_solve(lam, Potential(0.0, 0.0), start, CFG)
    assert res.converged
    assert np.abs(res.field.values - exact.values).max() <= 1e-9
    assert _quadratic_tail(res.residual_history)


def test_newton_from_projected_bubble():
    lam = 1e-3
    V = Potential(1.0, 2.0)
    g = _grid(lam)
    data = _bubble_data(g, lam, V, predict_b(lam, 1.0, 2.0))
    res = newton_solve(lam, V, DiskField(g, data.pw), CFG, deflation=data.kernels)
    assert res.converged
    assert abs(res.field.max() - np.log(1024 / lam**2)) <= 2.0
    assert _quadratic_tail(res.residual_history)
    assert np.abs(lifted_residual(res.field.values, g, lam, V)).max() <= 1e-10


def test_linearized_operator_solve():
    g = DiskGrid(48, 64, 3.0)
    q = 2.0 * np.exp(-np.abs(g.z) ** 2) * (1 + 0.3 * g.x1)
    op = LinearizedOperator(g, q)
    rng = np.random.default_rng(1)
    rhs = rng.normal(size=q.shape)
    x = op.solve(rhs)
    assert np.abs(x[-1]).max() == 0.0
    # -Delta x - q x = rhs on the interior nodes
    assert np.abs(op.apply(x)[:-1] - rhs[:-1]).max() <= 1e-5 * np.abs(rhs).max()


@pytest.fixture(scope="module")
def inner_runs():
    V = Potential(1.0, 2.0)
    out = {}
    for lam in (1e-2, 1e-3, 1e-4):
        g = _grid(lam)
        out[lam] = (g, bordered_solve(lam, V, predict_b(lam, 1.0, 2.0), CFG, g))
    return out


def test_bordered_constraints(inner_runs):
    for g, r in inner_runs.values():
        assert np.abs(r.constraint_residuals).max() <= 1e-9


def test_bordered_phi_norm_follows_error_size(inner_runs):
    # the quadratic Taylor term of V makes the error of size lam^(1/2) in L^1;
    # the inner solution is bounded by that times |log lam|
    for lam, (g, r) in inner_runs.items():
        phi = r.phi.values
        h1 = np.sqrt(_inner(g, phi, -apply_laplacian(g, phi)))
        assert h1 <= 1.5 * np.sqrt(lam) * abs(np.log(lam))


def test_bordered_multipliers_small_at_predicted_b(inner_runs):
    lams = sorted(inner_runs, reverse=True)
    scaled = [np.linalg.norm(inner_runs[l][1].c) / np.sqrt(l) for l in lams]
    assert np.all(np.diff(scaled) < 0)


def test_bordered_rejects_far_b():
    with pytest.raises(ValueError):
        bordered_solve(1e-3, Potential(1.0, 2.0), 1.0, CFG, DiskGrid(32, 32, 3.0))


def test_outer_reduction_refuses_saddle():
    with pytest.raises(NoBlowUpFamilyError):
        outer_reduction(1e-3, Potential(1.0, -1.0), CFG, DiskGrid(32, 32, 3.0))


@pytest.mark.parametrize("gammas", [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0)])
def test_outer_reduction_sign_rules(gammas):
    lam = 1e-3
    V = Potential(*gammas)
    out = outer_reduction(lam, V, CFG, _grid(lam))
    assert np.linalg.norm(out.inner.c) <= CFG.outer_tol * np.sqrt(lam)
    b = out.b
    if gammas[0] == gammas[1]:
        assert abs(b) <= 0.05 * np.sqrt(lam)
        return
    assert np.sign(b.real) == np.sign(gammas[1] ** 2 - gammas[0] ** 2)
    assert abs(b.imag) / abs(b) <= 0.05
    pred = np.sqrt(lam / 32) * solve_reduced_equation(*gammas)
    assert abs(b - pred) / np.sqrt(lam) <= 0.05
