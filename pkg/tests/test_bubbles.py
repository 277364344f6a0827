import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liouvillelab.bubbles import (BubbleParams, CoincidentPointsError, bubble_field, eval_kernel_Z,
                                  eval_limit_bubble, eval_projected_bubble, eval_projected_kernel, eval_W_lambda,
                                  exact_projected_bubble, exact_projected_kernel, green_function,
                                  green_regular_part, pde_residual_pointwise)
from liouvillelab.disk_spectral import DiskGrid, integrate_disk


def _relative_residual(p, z, h):
    res = pde_residual_pointwise(p, z, h)
    scale = abs(z) ** 2 * np.exp(eval_limit_bubble(p, z))
    return abs(res) / max(scale, 1e-3)


def _linearized_residual(j, lam, b, z, h):
    """Five-point ``-Delta Z - |x|^2 e^W Z`` relative to ``|x|^2 e^W |Z|``."""
    f = lambda w: eval_kernel_Z(j, lam, b, w)
    lap = (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4 * f(z)) / h**2
    pot = abs(z) ** 2 * np.exp(eval_W_lambda(lam, b, z))
    return abs(-lap - pot * f(z)) / max(pot * abs(f(z)), abs(lap), 1e-3)


def test_limit_bubble_residual_at_random_points():
    rng = np.random.default_rng(7)
    p = BubbleParams(tau=0.7, b=0.3 - 0.2j)
    pts = rng.uniform(-1.5, 1.5, 100) + 1j * rng.uniform(-1.5, 1.5, 100)
    worst = max(_relative_residual(p, z, 5e-4) for z in pts)
    assert worst <= 1e-3


def test_limit_bubble_residual_is_second_order():
    p = BubbleParams(tau=0.5, b=0.2)
    z = 0.6 + 0.4j
    r1 = abs(pde_residual_pointwise(p, z, 2e-2))
    r2 = abs(pde_residual_pointwise(p, z, 1e-2))
    assert r1 / r2 == pytest.approx(4.0, rel=0.05)


@pytest.mark.parametrize("j", [0, 1, 2])
def test_kernel_functions_solve_linearized_equation(j):
    rng = np.random.default_rng(j)
    lam, b = 0.3, 0.05 + 0.02j
    pts = rng.uniform(-1, 1, 100) + 1j * rng.uniform(-1, 1, 100)
    worst = max(_linearized_residual(j, lam, b, z, 5e-4) for z in pts)
    assert worst <= 1e-3
    z = 0.5 + 0.3j
    ratio = _linearized_residual(j, lam, b, z, 2e-2) / _linearized_residual(j, lam, b, z, 1e-2)
    assert ratio == pytest.approx(4.0, rel=0.1)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-6, 1.0), st.complex_numbers(max_magnitude=0.5), st.complex_numbers(max_magnitude=1.0))
def test_concentrated_bubble_is_limit_bubble(lam, b, x):
    w = eval_W_lambda(lam, b, x)
    u = eval_limit_bubble(BubbleParams(lam / 32.0, b), x)
    assert w == pytest.approx(u, rel=1e-14, abs=1e-13)


def test_bubble_mass_is_sixteen_pi():
    lam = 1e-5
    g = DiskGrid.for_lambda(lam, 128, 64)
    w = bubble_field(g, lam, 0j)
    mass = integrate_disk(g.field(np.exp(w.values)), lambda z: np.abs(z) ** 2)
    assert abs(mass / (16 * np.pi) - 1) <= 5e-3


def test_points_accept_pairs_and_arrays():
    assert eval_W_lambda(0.1, 0j, (0.3, 0.4)) == pytest.approx(eval_W_lambda(0.1, 0j, 0.3 + 0.4j))
    arr = eval_W_lambda(0.1, 0j, np.array([0.1, 0.2j]))
    assert arr.shape == (2,)
    with pytest.raises(ValueError):
        eval_W_lambda(0.0, 0j, 0.1)


def test_bubble_params_validation():
    with pytest.raises(ValueError):
        BubbleParams(tau=0.0)
    with pytest.raises(ValueError):
        BubbleParams(tau=1.0, N=0)
    with pytest.raises(ValueError):
        eval_kernel_Z(3, 0.1, 0j, 0.2)


@settings(max_examples=40, deadline=None)
@given(st.complex_numbers(max_magnitude=0.95), st.complex_numbers(max_magnitude=0.95))
def test_green_function_symmetric(x, y):
    if abs(x - y) < 1e-3:
        return
    assert green_function(x, y) == pytest.approx(green_function(y, x), rel=1e-10, abs=1e-12)
    assert green_function(x, y) > 0


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * np.pi), st.complex_numbers(max_magnitude=0.9))
def test_green_function_vanishes_on_circle(phi, y):
    assert green_function(np.exp(1j * phi), y) == pytest.approx(0.0, abs=1e-12)


def test_green_function_coincident_points():
    with pytest.raises(CoincidentPointsError):
        green_function(0.3, 0.3)


def test_regular_part_is_harmonic():
    y = 0.3 + 0.1j
    x, h = -0.2 + 0.4j, 1e-3
    f = lambda w: green_regular_part(w, y)
    lap = (f(x + h) + f(x - h) + f(x + 1j * h) + f(x - 1j * h) - 4 * f(x)) / h**2
    assert abs(lap) < 1e-5
    assert green_regular_part(0.0, y) == 0.0


@pytest.mark.parametrize("lam", [1e-2, 1e-3])
def test_projection_surrogates_are_close(lam):
    g = DiskGrid.for_lambda(lam, 64, 64)
    b = 0.3 * np.sqrt(lam)
    diff = exact_projected_bubble(g, lam, b).values - eval_projected_bubble(lam, b, g.z)
    assert np.abs(diff).max() <= lam
    for j in (0, 1, 2):
        pz = exact_projected_kernel(g, j, lam, b).values
        assert np.abs(pz - eval_projected_kernel(j, lam, b, g.z)).max() <= np.sqrt(lam)
        assert np.abs(pz[-1]).max() < 1e-12
