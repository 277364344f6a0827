import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liouvillelab.disk_spectral import (DiskField, DiskGrid, apply_laplacian, boundary_normal_derivative,
                                        default_stretch, dirichlet_solve, evaluate, gradient_at_origin,
                                        harmonic_extension, integrate_boundary, integrate_disk, laplacian,
                                        project, read_field_csv, solve_poisson, value_at_origin,
                                        write_field_csv)


@pytest.fixture(scope="module")
def grid():
    return DiskGrid(48, 64, 3.0)


def test_grid_geometry(grid):
    assert grid.r[-1] == 1.0
    assert np.all(np.diff(grid.r) > 0)
    assert grid.r[0] > 0
    assert grid.z.shape == (48, 64)
    assert grid.min_radial_spacing > 0


@pytest.mark.parametrize("kw", [dict(n_r=4), dict(n_theta=9), dict(n_theta=6), dict(stretch=-1.0),
                                dict(stretch=float("nan"))])
def test_grid_rejects_bad_parameters(kw):
    with pytest.raises(ValueError):
        DiskGrid(**kw)


def test_grid_equality_and_hash():
    assert DiskGrid(16, 16, 2.0) == DiskGrid(16, 16, 2.0)
    assert len({DiskGrid(16, 16, 2.0), DiskGrid(16, 16, 2.0), DiskGrid(16, 16, 3.0)}) == 2


def test_default_stretch_is_clipped():
    assert default_stretch(1e-1) == pytest.approx(4.0)
    assert default_stretch(1e-4) == pytest.approx(5.5)
    assert default_stretch(1e-20) == 8.0
    assert default_stretch(1e3) == 2.0


def test_area_weights_integrate_polynomials(grid):
    one = grid.sample(lambda z: np.ones(z.shape))
    assert integrate_disk(one) == pytest.approx(np.pi, abs=1e-13)
    assert integrate_disk(one, lambda z: z.real**2) == pytest.approx(np.pi / 4, abs=1e-13)
    assert integrate_disk(one, lambda z: np.abs(z) ** 6) == pytest.approx(np.pi / 4, abs=1e-13)
    assert integrate_disk(one, lambda z: z.real * z.imag) == pytest.approx(0.0, abs=1e-15)


def test_boundary_weights(grid):
    assert integrate_boundary(np.ones(grid.n_theta), grid=grid) == pytest.approx(2 * np.pi, abs=1e-13)
    c = np.cos(grid.theta)
    assert integrate_boundary(c * c, grid=grid) == pytest.approx(np.pi, abs=1e-13)
    with pytest.raises(ValueError):
        integrate_boundary(np.ones(grid.n_theta))


def test_laplacian_of_polynomials(grid):
    f = grid.sample(lambda z: np.abs(z) ** 4 + z.real**3 - 3 * z.real * z.imag**2)
    lap = laplacian(f).values
    assert np.abs(lap - 16 * np.abs(grid.z) ** 2).max() < 1e-8


def test_poisson_solve_is_exact_for_quadratic(grid):
    u = dirichlet_solve(grid.sample(lambda z: 4.0 * np.ones(z.shape)))
    assert np.abs(u.values - (1 - np.abs(grid.z) ** 2)).max() < 1e-12
    with pytest.raises(ValueError):
        dirichlet_solve(np.ones(grid.z.shape))


def test_harmonic_extension_reproduces_harmonic_polynomials(grid):
    exact = (grid.z**3).real + 0.5 * (grid.z**2).imag + 2.0
    ext = harmonic_extension(grid, exact[-1])
    assert np.abs(ext.values - exact).max() < 1e-13
    assert np.abs(project(DiskField(grid, exact)).values).max() < 1e-13
    with pytest.raises(ValueError):
        harmonic_extension(grid, np.ones(3))


def test_point_values_at_origin(grid):
    f = grid.sample(lambda z: 2.0 + 3.0 * z.imag - z.real + z.real**2)
    assert value_at_origin(f) == pytest.approx(2.0, abs=1e-12)
    g1, g2 = gradient_at_origin(f)
    assert g1 == pytest.approx(-1.0, abs=1e-11)
    assert g2 == pytest.approx(3.0, abs=1e-11)


def test_normal_derivative(grid):
    f = grid.sample(lambda z: 1 - np.abs(z) ** 4 + z.real)
    dn = boundary_normal_derivative(f)
    assert np.abs(dn - (-4 + np.cos(grid.theta))).max() < 1e-10


def test_field_is_read_only(grid):
    f = grid.zeros()
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0
    with pytest.raises(ValueError):
        DiskField(grid, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        f + DiskGrid(16, 16, 1.0).zeros()


def test_field_arithmetic(grid):
    f = grid.sample(lambda z: z.real)
    assert np.allclose((2 * f - f + 1).values, grid.x1 + 1)
    assert np.allclose((-f).values, -grid.x1)


@settings(max_examples=25, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 1), st.floats(0, 2 * np.pi))
def test_interpolation_is_exact_for_polynomials(a, b, rho, phi):
    g = DiskGrid(24, 32, 2.0)
    poly = lambda z: a * z.real**3 + b * z.imag**2 * z.real + np.abs(z) ** 4 - 0.5
    f = g.sample(poly)
    pt = rho * np.exp(1j * phi)
    assert evaluate(f, pt)[0] == pytest.approx(poly(np.array(pt)), abs=1e-11)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_poisson_inverts_laplacian(coef):
    """-Delta u = f, u = 0 on the circle, for u = (1 - r^2) times a cubic."""
    g = DiskGrid(24, 32, 2.0)
    a = coef

    def u_of(z):
        x, y = z.real, z.imag
        return (1 - np.abs(z) ** 2) * (a[0] + a[1] * x + a[2] * y + a[3] * x * y + a[4] * x**3 + a[5] * y**2)

    u = g.sample(u_of).values
    rhs = -apply_laplacian(g, u)
    assert np.abs(solve_poisson(g, rhs) - u).max() < 1e-9


def test_evaluate_rejects_points_outside(grid):
    with pytest.raises(ValueError):
        evaluate(grid.zeros(), 1.5)


def test_csv_round_trip(tmp_path, grid):
    f = grid.sample(lambda z: np.exp(z.real) * np.cos(z.imag) / 3.0)
    path = write_field_csv(f, tmp_path / "f.csv", {"lambda": 0.01})
    g, meta = read_field_csv(path)
    assert g.grid == grid
    assert np.array_equal(g.values, f.values)
    assert meta["lambda"] == 0.01
    assert path.read_text().splitlines()[0] == "r,theta,value"
