import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liouvillelab.potential import Potential, diagonalize_hessian
from liouvillelab.reduction import (DegenerateHessianError, NoBlowUpFamilyError, classify, predict_b,
                                    reduced_residual, solve_reduced_equation)
from liouvillelab.special_integrals import integral_J

# root of J(t) = pi/12 with J from scipy nquad and brentq (xtol 1e-13)
ROOT_1_2 = 0.45594043618746694


def test_potential_values_and_gradient():
    V = Potential(1.0, 2.0, {(3, 0): 0.1, (1, 2): -0.2})
    z = 0.3 - 0.4j
    x1, x2 = z.real, z.imag
    assert V(z) == pytest.approx(1 + 0.5 * (x1**2 + 2 * x2**2) + 0.1 * x1**3 - 0.2 * x1 * x2**2)
    h = 1e-6
    d1, d2 = V.gradient(z)
    assert d1 == pytest.approx((V(z + h) - V(z - h)) / (2 * h), abs=1e-8)
    assert d2 == pytest.approx((V(z + 1j * h) - V(z - 1j * h)) / (2 * h), abs=1e-8)


@pytest.mark.parametrize("higher", [{(1, 1): 1.0}, {(2, 0): 0.3}, {(3, 0): float("inf")}])
def test_potential_rejects_low_degree_or_bad_terms(higher):
    with pytest.raises(ValueError):
        Potential(1.0, 1.0, higher)


def test_potential_must_be_positive():
    with pytest.raises(ValueError):
        Potential(-3.0, -3.0)
    assert Potential(-1.0, -2.0, {(4, 0): 0.5, (2, 2): 1.0, (0, 4): 0.5}).min_on_disk() > 0


def test_radial_flag():
    assert Potential(1.0, 1.0).is_radial
    assert not Potential(1.0, 2.0).is_radial


def test_diagonalize_hessian_with_cross_term():
    g1, g2, angle = diagonalize_hessian([[2.0, 1.0], [1.0, 2.0]])
    assert (g1, g2) == pytest.approx((1.0, 3.0))
    assert abs(angle) == pytest.approx(np.pi / 4)
    with pytest.raises(ValueError):
        diagonalize_hessian([[1.0, 0.5], [0.0, 1.0]])


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_diagonalization_reconstructs_hessian(a, b, c):
    h = np.array([[a, b], [b, c]])
    g1, g2, angle = diagonalize_hessian(h)
    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    assert rot @ np.diag([g1, g2]) @ rot.T == pytest.approx(h, abs=1e-10)
    assert g1 <= g2


def test_classify_examples():
    c = classify((1.0, 2.0))
    assert c.exists and c.b1_sign == 1 and c.b_tilde_star > 0
    assert c.summary().startswith("blow-up family EXISTS; b1 > 0; b_tilde_1* = ")
    c = classify((1.0, -1.0))
    assert not c.exists
    assert c.summary() == "NO blow-up family (det D2V(0) <= 0)"
    c = classify(Potential(1.0, 1.0))
    assert c.exists and c.b1_sign == 0 and c.b_tilde_star == 0.0
    c = classify((-1.0, -2.0))
    assert c.exists and c.b1_sign == 1
    with pytest.raises(DegenerateHessianError):
        classify((0.0, 1.0))


def test_reduced_root_matches_oracle():
    root = solve_reduced_equation(1.0, 2.0)
    assert root == pytest.approx(ROOT_1_2, abs=1e-10)
    assert abs(reduced_residual(root, 1.0, 2.0)) <= 1e-9
    assert abs(integral_J(root) + np.pi / 4 * (-1 / 3)) <= 1e-9
    assert solve_reduced_equation(2.0, 1.0) == -root
    assert solve_reduced_equation(3.0, 3.0) == 0.0


def test_reduced_equation_requires_existence():
    with pytest.raises(NoBlowUpFamilyError):
        solve_reduced_equation(1.0, -2.0)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10), st.booleans())
def test_classification_invariances(g1, g2, t, negate):
    s = -1.0 if negate else 1.0
    a = classify((s * g1, s * g2))
    b = classify((s * t * g1, s * t * g2))
    swapped = classify((s * g2, s * g1))
    assert a.exists and b.exists
    assert b.b_tilde_star == pytest.approx(a.b_tilde_star, abs=1e-9)
    assert swapped.b_tilde_star == pytest.approx(-a.b_tilde_star, abs=1e-9)
    assert swapped.b1_sign == -a.b1_sign
    assert abs(reduced_residual(a.b_tilde_star, s * g1, s * g2)) <= 1e-9


def test_root_sign_rule():
    for g1, g2 in [(1, 3), (2, 5), (-1, -4)]:
        assert np.sign(solve_reduced_equation(g1, g2)) == np.sign(g2**2 - g1**2)


def test_predict_b():
    lam = 3.2e-3
    assert predict_b(lam, 1.0, 2.0) == pytest.approx(1e-2 * ROOT_1_2, abs=1e-12)
    assert predict_b(lam, 1.0, 2.0).imag == 0.0
    assert predict_b(0.5, 2.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        predict_b(0.0, 1.0, 2.0)
