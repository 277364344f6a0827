import numpy as np
import pytest

from liouvillelab.asymptotics import (InsufficientSpanError, MaximumOnBoundaryError, bubble_fit,
                                      error_norm_scaling, error_remainder_norms, fit_loglog,
                                      non_simple_suspected, simple_blowup_indicator, weight_norm_scaling,
                                      weight_norm_theory)
from liouvillelab.bubbles import eval_W_lambda
from liouvillelab.disk_spectral import DiskGrid
from liouvillelab.potential import Potential

LAMS = np.logspace(-1, -4, 7)


def test_fit_recovers_exact_power_law():
    lam = np.logspace(-1, -3, 6)
    fit = fit_loglog(lam, 3.0 * lam**0.75, 0.75)
    assert fit.slope == pytest.approx(0.75, abs=1e-12)
    assert np.exp(fit.intercept) == pytest.approx(3.0, rel=1e-10)
    assert fit.matches() and fit.at_least()
    assert fit.constant_drift() == pytest.approx(0.0, abs=1e-12)


def test_fit_rejects_short_or_narrow_samples():
    with pytest.raises(InsufficientSpanError):
        fit_loglog([1e-1, 1e-2, 1e-3], [1, 2, 3], 0.5)
    with pytest.raises(InsufficientSpanError):
        fit_loglog(np.logspace(-1, -2.5, 6), np.ones(6), 0.0)
    with pytest.raises(ValueError):
        fit_loglog(LAMS, -np.ones(7), 0.0)


def test_noisy_fit_is_not_well_fitted():
    rng = np.random.default_rng(0)
    vals = LAMS**0.5 * np.exp(rng.normal(0, 1.0, LAMS.size))
    fit = fit_loglog(LAMS, vals, 0.5)
    assert fit.r2 < 0.99 and not fit.matches(tol=10.0)


def test_fit_csv(tmp_path):
    fit = fit_loglog(LAMS, LAMS**0.25, 0.25, label="demo")
    text = fit.to_csv(tmp_path / "fit.csv").read_text().splitlines()
    assert text[0] == "lambda,value,model"
    assert len(text) == LAMS.size + 2
    assert text[-1].startswith("# demo slope=")


@pytest.mark.parametrize("s,p", [(0, 1), (2, 1), (0, 2), (1, 1.5)])
def test_weight_norm_slopes(s, p):
    fit = weight_norm_scaling(s, p, LAMS, n_r=96, n_theta=64)
    assert fit.matches(0.05), fit.summary()
    assert fit.slope == pytest.approx(weight_norm_theory(s, p), abs=0.05)


def test_weight_norm_constant_is_stable():
    fit = weight_norm_scaling(1.0, 1.0, LAMS, n_r=96, n_theta=64)
    assert fit.constant_drift() <= 0.10


def test_weight_norm_rejects_bad_exponents():
    with pytest.raises(ValueError):
        weight_norm_scaling(4.0, 1.0, LAMS)
    with pytest.raises(ValueError):
        weight_norm_scaling(1.0, 0.5, LAMS)


def test_error_leading_term_is_removed():
    V = Potential(1.0, 2.0)
    full, rem = error_remainder_norms(V, LAMS, n_r=96, n_theta=64)
    fit_full = fit_loglog(LAMS, full, 0.5)
    fit_rem = fit_loglog(LAMS, rem, 0.75)
    # the quadratic Taylor term sets the rate; the remainder decays faster
    assert fit_full.slope == pytest.approx(0.5, abs=0.05)
    assert fit_rem.slope >= fit_full.slope + 0.2
    assert np.all(rem < full)


def test_error_norm_vanishes_for_constant_potential_at_leading_order():
    fit = error_norm_scaling(1.0, Potential(1e-12, 1e-12), LAMS, n_r=96, n_theta=64)
    # only the projection correction remains, O(lam) in L^1
    assert fit.slope >= 0.9


def _synthetic_field(lam, b, n_r=96, n_theta=128):
    g = DiskGrid.for_lambda(lam, n_r, n_theta)
    return g.sample(lambda z: eval_W_lambda(lam, b, z) - np.log(lam))


@pytest.mark.parametrize("b", [0j, 0.3 * np.sqrt(1e-3 / 32) + 0j, 0.02 - 0.01j])
def test_bubble_fit_on_synthetic_profile(b):
    lam = 1e-3
    v = _synthetic_field(lam, b)
    tau, bf, err = bubble_fit(v, lam)
    assert abs(bf - b) <= 1e-3
    assert tau == pytest.approx(32.0 / lam, rel=1e-2)
    assert err <= 1e-2


def test_bubble_fit_rejects_boundary_maximum():
    g = DiskGrid(32, 32, 2.0)
    with pytest.raises(MaximumOnBoundaryError):
        bubble_fit(g.sample(lambda z: z.real), 1e-2)


def test_indicator_bounded_for_single_bubble():
    for lam in (1e-2, 1e-3, 1e-4):
        ind = simple_blowup_indicator(_synthetic_field(lam, 0j), lam)
        assert ind <= 2 * np.log(32) + 1e-9


def test_non_simple_surrogate_is_flagged():
    lams = np.logspace(-1, -4, 7)
    simple = [simple_blowup_indicator(_synthetic_field(l, 0j), l) for l in lams]
    shifted = [simple_blowup_indicator(_synthetic_field(l, 0j) + 0.5 * np.log(1 / l), l)
               for l in lams]
    assert not non_simple_suspected(lams, simple)
    assert non_simple_suspected(lams, shifted)
    assert np.all(np.diff(shifted) > 0)
