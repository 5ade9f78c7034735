import math

import numpy as np
import pytest

from betawnet.wavelets import (
    AdmissibilityReport,
    BetaParams,
    WaveletSpec,
    beta_derivative,
    beta_derivs_upto,
    beta_eval,
    check_admissibility,
    psi_eval,
    psi_support,
)

UNIT = BetaParams(p=1.0, q=1.0, x0=-1.0, x1=1.0)


def test_mode_location_and_value():
    assert UNIT.xc == 0.0
    assert beta_eval(UNIT, UNIT.xc) == 1.0
    skew = BetaParams(p=2.0, q=1.0, x0=0.0, x1=3.0)
    assert skew.x0 < skew.xc < skew.x1
    assert abs(beta_eval(skew, skew.xc) - 1.0) < 1e-15


def test_beta_eval_examples():
    assert beta_eval(UNIT, -1.0) == 0.0
    assert beta_eval(UNIT, 0.0) == 1.0
    # for p=q=1 on [-1,1] the bump is exactly 1 - x^2
    assert abs(beta_eval(UNIT, 0.5) - 0.75) < 1e-15


def test_beta_eval_outside_support_is_exact_zero():
    xs = np.array([-5.0, -1.0, 1.0, 2.0, 100.0])
    assert np.all(beta_eval(UNIT, xs) == 0.0)


def test_beta_matches_quadratic_bump():
    rng = np.random.default_rng(7)
    xs = rng.uniform(-1.0, 1.0, size=1000)
    got = beta_eval(UNIT, xs)
    want = 1.0 - xs**2
    rel = np.abs(got - want) / np.maximum(1.0, np.abs(want))
    assert rel.max() < 1e-10


def test_beta_derivative_examples():
    assert beta_derivative(UNIT, 1, 0.0) == 0.0
    # beta' = -2x for the quadratic bump
    assert abs(beta_derivative(UNIT, 1, 0.5) - (-1.0)) < 1e-14
    # beta'' = -2 everywhere inside
    assert abs(beta_derivative(UNIT, 2, 0.3) - (-2.0)) < 1e-13


def test_polynomial_exactness_integer_exponents():
    # for integer p, q the bump is a polynomial of degree p+q on its
    # support; expand it independently and compare pointwise
    rng = np.random.default_rng(11)
    for p, q, x0, x1 in [(1, 1, -1.0, 1.0), (2, 2, -1.0, 1.0), (2, 3, -0.5, 2.0)]:
        params = BetaParams(p=float(p), q=float(q), x0=x0, x1=x1)
        lead = (params.xc - x0) ** (-p) * (x1 - params.xc) ** (-q) * (-1.0) ** q
        poly = np.polynomial.Polynomial.fromroots([x0] * p + [x1] * q) * lead
        xs = rng.uniform(x0, x1, size=1000)
        got = beta_eval(params, xs)
        want = poly(xs)
        rel = np.abs(got - want) / np.maximum(1.0, np.abs(want))
        assert rel.max() < 1e-10


def test_derivative_tower_matches_finite_differences():
    # order n vs a central difference of the analytic order n-1, step 1e-5
    rng = np.random.default_rng(3)
    h = 1e-5
    for params in [
        BetaParams(p=2.0, q=2.0, x0=-1.0, x1=1.0),
        BetaParams(p=3.0, q=3.0, x0=-1.0, x1=1.0),
        BetaParams(p=2.0, q=3.0, x0=-0.5, x1=1.5),
    ]:
        xs = rng.uniform(params.x0 + 0.01, params.x1 - 0.01, size=100)
        for n in (1, 2, 3):
            got = beta_derivative(params, n, xs)
            fd = (beta_derivative(params, n - 1, xs + h) - beta_derivative(params, n - 1, xs - h)) / (2 * h)
            rel = np.abs(got - fd) / np.maximum(1.0, np.abs(got))
            assert rel.max() < 1e-6, (params, n, rel.max())


def test_derivs_upto_rows_are_consistent():
    params = BetaParams(p=2.0, q=2.0, x0=-1.0, x1=1.0)
    xs = np.linspace(-0.9, 0.9, 17)
    tower = beta_derivs_upto(params, 3, xs)
    for n in range(4):
        assert np.array_equal(tower[n], beta_derivative(params, n, xs))


def test_one_sided_exponent_gives_monotone_bump():
    # p=0 collapses the rising factor; the bump is ((x1-x)/(x1-x0))**q
    params = BetaParams(p=0.0, q=1.0, x0=0.0, x1=2.0)
    assert params.xc == 0.0
    assert abs(beta_eval(params, 1.0) - 0.5) < 1e-15
    assert abs(beta_derivative(params, 1, 1.0) - (-0.5)) < 1e-14


def test_params_validation():
    with pytest.raises(ValueError):
        BetaParams(p=-1.0, q=1.0, x0=-1.0, x1=1.0)
    with pytest.raises(ValueError):
        BetaParams(p=1.0, q=-0.5, x0=-1.0, x1=1.0)
    with pytest.raises(ValueError):
        BetaParams(p=1.0, q=1.0, x0=1.0, x1=-1.0)
    with pytest.raises(ValueError):
        BetaParams(p=1.0, q=1.0, x0=1.0, x1=1.0)
    with pytest.raises(ValueError):
        BetaParams(p=0.0, q=0.0, x0=-1.0, x1=1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        WaveletSpec(params=UNIT, order=0)
    with pytest.raises(ValueError):
        WaveletSpec(params=UNIT, order=1, a=0.0)
    with pytest.raises(ValueError):
        WaveletSpec(params=UNIT, order=1, a=-2.0)
    with pytest.raises(ValueError):
        WaveletSpec(params=UNIT, order=1, a=1.0, b=math.inf)


def test_psi_eval_examples():
    spec = WaveletSpec(params=UNIT, order=1, a=1.0, b=0.0)
    assert abs(psi_eval(spec, 0.5) - (-1.0)) < 1e-14

    dilated = WaveletSpec(params=UNIT, order=1, a=2.0, b=0.0)
    # (1/sqrt 2) * beta'(0.5) with beta' = -2u
    assert abs(psi_eval(dilated, 1.0) - (-1.0 / math.sqrt(2.0))) < 1e-14

    shifted = WaveletSpec(params=UNIT, order=1, a=1.0, b=5.0)
    assert psi_eval(shifted, 5.0) == 0.0


def test_compact_support_exact():
    spec = WaveletSpec(params=BetaParams(p=2.0, q=2.0, x0=-1.0, x1=1.0), order=1, a=0.7, b=0.3)
    lo, hi = psi_support(spec)
    assert lo == 0.3 - 0.7 and hi == 0.3 + 0.7
    xs = np.concatenate([np.linspace(lo - 3, lo, 50), np.linspace(hi, hi + 3, 50)])
    assert np.all(psi_eval(spec, xs) == 0.0)


def test_scaling_covariance():
    params = BetaParams(p=2.0, q=2.0, x0=-1.0, x1=1.0)
    mother = WaveletSpec(params=params, order=1, a=1.0, b=0.0)
    rng = np.random.default_rng(5)
    for a, b in [(0.5, 0.2), (2.0, -1.0), (3.7, 4.0)]:
        atom = WaveletSpec(params=params, order=1, a=a, b=b)
        xs = rng.uniform(-0.99, 0.99, size=200)
        got = psi_eval(atom, a * xs + b)
        want = psi_eval(mother, xs) / math.sqrt(a)
        rel = np.abs(got - want) / np.maximum(1e-30, np.abs(want))
        assert rel.max() < 1e-12


def test_zero_integral_over_support():
    # The antiderivative of the order-th derivative vanishes at both edges
    # whenever p, q >= order, so each of these atoms integrates to zero.
    for p, q, order, a, b in [
        (1.0, 1.0, 1, 1.0, 0.0),
        (2.0, 2.0, 1, 0.5, 0.3),
        (2.0, 2.0, 2, 1.0, 0.0),
        (3.0, 2.0, 2, 2.0, -1.0),
    ]:
        spec = WaveletSpec(params=BetaParams(p=p, q=q, x0=-1.0, x1=1.0), order=order, a=a, b=b)
        report = check_admissibility(spec, n_grid=100_000)
        assert report.integral_abs < 1e-6, (p, q, order, report.integral_abs)

    # With exponents strictly above the order the integrand itself decays
    # to zero at the edges, so a plain trapezoid over samples agrees too.
    spec = WaveletSpec(params=BetaParams(p=3.0, q=3.0, x0=-1.0, x1=1.0), order=2, a=1.0, b=0.0)
    lo, hi = psi_support(spec)
    xs = np.linspace(lo, hi, 100_000)
    assert abs(np.trapezoid(psi_eval(spec, xs), xs)) < 1e-6


def test_admissibility_report():
    spec = WaveletSpec(params=UNIT, order=1, a=1.0, b=0.0)
    report = check_admissibility(spec, n_grid=100_000)
    assert isinstance(report, AdmissibilityReport)
    assert report.integral_abs < 1e-6
    assert report.support_decay == 0.0
    assert math.isfinite(report.c_psi_estimate) and report.c_psi_estimate > 0

    smooth = WaveletSpec(params=BetaParams(p=2.0, q=2.0, x0=0.0, x1=1.0), order=2, a=1.0, b=0.0)
    report2 = check_admissibility(smooth, n_grid=100_000)
    assert report2.integral_abs < 1e-6
    assert report2.support_decay == 0.0
    assert math.isfinite(report2.c_psi_estimate) and report2.c_psi_estimate > 0


def test_admissibility_rejects_tiny_grid():
    spec = WaveletSpec(params=UNIT, order=1)
    with pytest.raises(ValueError):
        check_admissibility(spec, n_grid=512)
