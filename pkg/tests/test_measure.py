import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st
from scipy import integrate, stats

from gcorr.bodies import AxisBox, Ball, Ellipsoid, MinkowskiSum, Slab, SymPolytope, scale
from gcorr.errors import ContractViolation, DimensionMismatch
from gcorr.measure import (
    Estimate, GaussianSpec, RadialMeasure, ball_measure, ball_volume, box_measure, crn_indicators, ellipsoid_measure,
    exact, gauss_1d_interval, lebesgue_volume, marginal_profile, mc_joint, mc_measure, quadratic_form_cdf, rho_n,
)
from gcorr.randomness import Stream, haar_matrix

# frozen oracle values, computed independently with scipy.integrate.quad on the
# Gaussian density (1D) and scipy.integrate.dblquad over the ellipse (2D)
ONE_SIGMA = 0.6826894921370859
ELLIPSE_1_2 = 0.5900953294046066


def test_estimate_invariants_and_json():
    e = Estimate(0.25, 0.01, 100, "mc")
    assert Estimate.from_json(e.to_json()) == e
    assert set(e.to_json()) == {"value", "se", "n", "method"}
    with pytest.raises(ValueError):
        Estimate(0.5, 0.1, 0, "exact")
    with pytest.raises(ValueError):
        Estimate(0.5, -1.0, 10, "mc")


def test_gauss_1d_interval():
    assert gauss_1d_interval(0).value == 0.0
    assert abs(gauss_1d_interval(40).value - 1) < 1e-15
    oracle, _ = integrate.quad(lambda x: math.exp(-x * x / 2) / math.sqrt(2 * math.pi), -1, 1, epsabs=1e-14)
    assert gauss_1d_interval(1).value == pytest.approx(oracle, abs=1e-12)
    assert gauss_1d_interval(1).value == pytest.approx(ONE_SIGMA, abs=1e-12)
    with pytest.raises(ContractViolation):
        gauss_1d_interval(-0.1)


def test_box_measure():
    assert box_measure([0.0, 0.0]).value == 0.0
    assert box_measure([1.0, 1.0]).value == pytest.approx(ONE_SIGMA**2, abs=1e-15)
    assert box_measure([1.3]).value == gauss_1d_interval(1.3).value
    with pytest.raises(ContractViolation):
        box_measure([1.0], GaussianSpec.shaped([[2.0]]))


def test_ball_measure():
    assert ball_measure(3, 0).value == 0.0
    assert ball_measure(2, math.sqrt(2 * math.log(2))).value == pytest.approx(0.5, abs=1e-14)
    assert 0.47 <= ball_measure(400, 20).value <= 0.53
    # chi-square oracle
    for n, r in ((1, 0.7), (3, 1.0), (7, 2.5), (20, 4.0)):
        assert ball_measure(n, r).value == pytest.approx(stats.chi2.cdf(r * r, n), rel=1e-12)
    # n = 3, r = 1 closed form: erf(1/sqrt2) - sqrt(2/pi) e^{-1/2}
    assert ball_measure(3, 1).value == pytest.approx(ONE_SIGMA - math.sqrt(2 / math.pi) * math.exp(-0.5), abs=1e-14)


def test_ball_volume_and_rho():
    assert ball_volume(2, 1) == pytest.approx(math.pi, rel=1e-15)
    assert ball_volume(3, 1) == pytest.approx(4 * math.pi / 3, rel=1e-15)
    assert ball_volume(1, 1) == pytest.approx(2.0, rel=1e-15)
    # 4 rho_1 = sqrt(2 pi) solved directly
    assert rho_n(1) == pytest.approx(math.sqrt(2 * math.pi) / 4, rel=1e-14)
    assert rho_n(1) == pytest.approx(0.626657, abs=1e-6)
    for n in range(1, 51):
        assert ball_volume(n, 2 * rho_n(n)) / (2 * math.pi) ** (n / 2) == pytest.approx(1, abs=1e-10)
    assert 0.98 <= rho_n(10_000) / (0.5 * math.sqrt(10_000 / math.e)) <= 1.02


def test_ellipsoid_measure_oracles():
    for n, r in ((1, 1.0), (2, 1.5), (3, 0.8), (5, 2.0)):
        assert ellipsoid_measure([r] * n).value == pytest.approx(ball_measure(n, r).value, abs=1e-8)
    assert ellipsoid_measure([1.0]).value == pytest.approx(ONE_SIGMA, abs=1e-8)
    oracle, _ = integrate.dblquad(
        lambda y, x: math.exp(-(x * x + y * y) / 2) / (2 * math.pi),
        -1, 1, lambda x: -2 * math.sqrt(max(1 - x * x, 0)), lambda x: 2 * math.sqrt(max(1 - x * x, 0)),
        epsabs=1e-12)
    assert ellipsoid_measure([1.0, 2.0]).value == pytest.approx(oracle, abs=1e-8)
    assert ellipsoid_measure([1.0, 2.0]).value == pytest.approx(ELLIPSE_1_2, abs=1e-10)


@pytest.mark.slow
def test_ellipsoid_measure_against_monte_carlo():
    est = mc_measure(Ellipsoid([1.0, 2.0]), 2, 10_000_000, Stream(3))
    assert abs(est.value - ELLIPSE_1_2) <= 3 * est.std_error


def test_quadratic_form_cdf_against_numerical_convolution():
    # P(z1^2 + 4 z2^2 <= 2) by 1D integration over z2
    oracle, _ = integrate.quad(
        lambda z: stats.norm.pdf(z) * stats.chi2.cdf(2 - 4 * z * z, 1), -math.sqrt(0.5), math.sqrt(0.5),
        epsabs=1e-13)
    value, err = quadratic_form_cdf([1.0, 4.0], 2.0)
    assert value == pytest.approx(oracle, abs=1e-9)
    assert err < 1e-8
    assert quadratic_form_cdf([1.0], 0.0) == (0.0, 0.0)


def test_mc_measure_examples():
    s = Stream(5)
    assert mc_measure(Ball(1e3), 3, 10_000, s).value == 1.0
    est = mc_measure(Ball(1.0), 2, 1_000_000, s)
    assert est.method == "mc"
    assert abs(est.value - (1 - math.exp(-0.5))) <= 3 * est.std_error
    est = mc_measure(AxisBox([1.0, 1.0, 1.0]), 3, 1_000_000, s)
    assert abs(est.value - box_measure([1, 1, 1]).value) <= 3 * est.std_error
    with pytest.raises(DimensionMismatch):
        mc_measure(AxisBox([1.0, 1.0]), 3, 10, s)


def test_standard_error_scales_like_inverse_sqrt():
    s1 = mc_measure(Ball(1.0), 2, 100_000, Stream(1)).std_error
    s4 = mc_measure(Ball(1.0), 2, 400_000, Stream(1)).std_error
    assert s1 / s4 == pytest.approx(2.0, rel=0.2)


def test_exact_formulas_agree_with_monte_carlo():
    rng = np.random.default_rng(8)
    for k in range(50):
        n = int(rng.integers(1, 5))
        kind = k % 3
        if kind == 0:
            body = AxisBox(rng.uniform(0.3, 2, n))
            ref = box_measure(body.halfwidths).value
        elif kind == 1:
            body = Ball(float(rng.uniform(0.5, 2.5)))
            ref = ball_measure(n, body.radius).value
        else:
            body = Ellipsoid(rng.uniform(0.4, 2.5, n), haar_matrix(rng, n))
            ref = ellipsoid_measure(body.radii).value
        est = mc_measure(body, n, 100_000, Stream(8).derive("agree", k))
        assert abs(est.value - ref) <= 4 * est.std_error + 1e-12


def test_shaped_identity_matches_standard():
    a = mc_measure(Ellipsoid([1.0, 0.5]), GaussianSpec.shaped(np.eye(2)), 50_000, Stream(2))
    b = mc_measure(Ellipsoid([1.0, 0.5]), GaussianSpec.standard(2), 50_000, Stream(2))
    assert a == b


def test_shaped_measure_is_linear_image():
    T = np.array([[2.0, 0.0], [0.0, 0.5]])
    est = mc_measure(AxisBox([1.0, 1.0]), GaussianSpec.shaped(T), 400_000, Stream(4))
    ref = gauss_1d_interval(0.5).value * gauss_1d_interval(2.0).value
    assert abs(est.value - ref) <= 3 * est.std_error


def test_mc_joint_examples():
    s = Stream(6)
    b = Ellipsoid([1.0, 0.6])
    j = mc_joint(Ball(1e3), b, 2, 100_000, s)
    assert j.pAB.value == j.pB.value
    j = mc_joint(b, b, 2, 100_000, s)
    assert j.pAB.value == j.pA.value
    assert j.slack == pytest.approx(j.pA.value * (1 - j.pA.value))
    j = mc_joint(Slab([1.0, 0.0], 1.0), Slab([0.0, 1.0], 1.0), 2, 1_000_000, s)
    assert abs(j.slack) <= 3 * j.slack_se


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_joint_intersection_bounded_by_marginals(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    a = Ellipsoid(rng.uniform(0.3, 2, n), haar_matrix(rng, n))
    b = Slab(rng.standard_normal(n), float(rng.uniform(0.2, 2)))
    j = mc_joint(a, b, n, 5000, Stream(seed))
    assert j.pAB.value <= min(j.pA.value, j.pB.value)


def test_monotone_under_scaling_per_sample():
    body = Ellipsoid([1.0, 0.5, 2.0])
    mom = crn_indicators([body.indicator, scale(body, 1.3).indicator], GaussianSpec.standard(3), 100_000,
                         Stream(9), "mono")
    # every hit of the smaller body is a hit of the larger one
    assert mom.counts[0, 1] == mom.counts[0, 0]


def test_scaling_law():
    rng = np.random.default_rng(10)
    for k in range(5):
        n = int(rng.integers(1, 5))
        K = Ellipsoid(rng.uniform(0.2, 1.0, n), haar_matrix(rng, n))
        c = float(rng.uniform(1.1, 3))
        big = mc_measure(scale(K, c), n, 100_000, Stream(10).derive("big", k))
        small = mc_measure(K, n, 100_000, Stream(10).derive("small", k))
        assert big.value <= c**n * small.value + 3 * math.hypot(big.std_error, c**n * small.std_error)


def test_worker_count_does_not_change_results():
    body = SymPolytope(np.random.default_rng(0).standard_normal((5, 3)))
    one = mc_measure(body, 3, 300_000, Stream(12), chunk_size=2**14, workers=1)
    four = mc_measure(body, 3, 300_000, Stream(12), chunk_size=2**14, workers=4)
    assert one == four


def test_lebesgue_volume():
    s = Stream(13)
    assert lebesgue_volume(Ball(1.0), 10, s, n=2) == exact(math.pi)
    assert lebesgue_volume(AxisBox([1.0, 2.0]), 10, s).value == 8.0
    est = lebesgue_volume(MinkowskiSum(Ball(1.0), Ball(1.0)), 200_000, s, n=2)
    assert abs(est.value - 4 * math.pi) <= 3 * est.std_error + 1e-12
    est = lebesgue_volume(SymPolytope(np.eye(2)), 200_000, s)
    assert abs(est.value - 4.0) <= 3 * est.std_error
    with pytest.raises(ContractViolation):
        lebesgue_volume(Slab([1.0, 0.0], 1.0), 10, s)


def test_marginal_profile_examples():
    s = Stream(14)
    f0 = marginal_profile(Ball(2.0), 0, [0.0], 2, 400_000, s)[0]
    assert abs(f0.value - gauss_1d_interval(2).value) <= 3 * f0.std_error
    grid = np.linspace(-1.5, 1.5, 7)
    prof = marginal_profile(AxisBox([1.0, 1.0]), 0, grid, 2, 200_000, s)
    for t, e in zip(grid, prof):
        if abs(t) <= 1:
            assert abs(e.value - ONE_SIGMA) <= 3 * e.std_error
        else:
            assert e.value == 0.0
    body = Ellipsoid([1.0, 2.0, 0.7], haar_matrix(np.random.default_rng(1), 3))
    prof = marginal_profile(body, 1, [-0.6, 0.6], 3, 200_000, s)
    assert abs(prof[0].value - prof[1].value) <= 3 * math.hypot(prof[0].std_error, prof[1].std_error)
    with pytest.raises(ContractViolation):
        marginal_profile(body, 0, [1.0, 0.0], 3, 10, s)


def test_radial_measures():
    for m in (RadialMeasure.gaussian(3), RadialMeasure.uniform_ball(3, 2.0), RadialMeasure.exponential(3)):
        assert m.cdf_is_valid()
    # the Gaussian radial form reproduces the ball measure
    est = mc_measure(Ball(1.5), RadialMeasure.gaussian(3), 200_000, Stream(15))
    assert abs(est.value - ball_measure(3, 1.5).value) <= 3 * est.std_error
    est = mc_measure(Ball(1.0), RadialMeasure.uniform_ball(3, 2.0), 200_000, Stream(15))
    assert abs(est.value - 1 / 8) <= 3 * est.std_error
