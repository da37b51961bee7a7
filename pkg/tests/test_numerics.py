import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gp00.numerics import (
    BracketError,
    ConvergenceError,
    Tolerance,
    binary_entropy,
    find_root,
    gaussian_cdf,
    gaussian_mass_on_family,
    integrate_weighted,
    maximize_1d,
)
from gp00.encoding import SQRT_PI, IntervalFamily


class TestBinaryEntropy:
    def test_maximum(self):
        assert binary_entropy(0.5) == 1.0

    def test_degenerate(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_closed_form_at_011(self):
        # frozen from -x*log2(x) - (1-x)*log2(1-x) at x = 0.11
        assert binary_entropy(0.11) == pytest.approx(0.499915958164528, abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            binary_entropy(-0.01)
        with pytest.raises(ValueError):
            binary_entropy(1.01)

    @given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    def test_symmetry(self, x):
        assert binary_entropy(x) == pytest.approx(binary_entropy(1.0 - x), abs=1e-12)


class TestGaussianCdf:
    def test_center(self):
        assert gaussian_cdf(0.0, 0.0, 1.0) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("mean,sigma", [(0.0, 1.0), (-3.0, 0.2), (7.5, 4.0)])
    def test_symmetry_at_mean(self, mean, sigma):
        assert gaussian_cdf(mean, mean, sigma) == pytest.approx(0.5, abs=1e-15)

    def test_standard_normal_quantile(self):
        assert gaussian_cdf(1.96, 0.0, 1.0) == pytest.approx(0.9750021048517795, abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            gaussian_cdf(0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            gaussian_cdf(0.0, 0.0, -1.0)


def _bit_families():
    """The correct/incorrect decoding families: together they tile the line."""
    fam0 = IntervalFamily(offset=0.0, period=2.0 * SQRT_PI, half_width=SQRT_PI / 2.0)
    fam1 = IntervalFamily(offset=SQRT_PI, period=2.0 * SQRT_PI, half_width=SQRT_PI / 2.0)
    return fam0, fam1


class TestGaussianMass:
    def test_whole_line(self):
        whole = IntervalFamily(offset=0.0, period=2.0, half_width=1.0)
        assert gaussian_mass_on_family(0.0, 1.3, whole) == pytest.approx(1.0, abs=1e-12)

    def test_point_mass_in_interior(self):
        fam0, _ = _bit_families()
        assert gaussian_mass_on_family(0.0, 1e-6, fam0) == pytest.approx(1.0, abs=1e-12)

    def test_against_direct_phi_sum(self):
        # independent oracle: explicit CDF differences over a wide fixed window
        fam0, _ = _bit_families()
        sigma = 0.5297
        expected = 0.0
        for k in range(-50, 51):
            center = 2.0 * k * SQRT_PI
            hi = 0.5 * math.erfc(-(center + SQRT_PI / 2.0) / (sigma * math.sqrt(2.0)))
            lo = 0.5 * math.erfc(-(center - SQRT_PI / 2.0) / (sigma * math.sqrt(2.0)))
            expected += hi - lo
        got = gaussian_mass_on_family(0.0, sigma, fam0)
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.906, abs=5e-4)

    @settings(max_examples=200)
    @given(
        mean=st.floats(min_value=-8.0, max_value=8.0),
        sigma=st.floats(min_value=0.05, max_value=4.0),
    )
    def test_complement_tiling(self, mean, sigma):
        fam0, fam1 = _bit_families()
        total = gaussian_mass_on_family(mean, sigma, fam0) + gaussian_mass_on_family(
            mean, sigma, fam1
        )
        assert total == pytest.approx(1.0, abs=1e-9)

    @settings(max_examples=200)
    @given(
        mean=st.floats(min_value=-5.0, max_value=5.0),
        sigma=st.floats(min_value=0.1, max_value=3.0),
    )
    def test_period_shift_invariance(self, mean, sigma):
        fam0, _ = _bit_families()
        shifted = IntervalFamily(
            offset=fam0.offset + fam0.period, period=fam0.period, half_width=fam0.half_width
        )
        assert gaussian_mass_on_family(mean, sigma, fam0) == pytest.approx(
            gaussian_mass_on_family(mean + fam0.period, sigma, shifted), abs=1e-10
        )


class TestIntegrateWeighted:
    def test_normalization(self):
        assert integrate_weighted(lambda a: 1.0, 0.7, 1.9) == pytest.approx(1.0, abs=1e-8)

    def test_odd_symmetry(self):
        assert integrate_weighted(lambda a: a, 0.0, 1.0) == pytest.approx(0.0, abs=1e-8)

    def test_second_moment(self):
        assert integrate_weighted(lambda a: a * a, 0.0, 2.0) == pytest.approx(4.0, abs=1e-7)

    def test_nonconvergence(self):
        tight = Tolerance(abs_tol=1e-14, max_iter=3)
        with pytest.raises(ConvergenceError):
            integrate_weighted(lambda a: math.sin(40.0 * a) ** 2, 0.0, 1.0, tight)


class TestFindRoot:
    def test_linear(self):
        assert find_root(lambda x: x - 1.0, 0.0, 2.0) == pytest.approx(1.0, abs=1e-9)

    def test_improved_rate_zero(self):
        root = find_root(lambda x: 1.0 - 2.0 * binary_entropy(x), 0.001, 0.4)
        assert root == pytest.approx(0.110028, abs=1e-4)

    def test_basic_rate_zero(self):
        root = find_root(lambda x: 1.0 - 3.0 * binary_entropy(x), 0.001, 0.4)
        assert root == pytest.approx(0.061490, abs=1e-4)

    def test_no_bracket(self):
        with pytest.raises(BracketError):
            find_root(lambda x: x * x + 1.0, -1.0, 1.0)

    def test_stability_under_finer_tolerance(self):
        f = lambda x: math.cos(x) - x
        coarse = find_root(f, 0.0, 1.0, Tolerance(abs_tol=1e-6))
        fine = find_root(f, 0.0, 1.0, Tolerance(abs_tol=1e-7))
        assert abs(coarse - fine) <= 1e-6


class TestMaximize1d:
    def test_quadratic(self):
        x, fx = maximize_1d(lambda x: -((x - 0.3) ** 2), 0.0, 1.0)
        assert x == pytest.approx(0.3, abs=1e-8)
        assert fx == pytest.approx(0.0, abs=1e-12)

    def test_entropy_peak(self):
        x, fx = maximize_1d(binary_entropy, 0.0, 1.0)
        assert x == pytest.approx(0.5, abs=1e-8)
        assert fx == pytest.approx(1.0, abs=1e-12)

    def test_stability_under_finer_tolerance(self):
        f = lambda x: -((x - 0.3) ** 2)
        x1, _ = maximize_1d(f, 0.0, 1.0, Tolerance(abs_tol=1e-6))
        x2, _ = maximize_1d(f, 0.0, 1.0, Tolerance(abs_tol=1e-7))
        assert abs(x1 - x2) <= 1e-6

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            maximize_1d(lambda x: x, 1.0, 0.0)


class TestTolerance:
    def test_invariants(self):
        with pytest.raises(ValueError):
            Tolerance(abs_tol=0.0)
        with pytest.raises(ValueError):
            Tolerance(rel_tol=-1e-3)
        with pytest.raises(ValueError):
            Tolerance(max_iter=0)
