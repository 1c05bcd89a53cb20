import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import sici

from radiance.quadrature import (
    GridConfig,
    compensated_sum,
    clenshaw_curtis,
    gauss_legendre,
    integrate_adaptive,
    nested_cc_panels,
    resonance_partition,
)
from radiance.specfun import window_kernel_T


def window_antiderivative(s, dphi):
    """Antiderivative of (1 - cos(s dphi)) / s^2 vanishing at s = 0."""
    if s == 0.0:
        return 0.0
    si, _ = sici(abs(s) * dphi)
    si = math.copysign(float(si), s)
    return -(1.0 - math.cos(s * dphi)) / s + dphi * si


class TestGaussLegendre:
    def test_weight_sum(self):
        for order in (2, 12, 24, 64):
            _, w = gauss_legendre(order)
            assert math.fsum(w) == pytest.approx(2.0, abs=1e-14)

    def test_polynomial_exactness(self):
        x, w = gauss_legendre(12)
        for k in range(0, 24):
            exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
            assert float(np.dot(w, x**k)) == pytest.approx(exact, abs=1e-14)


class TestClenshawCurtis:
    def test_weight_sum_and_range(self):
        for n in (2, 4, 8, 16, 32):
            x, w = clenshaw_curtis(n)
            assert x.shape == (n + 1,)
            assert np.all((x >= -1.0) & (x <= 1.0))
            assert np.all(w > 0.0)
            assert math.fsum(w) == pytest.approx(2.0, abs=1e-14)

    def test_polynomial_exactness(self):
        x, w = clenshaw_curtis(8)
        for k in range(0, 9):
            exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
            assert float(np.dot(w, x**k)) == pytest.approx(exact, abs=1e-13)


class TestNestedPanels:
    def test_weight_sums_match_length(self):
        nodes, w, w2, w4 = nested_cc_panels(16, (0.0, 1.0, 4.0))
        assert nodes.shape == w.shape == w2.shape == w4.shape
        for rule in (w, w2, w4):
            assert math.fsum(rule) == pytest.approx(4.0, abs=1e-13)

    def test_three_levels_agree_on_smooth_integrand(self):
        nodes, w, w2, w4 = nested_cc_panels(32, (0.0, math.pi))
        f = np.sin(nodes)
        assert float(w @ f) == pytest.approx(2.0, abs=1e-13)
        assert float(w2 @ f) == pytest.approx(2.0, abs=1e-12)
        assert float(w4 @ f) == pytest.approx(2.0, abs=1e-8)

    def test_quarter_rule_empty_for_small_order(self):
        _, _, _, w4 = nested_cc_panels(4, (0.0, 1.0))
        assert np.all(w4 == 0.0)


class TestAdaptive:
    def test_sine(self):
        res = integrate_adaptive(np.sin, 0.0, math.pi, GridConfig(rel_tol=1e-13))
        assert res.converged
        assert res.value == pytest.approx(2.0, abs=1e-12)

    def test_constant(self):
        res = integrate_adaptive(lambda x: np.full_like(x, 3.0), -1.0, 5.0, GridConfig())
        assert res.value == pytest.approx(18.0, abs=1e-13)
        assert res.converged

    def test_window_kernel_closed_form(self):
        for dphi in (2 * math.pi, 50.0):
            n = 2
            a, b = n - 3.0, n + 7.0
            res = integrate_adaptive(
                lambda w: window_kernel_T(w, n, dphi),
                a, b, GridConfig(rel_tol=1e-10),
            )
            exact = window_antiderivative(b - n, dphi) - window_antiderivative(a - n, dphi)
            assert res.converged
            assert res.value == pytest.approx(exact, rel=1e-9)

    def test_full_line_window_mass(self):
        # integral of the formation kernel over all detunings is pi * dphi
        dphi = 7.0
        res = integrate_adaptive(
            lambda w: window_kernel_T(w, 0, dphi),
            -400.0, 400.0, GridConfig(rel_tol=1e-9, max_subdivisions=8000),
        )
        tail = 4.0 * dphi / 400.0  # |T| <= 2/s^2 envelope beyond the box
        assert abs(res.value - math.pi * dphi) < tail

    def test_non_convergence_returns_flag(self):
        cfg = GridConfig(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=3)
        res = integrate_adaptive(
            lambda x: np.sin(1.0 / (x + 1e-3)), 0.0, 1.0, cfg
        )
        assert not res.converged
        assert math.isfinite(res.value)
        assert res.error_estimate > 0.0

    def test_estimates_conservative_on_window_library(self):
        # ~50 window/interval combos; the true error may exceed 3x the
        # reported estimate in at most one of them
        cfg = GridConfig(rel_tol=1e-9, max_subdivisions=6000)
        combos = []
        for dphi in (0.5, 2 * math.pi, 25.0, 1e3):
            for n in (0, 3):
                for width in (0.4, 2.0, 9.0):
                    combos.append((dphi, n, n - 0.3 * width, n + 0.7 * width))
        for dphi in (180.0, 1e3):
            for lo in (-40.0, 5.0):
                combos.append((dphi, 1, 1 + lo * math.pi / dphi, 1 + (lo + 30) * math.pi / dphi))
        assert len(combos) >= 28
        violations = 0
        for dphi, n, a, b in combos:
            res = integrate_adaptive(lambda w: window_kernel_T(w, n, dphi), a, b, cfg)
            exact = window_antiderivative(b - n, dphi) - window_antiderivative(a - n, dphi)
            true_err = abs(res.value - exact)
            floor = 1e-13 * abs(exact) + 1e-15
            if true_err > 3.0 * res.error_estimate + floor:
                violations += 1
        assert violations <= 1

    def test_rejects_bad_interval(self):
        with pytest.raises(ValueError):
            integrate_adaptive(np.sin, 1.0, 1.0, GridConfig())


class TestResonancePartition:
    def test_no_resonances(self):
        out = resonance_partition(5.0, [], 10.0)
        assert out == [(0.0, 5.0, False)]

    def test_single_interior_window(self):
        out = resonance_partition(10.0, [(4.0, 0.2)], 10.0)
        assert [tuple(i) for i in out] == [
            (0.0, 3.0, False), (3.0, 5.0, True), (5.0, 10.0, False),
        ]

    def test_clipped_at_origin(self):
        out = resonance_partition(10.0, [(0.5, 0.4)], 10.0)
        assert out[0].resonant
        assert out[0].lo == 0.0

    def test_overlapping_windows_merge(self):
        out = resonance_partition(10.0, [(3.0, 0.2), (4.0, 0.2)], 10.0)
        resonant = [i for i in out if i.resonant]
        assert len(resonant) == 1
        assert resonant[0].lo == pytest.approx(2.0)
        assert resonant[0].hi == pytest.approx(5.0)

    def test_window_beyond_domain_ignored(self):
        out = resonance_partition(2.0, [(50.0, 0.1)], 10.0)
        assert out == [(0.0, 2.0, False)]

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            resonance_partition(0.0, [], 10.0)
        with pytest.raises(ValueError):
            resonance_partition(1.0, [(0.5, -0.1)], 10.0)

    @settings(max_examples=200, deadline=None)
    @given(
        omega_max=st.floats(0.1, 1e3),
        multiplier=st.floats(2.0, 50.0),
        resonances=st.lists(
            st.tuples(st.floats(-10.0, 1100.0), st.floats(0.0, 30.0)),
            max_size=12,
        ),
    )
    def test_exact_cover(self, omega_max, multiplier, resonances):
        out = resonance_partition(omega_max, resonances, multiplier)
        assert out[0].lo == 0.0
        assert out[-1].hi == omega_max
        for left, right in zip(out[:-1], out[1:]):
            assert left.hi == right.lo
        for interval in out:
            assert interval.lo < interval.hi


class TestCompensatedSum:
    def test_cancellation(self):
        assert compensated_sum([1e16, 1.0, -1e16]) == 1.0

    def test_empty(self):
        assert compensated_sum([]) == 0.0

    def test_matches_fsum_within_ulp(self):
        rng = np.random.default_rng(123)
        vals = rng.standard_normal(1_000_000) * np.exp(rng.uniform(-8, 8, 1_000_000))
        exact = math.fsum(vals)
        got = compensated_sum(vals)
        assert abs(got - exact) <= np.spacing(abs(exact))

    def test_bitwise_reproducible(self):
        rng = np.random.default_rng(9)
        vals = rng.standard_normal(10_001)
        a = compensated_sum(vals)
        b = compensated_sum(list(vals))
        assert a == b


class TestGridConfig:
    def test_defaults_valid(self):
        GridConfig()

    def test_validation(self):
        with pytest.raises(ValueError):
            GridConfig(rel_tol=0.0)
        with pytest.raises(ValueError):
            GridConfig(window_multiplier=1.0)
        with pytest.raises(ValueError):
            GridConfig(theta_points=1)
        with pytest.raises(ValueError):
            GridConfig(harmonic_tail=1.5)
        with pytest.raises(ValueError):
            GridConfig(max_subdivisions=0)
