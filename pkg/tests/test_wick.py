import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wickspde import wick
from wickspde.convolution import stationary_sample
from wickspde.errors import CapacityError, ConfigurationError, PreconditionError
from wickspde.field import FourierField


class TestHermite:
    def test_known_values(self):
        assert wick.hermite(3, 2.0, 1.0) == 2.0
        assert wick.hermite(4, 2.0, 1.0) == -5.0
        assert wick.hermite(0, 7.0, 3.0) == 1.0
        assert wick.hermite(1, 7.0, 3.0) == 7.0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10), st.floats(-4, 4), st.floats(0.05, 3))
    def test_scaling(self, m, x, C):
        lhs = wick.hermite(m, x, C)
        rhs = C ** (m / 2) * wick.hermite(m, x / math.sqrt(C), 1.0)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10 * C ** (m / 2))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10), st.floats(-4, 4), st.floats(0, 3))
    def test_recursion_vs_expanded(self, m, x, C):
        a = wick.hermite(m, x, C)
        b = wick.hermite_expanded(m, x, C)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-10)

    def test_hermite_all_matches(self):
        x = np.linspace(-2, 2, 11)
        allh = wick.hermite_all(6, x, 0.7)
        for m in range(7):
            np.testing.assert_allclose(allh[m], wick.hermite(m, x, 0.7), rtol=1e-14)

    def test_negative_inputs(self):
        with pytest.raises(PreconditionError):
            wick.hermite(-1, 0.0, 1.0)
        with pytest.raises(PreconditionError):
            wick.hermite(2, 0.0, -1.0)


class TestCoefficients:
    def test_small_degrees(self):
        assert wick.hermite_coeffs(2).a == (1, -1)
        assert wick.hermite_coeffs(0).a == (1,)
        assert wick.hermite_coeffs(4).a == (1, -6, 3)
        assert wick.hermite_coeffs(4).b == (1, 6, 3)

    def test_exact_roundtrip(self):
        assert wick.fraction_roundtrip_identity(6)
        assert wick.fraction_roundtrip_identity(12, Fraction(-5, 3))

    def test_monomials_to_hermite(self):
        # x^3 = H_3 + 3 C H_1
        assert wick.monomials_to_hermite([0, 0, 0, 1], Fraction(2)) == [0, 6, 0, 1]

    def test_capacity(self):
        with pytest.raises(CapacityError):
            wick.hermite_coeffs(60)


class TestRenorm:
    def test_single_mode(self):
        assert wick.renorm_constant(0, 1.0).value == 0.5
        assert wick.renorm_constant(0, 0.3).value == pytest.approx(0.045, rel=1e-15)

    def test_five_modes(self):
        expect = 0.5 + 2 / (4 * math.pi**2 + 1)
        assert wick.renorm_constant(1, 1.0).value == pytest.approx(expect, rel=1e-14)

    def test_annulus_sums(self):
        r = wick.renorm_constant(20, 0.7)
        assert sum(r.annulus_variances) == pytest.approx(r.value, rel=1e-15)
        table = r.mode_table()
        np.testing.assert_allclose(wick.annulus_sums(table), r.annulus_variances, rtol=1e-12)
        assert table.sum() == pytest.approx(r.value, rel=1e-12)

    def test_mode_rows(self):
        rows = wick.renorm_constant(2, 1.0).mode_rows()
        assert rows.shape == (13, 4)
        assert rows[:, 3].sum() == pytest.approx(wick.renorm_constant(2, 1.0).value)


class TestWickPowers:
    def test_first_power_is_identity(self):
        f = FourierField.random(4, np.random.default_rng(0), M=20)
        out = wick.wick_power_field(f, 1, 0.9)
        np.testing.assert_allclose(out.coeffs, f.coeffs, atol=1e-14)

    def test_constant_square(self):
        f = FourierField.constant(1.5, 3, M=16)
        out = wick.wick_power_field(f, 2, 0.4)
        assert out.coeff(0, 0).real == pytest.approx(1.5**2 - 0.4)
        assert np.abs(out.coeffs).sum() == pytest.approx(abs(1.5**2 - 0.4))

    def test_alias_guard(self):
        f = FourierField.random(8, np.random.default_rng(0), M=17)
        with pytest.raises(ConfigurationError):
            wick.wick_power_field(f, 3, 1.0)

    def test_square_mean_zero(self):
        N, sigma = 8, 1.0
        C = wick.renorm_constant(N, sigma).value
        c = stationary_sample(N, sigma, 10_000, np.random.default_rng(11))
        means = wick.wick_power_coeffs(c, 2, C, 3 * N + 1)[:, N, N].real
        est = wick.MonteCarloEstimate.from_samples(means)
        assert abs(est.zscore(0.0)) < 3


class TestIdentities:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 8), st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2), st.floats(0, 2))
    def test_binomial(self, n, x, y, C1, C2):
        lhs = wick.hermite(n, x + y, C1 + C2)
        rhs = wick.wick_binomial(n, x, y, C1, C2)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)

    def test_binomial_n2(self):
        x, y, C1, C2 = 0.3, -1.2, 0.5, 0.25
        assert wick.wick_binomial(2, x, y, C1, C2) == pytest.approx(
            (x * x - C1) + 2 * x * y + (y * y - C2))

    def test_multinomial_n2(self):
        f = FourierField.random(2, np.random.default_rng(5), M=9)
        cq = [0.1, 0.2, 0.05]
        a = wick.wick_multinomial_blocks(f, 2, cq, C=sum(cq))
        b = wick.wick_power_field(f, 2, sum(cq))
        assert np.abs(a.coeffs - b.coeffs).max() < 1e-12

    def test_multinomial_sweep(self):
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(100):
            f = FourierField.random(4, rng, M=17)
            cq = rng.uniform(0.01, 0.5, f.layout.n_annuli)
            a = wick.wick_multinomial_blocks(f, 3, cq, C=cq.sum())
            b = wick.wick_power_field(f, 3, cq.sum())
            worst = max(worst, (a - b).l2_norm() / b.l2_norm())
        assert worst < 1e-8

    def test_multinomial_sum_check(self):
        f = FourierField.random(2, np.random.default_rng(5), M=9)
        with pytest.raises(PreconditionError):
            wick.wick_multinomial_blocks(f, 2, [0.1, 0.2, 0.05], C=1.0)

    def test_multi_indices(self):
        idx = list(wick.multi_indices(3, 3))
        assert len(idx) == math.comb(5, 2)
        assert all(sum(i) == 3 for i in idx)
        assert wick.multinomial_weight((1, 1, 1)) == 6


class TestMoments:
    def test_identity_case(self):
        est = wick.wick_moment_mc(1, 1, 0.3, 1.0, 1.0, 100_000, np.random.default_rng(1))
        assert abs(est.zscore(0.3)) < 4

    def test_orthogonality(self):
        est = wick.wick_moment_mc(2, 3, 0.5, 1.0, 1.0, 100_000, np.random.default_rng(2))
        assert abs(est.zscore(0.0)) < 4

    def test_diagonal(self):
        est = wick.wick_moment_mc(2, 2, 1.0, 1.0, 1.0, 100_000, np.random.default_rng(3))
        assert abs(est.zscore(2.0)) < 4
        assert wick.exact_wick_moment(2, 2, 1.0) == 2.0

    def test_guards(self):
        rng = np.random.default_rng(0)
        with pytest.raises(PreconditionError):
            wick.wick_moment_mc(1, 1, 2.0, 1.0, 1.0, 10_000, rng)
        with pytest.raises(PreconditionError):
            wick.wick_moment_mc(1, 1, 0.1, 1.0, 1.0, 100, rng)
