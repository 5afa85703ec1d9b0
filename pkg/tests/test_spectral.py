import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jacobi_diffusion.errors import RegimeError, TruncationWarning
from jacobi_diffusion.model import JacobiCoeffs, ShapeParams, quad_dm, total_mass
from jacobi_diffusion.spectral import (
    decay_rate,
    expand,
    gap_bound_check,
    jacobi_Q_table,
    poincare_constant,
    qnorm_sq,
    semigroup_apply,
    truncation_order,
)
from jacobi_diffusion.specfun import jacobi_Q

# scipy quad / mpmath oracles
QNORM_ALPHA_BETA_ONE_N2 = 0.011904761904761906  # 1/84
GAP_X2_LHS = 0.07419254612184221  # f = x**2, alpha = beta = 0.5, t = 0.5
GAP_X2_RHS = 0.119898498374052
POINCARE_LOG_05 = 6.71648456161997948  # beta = -1, alpha = 0.5, sigma = 1
POINCARE_LOG_03 = 7.28981029691096288  # alpha = -1, beta = 0.3

ONE = JacobiCoeffs.from_shape(1.0, 1.0)


class TestDecay:
    def test_examples(self):
        assert decay_rate(ONE, 0) == 0.0
        assert decay_rate(ONE, 1) == pytest.approx(2.0, rel=1e-15)

    @given(st.floats(-0.95, 3.0), st.floats(-0.95, 3.0), st.floats(0.3, 2.0), st.floats(0.5, 3.0))
    def test_first_rate_is_b(self, al, be, sg, d):
        c = JacobiCoeffs.from_shape(al, be, sg, d)
        assert decay_rate(c, 1) == pytest.approx(c.b, rel=1e-12)


class TestNorms:
    def test_zero_is_mass(self):
        c = JacobiCoeffs.from_shape(0.3, -0.6, 1.0, 2.0)
        assert qnorm_sq(c, 0) == pytest.approx(total_mass(c), rel=1e-12)

    def test_flat_first(self):
        assert qnorm_sq(JacobiCoeffs.from_shape(0.0, 0.0), 1) == pytest.approx(1 / 3, rel=1e-13)

    def test_golden(self):
        assert qnorm_sq(ONE, 2) == pytest.approx(QNORM_ALPHA_BETA_ONE_N2, rel=1e-12)

    def test_table_matches_direct_sum(self):
        c = JacobiCoeffs.from_shape(0.4, 1.3, 1.0, 1.5)
        x = np.linspace(0.0, 1.5, 11)
        table = jacobi_Q_table(c, 8, x)
        for n in range(9):
            np.testing.assert_allclose(table[n], jacobi_Q(n, 0.4, 1.3, x, 1.5), rtol=1e-11, atol=1e-11)

    @pytest.mark.parametrize("al,be", [(0.5, -0.5), (-0.7, 2.0), (1.0, 1.0)])
    def test_orthogonality(self, al, be):
        c = JacobiCoeffs.from_shape(al, be)
        for n in range(6):
            for m in range(n + 1, 7):
                ip = quad_dm(c, lambda x: jacobi_Q_table(c, m, x)[n] * jacobi_Q_table(c, m, x)[m])
                assert abs(ip) < 1e-11


class TestExpansion:
    def test_basis_function(self):
        c = JacobiCoeffs.from_shape(0.3, 0.8)
        ex = expand(c, lambda x: jacobi_Q_table(c, 2, x)[2], 6)
        np.testing.assert_allclose(ex.coefficients, [0, 0, 1, 0, 0, 0, 0], atol=1e-10)

    def test_constant(self):
        ex = expand(ONE, lambda x: np.ones_like(x), 4)
        np.testing.assert_allclose(ex.coefficients, [1, 0, 0, 0, 0], atol=1e-12)

    def test_identity_mean(self):
        ex = expand(ONE, lambda x: x, 3)
        assert ex.coefficients[0] == pytest.approx(0.5, rel=1e-13)
        # x = (Q_0 + Q_1) / 2 since Q_1 = 2x - 1 here
        assert ex.coefficients[1] == pytest.approx(0.5, rel=1e-12)
        assert abs(ex.coefficients[2]) < 1e-12

    def test_rejects_killing(self):
        with pytest.raises(RegimeError):
            expand(JacobiCoeffs.from_shape(-1.0, 0.5), lambda x: x, 3)


class TestSemigroup:
    def test_time_zero(self):
        x = np.array([0.1, 0.5, 0.8])
        with pytest.warns(TruncationWarning):
            out = semigroup_apply(ONE, 0.0, lambda v: v**2, x, N=4)
        np.testing.assert_allclose(out, x**2, rtol=1e-12)

    @pytest.mark.parametrize("t", [0.01, 1.0, 10.0])
    def test_conservation(self, t):
        c = JacobiCoeffs.from_shape(-0.5, 0.7, 1.2, 2.0)
        x = np.linspace(0.05, 1.95, 7)
        np.testing.assert_allclose(semigroup_apply(c, t, lambda v: np.ones_like(v), x), 1.0, atol=1e-12)

    def test_eigen_decay(self):
        x = np.linspace(0.05, 0.95, 9)
        q1 = lambda v: jacobi_Q_table(ONE, 1, v)[1]
        np.testing.assert_allclose(semigroup_apply(ONE, 1.0, q1, x), math.exp(-2) * q1(x), rtol=1e-12, atol=1e-14)

    def test_semigroup_law(self):
        c = JacobiCoeffs.from_shape(0.2, -0.4)
        f = lambda v: np.cos(3 * v)
        x = np.linspace(0.1, 0.9, 5)
        N = 30
        two_steps = expand(c, f, N).evolve(0.2).evolve(0.3)(x)
        np.testing.assert_allclose(semigroup_apply(c, 0.5, f, x, N=N), two_steps, rtol=1e-12)

    def test_truncation_order(self):
        N = truncation_order(ONE, 1.0)
        assert math.exp(-decay_rate(ONE, N)) <= 1e-14 < math.exp(-decay_rate(ONE, N - 1))
        assert truncation_order(ONE, 0.0) is None


class TestGapBound:
    def test_constant(self):
        lhs, _ = gap_bound_check(ONE, lambda x: np.ones_like(x), 0.7)
        assert lhs < 1e-13

    def test_tight_on_first_mode(self):
        q1 = lambda v: jacobi_Q_table(ONE, 1, v)[1]
        lhs, rhs = gap_bound_check(ONE, q1, 0.8)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_golden(self):
        c = JacobiCoeffs.from_shape(0.5, 0.5)
        lhs, rhs = gap_bound_check(c, lambda x: x**2, 0.5)
        assert lhs == pytest.approx(GAP_X2_LHS, rel=1e-10)
        assert rhs == pytest.approx(GAP_X2_RHS, rel=1e-10)
        assert lhs <= rhs


class TestPoincare:
    def test_power_cases(self):
        assert poincare_constant(ShapeParams(-1.5, 0.0), 1.0) == pytest.approx(8.0, rel=1e-15)
        assert poincare_constant(ShapeParams(-2.0, 1.0), 2.0) == pytest.approx(0.5, rel=1e-15)

    def test_logarithmic_cases(self):
        assert poincare_constant(ShapeParams(0.5, -1.0), 1.0) == pytest.approx(POINCARE_LOG_05, rel=1e-10)
        assert poincare_constant(ShapeParams(-1.0, 0.3), 1.0) == pytest.approx(POINCARE_LOG_03, rel=1e-10)

    def test_regime(self):
        with pytest.raises(RegimeError):
            poincare_constant(ShapeParams(0.5, 0.5), 1.0)
        with pytest.raises(RegimeError):
            poincare_constant(ShapeParams(-1.5, -1.5), 1.0)
