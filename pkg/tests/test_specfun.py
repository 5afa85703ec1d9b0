import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from jacobi_diffusion.errors import PoleError
from jacobi_diffusion.specfun import (
    LimitKind,
    digamma,
    gamma_fn,
    gamma_pair,
    gauss_limit_regime,
    hyp2f1,
    hyp2f1_sym,
    jacobi_Q,
    rgamma,
    rgamma_pair,
)

# mpmath at 40 digits, frozen
SQRT_PI = 1.772453850905516027298167483341
COMPLEX_2F1 = 1.749842823793259497551493822099  # 2F1(1.5 - i, 1.5 + i; 2; 0.3)
POWER_COEF = 1.345074592605928344156309952698  # Gamma(1.5)Gamma(0.6)/(Gamma(1.2)Gamma(0.9))


class TestGamma:
    def test_small_integers(self):
        assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-15)
        assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-14)

    def test_half(self):
        assert gamma_fn(0.5) == pytest.approx(SQRT_PI, rel=1e-14)

    def test_poles(self):
        for z in (0.0, -1.0, -7.0):
            with pytest.raises(PoleError):
                gamma_fn(z)
            assert rgamma(z) == 0.0

    @given(st.floats(-30.0, 30.0).filter(lambda z: abs(z - round(z)) > 1e-3 or z > 0.5))
    def test_recurrence(self, z):
        lhs = gamma_fn(z + 1.0)
        rhs = z * gamma_fn(z)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    @given(st.floats(-20.0, 40.0).filter(lambda z: abs(z - round(z)) > 1e-3 or z > 0.5))
    def test_against_mpmath(self, z):
        assert gamma_fn(z) == pytest.approx(float(mp.gamma(z)), rel=1e-12)

    @given(st.floats(-10.0, 20.0).filter(lambda z: abs(z - round(z)) > 1e-3 or z > 0.5))
    def test_digamma(self, z):
        assert digamma(z) == pytest.approx(float(mp.digamma(z)), rel=1e-11, abs=1e-12)

    @given(st.floats(0.2, 5.0), st.floats(-6.0, 3.0))
    def test_pair_matches_complex(self, u, g2):
        g = mp.sqrt(mp.mpf(g2))
        if g2 >= 0 and (abs(u - float(g)) < 1e-2):
            return
        ref = mp.re(mp.gamma(u + g) * mp.gamma(u - g))
        assert gamma_pair(u, g2) == pytest.approx(float(ref), rel=1e-11)
        assert rgamma_pair(u, g2) == pytest.approx(float(1 / ref), rel=1e-11)


class TestHyp2f1:
    def test_zero_upper_parameter(self):
        assert hyp2f1(0.0, 3.0, 2.0, 0.7).value == 1.0

    def test_log_identity(self):
        assert hyp2f1(1.0, 1.0, 2.0, 0.5).value == pytest.approx(2 * math.log(2), rel=1e-14)

    def test_terminating(self):
        # 1 - 6x + 6x^2 at x = 0.5
        assert hyp2f1(-2.0, 3.0, 1.0, 0.5).value == pytest.approx(-0.5, rel=1e-14)

    def test_symmetric_truncates(self):
        for A in (0.3, 1.7, 4.0):
            assert hyp2f1_sym(A, A * A, 1.5, 0.8).value == pytest.approx(1.0, abs=1e-14)

    def test_symmetric_log_identity(self):
        assert hyp2f1_sym(1.0, 0.0, 2.0, 0.5).value == pytest.approx(2 * math.log(2), rel=1e-14)

    def test_symmetric_complex_pair(self):
        assert hyp2f1_sym(1.5, -1.0, 2.0, 0.3).value == pytest.approx(COMPLEX_2F1, rel=1e-10)

    @given(
        st.floats(-3.0, 3.0),
        st.floats(-3.0, 3.0),
        st.floats(0.3, 4.0),
        st.floats(0.0, 0.999),
    )
    def test_against_mpmath(self, k, i, u, x):
        ref = float(mp.hyp2f1(k, i, u, x))
        got = hyp2f1(k, i, u, x).value
        assert got == pytest.approx(ref, rel=1e-9, abs=1e-12 * max(1.0, abs(ref)))

    def test_near_one_against_mpmath(self):
        for k, i, u in [(0.5, 0.25, 2.0), (1.0, 1.0, 2.0), (1.2, 0.9, 1.5), (-0.3, 0.7, 0.9)]:
            x = 1 - 1e-6
            ref = float(mp.hyp2f1(k, i, u, x))
            assert hyp2f1(k, i, u, x).value == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("m", [-2, -1, 0, 1, 2])
    @pytest.mark.parametrize("gap", [2e-3, 5e-4, 1e-5, 1e-7, 1e-10, -1e-6, -1e-4])
    def test_near_integer_gap(self, m, gap):
        # upsilon - kappa - iota = m + gap, where the connection formula cancels
        k, u = -0.4, 1.7
        i = u - k - m - gap
        for x in (0.76, 0.9, 0.999):
            ref = float(mp.hyp2f1(k, i, u, x))
            assert hyp2f1(k, i, u, x).value == pytest.approx(ref, rel=1e-9)


class TestGaussLimit:
    def test_finite(self):
        reg = gauss_limit_regime(0.0, 0.5, 2.0)
        assert reg.kind is LimitKind.FINITE_GAUSS
        assert reg.coefficient == pytest.approx(1.0, rel=1e-14)

    def test_logarithmic(self):
        reg = gauss_limit_regime(1.0, 1.0, 2.0)
        assert reg.kind is LimitKind.LOGARITHMIC
        assert reg.coefficient == pytest.approx(1.0, rel=1e-14)

    def test_power(self):
        reg = gauss_limit_regime(1.2, 0.9, 1.5)
        assert reg.kind is LimitKind.POWER_BLOWUP
        assert reg.exponent == pytest.approx(-0.6, abs=1e-14)
        assert reg.coefficient == pytest.approx(POWER_COEF, rel=1e-13)
        x = 1 - 1e-6
        ratio = hyp2f1(1.2, 0.9, 1.5, x).value / (1 - x) ** -0.6
        assert ratio == pytest.approx(POWER_COEF, rel=1e-3)


class TestJacobiQ:
    def test_degree_zero(self):
        x = np.linspace(0, 1, 7)
        assert np.all(jacobi_Q(0, 0.3, -0.4, x) == 1.0)

    def test_degree_one_at_d(self):
        assert jacobi_Q(1, 0.0, 0.0, 1.0) == 1.0

    def test_degree_two_recurrence(self):
        # Q_2(0.5) for alpha = beta = 1, checked against the mpmath Jacobi polynomial
        ref = float(mp.jacobi(2, 1, 1, 0.0) / mp.binomial(3, 2))
        assert jacobi_Q(2, 1.0, 1.0, 0.5) == pytest.approx(-0.25, rel=1e-12)
        assert jacobi_Q(2, 1.0, 1.0, 0.5) == pytest.approx(ref, rel=1e-12)
