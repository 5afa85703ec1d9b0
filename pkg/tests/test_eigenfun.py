import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from jacobi_diffusion.eigenfun import (
    BoundaryKind,
    eta,
    eta_limit_d,
    eta_prime,
    gamma_sq_of,
    monotone_guard,
    xi,
    xi_limit_0,
    xi_limit_d,
    xi_prime,
    xi_prime_cm_limit_0,
    xi_prime_cm_limit_d,
)
from jacobi_diffusion.errors import ParameterError
from jacobi_diffusion.model import JacobiCoeffs, density_cm

XI_NEAR_D = 19.07333631271313049  # mpmath 2F1 for alpha=-0.5, beta=0, lam=1 at 1 - 1e-6
XI_LIMIT_D = 19.12555597247153643  # Gamma ratio, same parameters
FLUX_LIMIT_D = 1.443592419657218547  # (alpha, beta, lam) = (0.5, 0.5, 1)


def test_gamma_sq_examples():
    flat = JacobiCoeffs.from_shape(0.0, 0.0)
    assert gamma_sq_of(flat, 1 / 8) == 0.0
    assert gamma_sq_of(flat, 1.0) == pytest.approx(-1.75, abs=1e-15)
    assert gamma_sq_of(JacobiCoeffs.from_shape(1.0, 1.0), 0.5) == pytest.approx(1.25, abs=1e-15)
    with pytest.raises(ParameterError):
        gamma_sq_of(flat, 0.0)


class TestLimitsAtZero:
    def test_regular_side(self):
        c = JacobiCoeffs.from_shape(0.5, 0.3)
        assert xi_limit_0(c, 1.0).value == 1.0
        assert xi(c, 1.0, 1e-9) == pytest.approx(1.0, abs=1e-8)

    def test_absorbing_side(self):
        c = JacobiCoeffs.from_shape(0.5, -1.3)
        assert xi_limit_0(c, 1.0).value == 0.0
        assert abs(xi(c, 1.0, 1e-9)) < 1e-10

    def test_flux(self):
        c = JacobiCoeffs.from_shape(0.5, -1.5)
        assert xi_prime_cm_limit_0(c, 1.0).value == pytest.approx(0.75, abs=1e-15)
        x = 1e-7
        flux = xi_prime(c, 1.0, x) * density_cm(c, x)
        assert flux == pytest.approx(0.75, rel=1e-5)

    def test_derivative_at_zero(self):
        c = JacobiCoeffs.from_shape(0.5, 0.5, 1.3, 2.0)
        lam = 0.8
        expected = 2 * lam / (1.3**2 * 2.0 * 1.5)
        assert xi_prime(c, lam, 1e-10) == pytest.approx(expected, rel=1e-8)


class TestLimitsAtD:
    def test_blowup(self):
        assert xi_limit_d(JacobiCoeffs.from_shape(0.0, 0.5), 1.0).kind is BoundaryKind.PLUS_INFINITY
        assert xi_limit_d(JacobiCoeffs.from_shape(1.2, -2.0), 1.0).kind is BoundaryKind.PLUS_INFINITY

    def test_finite_value(self):
        c = JacobiCoeffs.from_shape(-0.5, 0.0)
        lim = xi_limit_d(c, 1.0)
        assert lim.value == pytest.approx(XI_LIMIT_D, rel=1e-12)
        val = xi(c, 1.0, 1 - 1e-6)
        assert val == pytest.approx(XI_NEAR_D, rel=1e-11)
        # the approach is like (d - x)**(-alpha) = 1e-3, so 1e-3 is not reached here
        assert val == pytest.approx(XI_LIMIT_D, rel=5e-3)
        assert xi(c, 1.0, 1 - 1e-12) == pytest.approx(XI_LIMIT_D, rel=1e-5)

    def test_flux_limit(self):
        c = JacobiCoeffs.from_shape(0.5, 0.5)
        assert xi_prime_cm_limit_d(c, 1.0).value == pytest.approx(FLUX_LIMIT_D, rel=1e-12)
        x = 1 - 1e-8
        assert xi_prime(c, 1.0, x) * density_cm(c, x) == pytest.approx(FLUX_LIMIT_D, rel=1e-6)

    def test_eta_mirrors(self):
        c = JacobiCoeffs.from_shape(-1.4, 0.3)
        assert eta_limit_d(c, 1.0).value == 0.0
        assert eta_limit_d(JacobiCoeffs.from_shape(0.2, 0.3), 1.0).value == 1.0


class TestDerivatives:
    def test_finite_difference(self):
        c = JacobiCoeffs.from_shape(0.5, 0.5)
        h = 1e-5
        fd = (xi(c, 1.0, 0.37 + h) - xi(c, 1.0, 0.37 - h)) / (2 * h)
        assert fd == pytest.approx(xi_prime(c, 1.0, 0.37), rel=1e-6)

    @given(st.floats(-2.5, 2.0), st.floats(-2.5, 2.0), st.floats(0.1, 4.0), st.floats(0.05, 0.95))
    def test_finite_difference_random(self, al, be, lam, t):
        c = JacobiCoeffs.from_shape(al, be, 1.0, 1.0)
        h = 1e-5 * min(t, 1 - t)
        fd = (xi(c, lam, t + h) - xi(c, lam, t - h)) / (2 * h)
        # rounding in the difference quotient scales with |f| / h
        slack = 1e-6 * max(1.0, abs(xi(c, lam, t)))
        assert fd == pytest.approx(xi_prime(c, lam, t), rel=1e-5, abs=slack)
        fd_eta = (eta(c, lam, t + h) - eta(c, lam, t - h)) / (2 * h)
        slack = 1e-6 * max(1.0, abs(eta(c, lam, t)))
        assert fd_eta == pytest.approx(eta_prime(c, lam, t), rel=1e-5, abs=slack)


class TestDualityAndMonotonicity:
    def test_round_trip(self):
        c = JacobiCoeffs.from_shape(0.5, -0.5)
        assert abs(eta(c, 1.0, 0.3) - xi(JacobiCoeffs.from_shape(-0.5, 0.5), 1.0, 0.7)) <= 1e-14

    @given(st.floats(-0.99, 3.0), st.floats(-0.99, 3.0), st.floats(0.05, 5.0))
    def test_monotone_regular(self, al, be, lam):
        c = JacobiCoeffs.from_shape(al, be)
        assert monotone_guard(c, lam)
        x = np.linspace(0.01, 0.99, 40)
        assert np.all(np.diff(xi(c, lam, x)) > 0)
        assert np.all(np.diff(eta(c, lam, x)) < 0)

    def test_guard_below_bound(self):
        c = JacobiCoeffs.from_shape(-2.0, -2.0)
        bound = 0.5 * ((-3.0) / 2) ** 2
        assert not monotone_guard(c, 0.9 * bound)
        assert monotone_guard(c, 1.1 * bound)

    def test_against_mpmath(self):
        c = JacobiCoeffs.from_shape(0.7, -0.4, 1.2, 2.0)
        lam = 2.0
        A = (0.7 - 0.4 + 1) / 2
        g = mp.sqrt(mp.mpf(A * A - 2 * lam / 1.44))
        for x in (0.1, 0.9, 1.7):
            ref = mp.re(mp.hyp2f1(A - g, A + g, 0.6, x / 2.0))
            assert xi(c, lam, x) == pytest.approx(float(ref), rel=1e-11)
        assert math.isfinite(xi(c, lam, 1.9999))
