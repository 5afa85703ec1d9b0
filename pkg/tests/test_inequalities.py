import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from jacobi_diffusion.errors import DomainError, RegimeError
from jacobi_diffusion.inequalities import (
    HardyCase,
    M_function,
    hardy_admissible,
    hardy_constant,
    psi_reference,
)
from jacobi_diffusion.model import JacobiCoeffs, ShapeParams, density_m, energy_form, quad_dm
from jacobi_diffusion.verify import random_bumps

# nested scipy quad oracle for the Hoelder factor, frozen
HARDY_GOLDEN = [
    ((0.0, -1.5, 0.0, 0.0, 1.0, 1.0), HardyCase.CASE_I, 2.4861033321079486),
    ((0.5, -1.2, 0.3, -0.4, 1.3, 2.0), HardyCase.CASE_I, 1.1015679286315276),
    ((-1.3, 0.4, -0.2, -0.1, 0.7, 1.5), HardyCase.CASE_II, 3.3188566839238125),
    ((-1.2, -1.2, -0.3, -0.3, 1.0, 1.0), HardyCase.CASE_III, 10.420584787474887),
    ((-1.5, -2.5, 0.5, 0.6, 1.0, 1.0), HardyCase.CASE_III, 2.3980597760921287),
]


class TestAdmissibility:
    def test_examples(self):
        assert hardy_admissible(ShapeParams(0.0, -1.5), 0.0, 0.0).admissible_case is HardyCase.CASE_I
        assert hardy_admissible(ShapeParams(0.0, 0.0), 3.0, 3.0).admissible_case is HardyCase.INADMISSIBLE
        assert hardy_admissible(ShapeParams(-1.2, -1.2), -0.3, -0.3).admissible_case is HardyCase.CASE_III

    def test_thresholds_are_strict(self):
        # case I: r must exceed (-2 - beta) / 2 = 0.25 for beta = -2.5
        assert not hardy_admissible(ShapeParams(0.0, -2.5), 0.25, 0.0).admissible
        assert hardy_admissible(ShapeParams(0.0, -2.5), 0.2500001, 0.0).admissible

    @given(st.floats(-3, 2), st.floats(-3, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 1), st.floats(0, 1))
    def test_monotone_in_weights(self, al, be, r, s, dr, ds):
        # raising either exponent only makes the weight smaller near the boundary
        if hardy_admissible(ShapeParams(al, be), r, s).admissible:
            assert hardy_admissible(ShapeParams(al, be), r + dr, s + ds).admissible


class TestConstant:
    @pytest.mark.parametrize("params,case,expected", HARDY_GOLDEN)
    def test_golden(self, params, case, expected):
        al, be, r, s, sg, d = params
        spec = hardy_constant(JacobiCoeffs.from_shape(al, be, sg, d), r, s)
        assert spec.admissible_case is case
        assert 0 < spec.constant < math.inf
        assert spec.constant == pytest.approx(expected, rel=1e-6)

    def test_sigma_scaling(self):
        one = hardy_constant(JacobiCoeffs.from_shape(0.0, -1.5, 1.0, 1.0), 0.0, 0.0).constant
        two = hardy_constant(JacobiCoeffs.from_shape(0.0, -1.5, 2.0, 1.0), 0.0, 0.0).constant
        assert two == pytest.approx(one / 2, rel=1e-12)

    def test_inadmissible(self):
        with pytest.raises(RegimeError):
            hardy_constant(JacobiCoeffs.from_shape(0.5, 0.5), 0.0, 0.0)

    @pytest.mark.parametrize("params,case,expected", HARDY_GOLDEN[:3])
    def test_inequality_on_bumps(self, params, case, expected):
        al, be, r, s, sg, d = params
        c = JacobiCoeffs.from_shape(al, be, sg, d)
        C = hardy_constant(c, r, s).constant
        for f, fp in random_bumps(d, 5, seed=11):
            lhs = quad_dm(c, lambda x: np.abs(f(x)) * x**r * (d - x) ** s)
            assert lhs <= C * math.sqrt(energy_form(c, fp)) * (1 + 1e-8)


class TestTailMass:
    def test_endpoint_and_flat(self):
        assert M_function(JacobiCoeffs.from_shape(0.3, -2.0), 1.0) == 0.0
        y = np.linspace(0.05, 0.95, 7)
        np.testing.assert_allclose(M_function(JacobiCoeffs.from_shape(0.0, 0.0), y), 1 - y, rtol=1e-13)

    def test_against_quad(self):
        c = JacobiCoeffs.from_shape(0.5, -1.2)
        ref = quad(lambda x: x**-1.2 * (1 - x) ** 0.5, 0.5, 1, epsabs=1e-14, epsrel=1e-13)[0]
        assert M_function(c, 0.5) == pytest.approx(ref, rel=1e-8)

    def test_derivative_is_minus_density(self):
        c = JacobiCoeffs.from_shape(0.7, -1.6, 1.0, 2.0)
        y = np.linspace(0.1, 1.9, 13)
        h = 1e-6
        fd = (M_function(c, y + h) - M_function(c, y - h)) / (2 * h)
        np.testing.assert_allclose(fd, -density_m(c, y), rtol=1e-6)

    def test_regime(self):
        with pytest.raises(RegimeError):
            M_function(JacobiCoeffs.from_shape(-1.0, 0.0), 0.5)


class TestReference:
    def test_case_i(self):
        psi = psi_reference(JacobiCoeffs.from_shape(-1.0, 0.5))
        x = np.linspace(0.1, 0.9, 5)
        np.testing.assert_allclose(psi(x), -(1 - x), rtol=1e-15)

    def test_case_ii(self):
        psi = psi_reference(JacobiCoeffs.from_shape(0.5, -2.0))
        assert psi(0.5) == pytest.approx(-0.125, rel=1e-15)

    def test_case_iii_glues(self):
        psi = psi_reference(JacobiCoeffs.from_shape(-1.5, -1.5), 0.5)
        assert psi(0.5) == pytest.approx(1.0, rel=1e-15)
        assert psi(0.5 + 1e-12) == pytest.approx(1.0, rel=1e-9)
        with pytest.raises(DomainError):
            psi_reference(JacobiCoeffs.from_shape(-1.5, -1.5), 1.0)

    @pytest.mark.parametrize("al,be", [(-1.5, 0.5), (0.2, -1.3), (-1.2, -2.0)])
    def test_finite_energy(self, al, be):
        c = JacobiCoeffs.from_shape(al, be)
        psi = psi_reference(c)
        assert math.isfinite(energy_form(c, psi.derivative, tol=1e-8))

    def test_regular_has_none(self):
        with pytest.raises(RegimeError):
            psi_reference(JacobiCoeffs.from_shape(0.5, 0.5))
