import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdft.special_functions import (
    ZETA2, DomainError, TruncatedLogSeries, binomial_series, bloch_wigner,
    check_landen, check_pentagon, check_reflection, li2, rogers_L,
    rogers_L_series,
)

unit = st.floats(min_value=0.01, max_value=0.99)


def mp_li2(z):
    return complex(mpmath.polylog(2, z))


class TestLi2:
    def test_special_values(self):
        assert li2(0) == 0
        assert abs(li2(1) - math.pi ** 2 / 6) < 1e-15
        assert abs(li2(0.5) - (math.pi ** 2 / 12 - math.log(2) ** 2 / 2)) < 1e-15

    @pytest.mark.parametrize("z", [0.3, -0.7, -4.0, 0.9 + 0.1j, 2 + 1j, -3 - 5j,
                                    0.5 + 0.5j, 1 + 1e-3j, 0.99, 12j])
    def test_against_mpmath(self, z):
        assert abs(li2(z) - mp_li2(z)) < 1e-14 * max(1, abs(mp_li2(z)))

    def test_cut_rejected(self):
        with pytest.raises(DomainError):
            li2(2.0)

    @settings(max_examples=200, deadline=None)
    @given(st.complex_numbers(max_magnitude=20, allow_nan=False, allow_infinity=False))
    def test_random_points(self, z):
        if z.imag == 0 and z.real > 1:
            return
        ref = mp_li2(z)
        assert abs(li2(z) - ref) < 1e-13 * max(1, abs(ref))


class TestRogers:
    def test_values(self):
        assert abs(rogers_L(1) - ZETA2) < 1e-15
        assert rogers_L(0) == 0
        assert abs(rogers_L(0.5) - math.pi ** 2 / 12) < 1e-15

    @pytest.mark.parametrize("z", [-1.0, -0.2, 3.0])
    def test_excluded_rays(self, z):
        with pytest.raises(DomainError):
            rogers_L(z)

    def test_definition(self):
        z = 0.4 + 0.7j
        assert abs(rogers_L(z) - (mp_li2(z) + 0.5 * cmath.log(z) * cmath.log(1 - z))) < 1e-14


class TestIdentities:
    def test_reflection_samples(self):
        for z in (0.3, 0.9 + 0.1j):
            a, b = check_reflection(z)
            assert a < 1e-12 and b < 1e-12
        assert check_reflection(0.5)[0] < 1e-15

    def test_pentagon_samples(self):
        assert check_pentagon(0.3, 0.3) < 1e-12
        assert check_pentagon(0.7, 0.2) < 1e-12
        assert check_pentagon(0.6, 0) == 0

    def test_grids(self):
        xs = np.linspace(0.01, 0.99, 100)
        assert max(max(check_reflection(float(x))) for x in xs) < 1e-12
        g = np.linspace(0.01, 0.99, 20)
        assert max(check_pentagon(float(x), float(y)) for x in g for y in g) < 1e-12
        assert max(check_landen(float(x)) for x in xs) < 1e-12

    @settings(max_examples=100, deadline=None)
    @given(unit, unit)
    def test_pentagon_property(self, x, y):
        assert check_pentagon(x, y) < 1e-12

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.05, 3.0), st.floats(0.05, 3.1))
    def test_complex_reflection_property(self, r, th):
        z = cmath.rect(r, th)
        if abs(z.imag) < 1e-3:
            return
        a, b = check_reflection(z)
        assert a < 1e-12 and b < 1e-12

    def test_bloch_wigner_regular(self):
        assert abs(bloch_wigner(cmath.exp(1j * math.pi / 3)) - 1.0149416064096536) < 1e-12

    def test_bloch_wigner_symmetry(self):
        z = 0.3 + 0.8j
        assert abs(bloch_wigner(z) + bloch_wigner(z.conjugate())) < 1e-14
        assert abs(bloch_wigner(z) - bloch_wigner(1 - 1 / z)) < 1e-13


class TestSeries:
    def test_rogers_series_coefficients(self):
        s1 = rogers_L_series(1)
        assert s1.coeff(1, 0) == 1 and s1.coeff(1, 1) == Fraction(-1, 2)
        assert rogers_L_series(0) == TruncatedLogSeries.zero(0)
        s2 = rogers_L_series(2)
        assert s2.coeff(2, 0) == Fraction(1, 4) and s2.coeff(2, 1) == Fraction(-1, 4)

    def test_series_remainder_order(self):
        K = 6
        s = rogers_L_series(K)
        errs = []
        for x in (0.05, 0.1):
            approx = complex(s.at(x, math.log(x)))
            errs.append(abs(approx - rogers_L(x)))
        # remainder ~ x^{K+1} |log x|: halving x shrinks it by about 2^{K+1}
        ratio = errs[1] / errs[0]
        assert 2 ** K < ratio < 2 ** (K + 2)

    def test_bounds_enforced(self):
        with pytest.raises(ValueError):
            TruncatedLogSeries(2, 0, {(3, 0): 1})
        with pytest.raises(ValueError):
            TruncatedLogSeries(2, 0, {(1, 1): 1})

    def test_product_truncates(self):
        x = TruncatedLogSeries(3, 0, {(1, 0): 1})
        assert (x * x * x * x) == TruncatedLogSeries.zero(3)
        one_minus = TruncatedLogSeries(3, 0, {(0, 0): 1, (1, 0): -1})
        assert one_minus ** 2 == binomial_series(2, 3)

    def test_exp_log_inverse(self):
        L = rogers_L_series(5)
        assert (L.exp() * (-L).exp()).truncate(5) == TruncatedLogSeries.one(5)

    def test_binomial_negative(self):
        b = binomial_series(-1, 4)
        assert all(b.coeff(k) == 1 for k in range(5))
