import cmath
import os
import subprocess
import sys
import textwrap
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hdft.correlators import (
    admissible_grid, beta_sum_identity_check,
    beta_sum_identity_sweep, epsilon_triple, expansion_identity_check,
    factorization_check, five_point_closed, five_point_oracle, five_point_raw,
    five_point_vacuum_closed, four_point_closed, four_point_oracle,
    four_point_swapped, four_point_swapped_closed, four_point_value,
    locality_check,
)
from hdft.fock_oracle import TruncationOverflow, label
from hdft.special_functions import TruncatedLogSeries, rogers_L, rogers_L_series

E1, E2, E3 = (1, 0, 0), (0, 1, 0), (0, 0, 1)
A, B, C = label(E1), label(E2), label(E3)
ZERO = label()

vec = st.tuples(*[st.integers(-3, 3)] * 3)


def test_epsilon_examples():
    assert epsilon_triple(E1, E2, E3) == 1
    assert epsilon_triple(E1, E1, E3) == 0
    assert epsilon_triple((1, 0, 0), (0, 2, 0), (0, 0, 4)) == 8


@given(vec, vec, vec)
def test_epsilon_antisymmetric(a, b, c):
    e = epsilon_triple(a, b, c)
    assert epsilon_triple(b, a, c) == -e == epsilon_triple(a, c, b)


class TestFourPoint:
    def test_unit_windings_order_one(self):
        s, form = four_point_closed(A + B + C, A, B, C, 1)
        assert s == TruncatedLogSeries(1, 1, {(0, 0): 1, (1, 0): 1, (1, 1): Fraction(-1, 2)})
        assert form.dilogs == ((1, "w/z"),)

    def test_coplanar(self):
        a, b, c = label((1, 1, 0)), label((0, 1, 0)), label((1, 0, 0))
        s, form = four_point_closed(a + b + c, a, b, c, 5)
        assert s == TruncatedLogSeries.one(5)
        assert form.dilogs == ()

    def test_binomial_only(self):
        a, b = label(E1), label((0, 0, 0), E1)
        _, form = four_point_closed(a + b, a, b, ZERO, 4)
        assert form.binomials == ((("z", "w"), 1),)
        assert form.dilogs == ()

    def test_mismatch(self):
        s, form = four_point_closed(A, A, B, C, 3)
        assert form.label_mismatch and s == TruncatedLogSeries.zero(3)
        assert four_point_oracle(A, A, B, C, 3) == TruncatedLogSeries.zero(3)

    def test_oracle_matches_closed_unit(self):
        d = A + B + C
        assert four_point_oracle(d, A, B, C, 6) == four_point_closed(d, A, B, C, 6)[0]

    def test_oracle_weight_too_small(self):
        with pytest.raises(TruncationOverflow):
            four_point_oracle(A + B + C, A, B, C, 4, weight=3)

    def test_flux_off_lattice(self):
        a, b = label(E1, E2), label(E2, E3)
        g = label(E3)
        d = a + b + g
        s = four_point_oracle(d, a, b, g, 5, flux=False)
        closed, form = four_point_closed(d, a, b, g, 5, flux=False)
        assert s == closed and s.log_degree() == 0
        assert form.dilogs == ()

    def test_flux_off_unit_pairing(self):
        a, b = label(E1), label((0, 0, 0), E1)
        s = four_point_oracle(a + b, a, b, ZERO, 4, flux=False)
        assert s == TruncatedLogSeries(4, 0, {(0, 0): 1, (1, 0): -1})

    @pytest.mark.parametrize("w", [((1, -1, 0), (0, 1, 1), (1, 0, -1)),
                                   ((-1, 0, 1), (1, 1, 0), (0, -1, 1))])
    def test_oracle_general(self, w):
        a, b, c = (label(x) for x in w)
        d = a + b + c
        assert four_point_oracle(d, a, b, c, 6) == four_point_closed(d, a, b, c, 6)[0]

    def test_oracle_with_momenta(self):
        a, b, c = label(E1, E2), label(E2, (1, 0, -1)), label(E3, (2, 0, 0))
        d = a + b + c
        assert four_point_oracle(d, a, b, c, 5) == four_point_closed(d, a, b, c, 5)[0]
        assert four_point_swapped(d, a, b, c, 5) == four_point_swapped_closed(d, a, b, c, 5)[0]

    def test_swapped(self):
        d = A + B + C
        s = four_point_swapped(d, A, B, C, 6)
        assert s == (rogers_L_series(6) * -1).exp()
        _, form = four_point_swapped_closed(d, A, B, C, 6)
        assert form.dilogs == ((-1, "z/w"),)

    def test_antisymmetry_transport(self):
        d = A + B + C
        _, f1 = four_point_closed(d, A, B, C, 2)
        _, f2 = four_point_closed(d, B, A, C, 2)
        assert f1.dilogs[0][0] == -f2.dilogs[0][0]

    def test_locality(self):
        r = locality_check(A, B, C)
        assert r["residual"] < 1e-10
        assert locality_check(A, A, C)["residual"] == 0

    def test_value_matches_series(self):
        d = A + B + C
        z, w = 5.0, 0.4
        s, _ = four_point_closed(d, A, B, C, 30)
        x = w / z
        assert abs(complex(s.at(x, cmath.log(x))) - four_point_value(d, A, B, C, z, w)) < 1e-14


class TestFivePoint:
    D4 = label((1, 1, 1))

    def test_raw_vs_closed_grid(self):
        psi = A + B + C + self.D4
        worst = 0.0
        for z, w, t in admissible_grid():
            c = five_point_closed(psi, A, B, C, self.D4, z, w, t)
            r = five_point_raw(psi, A, B, C, self.D4, z, w, t)
            worst = max(worst, abs(r - c) / abs(c))
        assert worst < 1e-10

    def test_raw_example(self):
        pts = [0.9 * v for v in (4, 2, 1)]
        psi = A + B + C + self.D4
        c = five_point_closed(psi, A, B, C, self.D4, *pts)
        assert abs(five_point_raw(psi, A, B, C, self.D4, *pts) - c) / abs(c) < 1e-10

    def test_mismatch_is_zero(self):
        assert five_point_raw(A, A, A, A, A, 8, 2, 0.5) == 0
        assert five_point_closed(A, A, B, C, self.D4, 8, 2, 0.5) == 0

    def test_delta_zero(self):
        psi = A + B + C
        for z, w, t in admissible_grid():
            v = five_point_closed(psi, A, B, C, ZERO, z, w, t)
            ref = cmath.exp(rogers_L((w - t) / (z - t)))
            assert abs(v - ref) < 1e-12 * abs(ref)

    def test_t_zero(self):
        psi = A + B + C
        z, w = 7 + 1.5j, 2.5 - 0.8j
        v = five_point_closed(psi, A, B, C, ZERO, z, w, 0)
        assert abs(v - four_point_value(psi, A, B, C, z, w)) < 1e-12

    def test_factorization(self):
        d = label((1, 1, 0))
        psi = A + B + C + d
        assert factorization_check(psi, A, B, C, d, 4, 2, 0.5)["residual"] < 1e-10
        for z, w, t in admissible_grid():
            assert factorization_check(psi, A, B, C, self.D4, z, w, t)["residual"] < 1e-10

    def test_vacuum_closed_single_dilog(self):
        d = -(A + B + C)
        for z, w, t in admissible_grid():
            v = five_point_vacuum_closed(A, B, C, z, w, t)
            assert abs(v - five_point_closed(ZERO, A, B, C, d, z, w, t)) < 1e-12 * abs(v)

    def test_vacuum_oracle(self):
        d = -(A + B + C)
        r = five_point_oracle(ZERO, A, B, C, d, 8, 2, 0.5, weight=10)
        assert abs(r.value - five_point_vacuum_closed(A, B, C, 8, 2, 0.5)) < 10 * r.bound

    def test_oracle_small_weight(self):
        r = five_point_oracle(A + B + C, A, B, C, ZERO, 8, 2 + 1j, 0.3 + 0.4j, weight=10)
        c = five_point_closed(A + B + C, A, B, C, ZERO, 8, 2 + 1j, 0.3 + 0.4j)
        assert abs(r.value - c) < r.bound

    def test_oracle_flux_off_lattice(self):
        r = five_point_oracle(A + B + C, A, B, C, ZERO, 8, 2, 0.5, weight=6, flux=False)
        assert abs(r.value - 1) < 1e-14
        # pairings (a, b) = 2, all others 0: only (z - w)^2 survives
        a, b, c = label(E1, E2), label(E2, E1), label(E3, E3)
        r = five_point_oracle(a + b + c, a, b, c, ZERO, 8, 2, 0.5, weight=8, flux=False)
        assert abs(r.value - 36) < 1e-12

    def test_oracle_mismatch_and_domain(self):
        assert five_point_oracle(A, A, B, C, ZERO, 8, 2, 0.5, weight=4).value == 0
        with pytest.raises(ValueError):
            five_point_oracle(A + B + C, A, B, C, ZERO, 2, 8, 0.5, weight=4)
        with pytest.raises(ValueError):
            five_point_oracle(A + B + C, A, B, C, ZERO, 3, 2, 0.5, weight=4)

    def test_closed_needs_pure_windings(self):
        with pytest.raises(ValueError):
            five_point_closed(A + B + C, label(E1, E2), B, C, ZERO, 8, 2, 0.5)


class TestSeriesIdentities:
    def test_expansion(self):
        r = expansion_identity_check(8)
        assert r.ok and r.checked == 8 * 7 // 2 + 16

    def test_expansion_small(self):
        assert expansion_identity_check(2).ok

    def test_beta(self):
        assert beta_sum_identity_check(1, 1).ok
        assert beta_sum_identity_check(1, 0).ok
        assert beta_sum_identity_sweep(12).ok


@pytest.mark.slow
def test_five_point_refinement_k20():
    """Weight 16 against weight 20, run in a fresh process to release memory."""
    code = textwrap.dedent("""
        from hdft.correlators import five_point_oracle, five_point_closed
        from hdft.fock_oracle import label
        a, b, c = label((1, 0, 0)), label((0, 1, 0)), label((0, 0, 1))
        args = (a + b + c, a, b, c, label(), 8, 2, 0.5)
        r16 = five_point_oracle(*args, weight=16)
        r20 = five_point_oracle(*args, weight=20)
        cl = five_point_closed(*args)
        print(repr(complex(r16)), repr(complex(r20)), repr(cl), r16.bound)
    """)
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         timeout=1800, env=dict(os.environ))
    assert out.returncode == 0, out.stderr
    v16, v20, cl, bound = (complex(x) for x in out.stdout.split())
    assert abs(v16 - v20) < 1e-6
    assert abs(v20 - cl) < abs(v16 - cl) + 1e-15
    assert abs(v16 - v20) <= bound.real
