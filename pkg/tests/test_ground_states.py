import cmath
import math
import random
from fractions import Fraction
from itertools import product

import pytest

from hdft.ground_states import (
    SectorLabel, bs_count_magnetic, bs_count_twisted, duality_label_table,
    heisenberg_sector_count, holonomy_cocycle_defect, holonomy_exponent,
    holonomy_phase, table_csv, theta, theta_peaks,
)

CUBE = list(product(range(-2, 3), repeat=3))


class TestTheta:
    def test_peaks(self):
        peaks = theta_peaks(1e-3, 3)
        assert len(peaks) == 3
        for p, want in zip(peaks, (0, 1 / 3, 2 / 3)):
            assert abs(p - want) <= 1e-3

    def test_single_peak(self):
        assert theta_peaks(1e-3, 1) == [0.0]

    def test_periodicity(self):
        rng = random.Random(5)
        for _ in range(30):
            t = rng.uniform(0.05, 3)
            n = rng.choice([1, 2, 3, -4])
            x1, x2 = rng.uniform(-1, 1), rng.uniform(-1, 1)
            th = theta(t, n, x1, x2)
            assert abs(theta(t, n, x1 + 1 / n, x2) - th) < 1e-12
            q = cmath.exp(-2j * math.pi * n * x1)
            assert abs(theta(t, n, x1, x2 + 1) - q * th) < 1e-12

    def test_domain(self):
        with pytest.raises(ValueError):
            theta(0, 1, 0, 0)


class TestCounts:
    def test_magnetic(self):
        assert bs_count_magnetic(3) == (3, False)
        assert bs_count_magnetic(1) == (1, False)
        assert bs_count_magnetic(0).free

    def test_twisted(self):
        assert bs_count_twisted((0, 2, 4)).modulus == 2
        c = bs_count_twisted((5, 1, 1))
        assert c.modulus == 1 and c.leaves == 5
        assert bs_count_twisted((0, 0, 0)).free

    def test_heisenberg(self):
        assert heisenberg_sector_count(2, 4, 1).modulus == 2
        assert heisenberg_sector_count(1, 1, 3).landau_levels == 3
        assert heisenberg_sector_count(1, 1, -3).landau_levels == 3
        c = heisenberg_sector_count(1, 0, 0)
        assert c.landau_free and c.modulus == 1

    def test_gcd_grading(self):
        for w2, w3 in product(range(-6, 7), repeat=2):
            assert bs_count_twisted((1, w2, w3)).modulus == \
                heisenberg_sector_count(w2, w3, 1).modulus

    def test_sector_label(self):
        s = SectorLabel("heisenberg", (2, 4, 1), 7, 2, 1)
        assert s.internal == 1 and not s.free
        with pytest.raises(ValueError):
            SectorLabel("sphere", (0, 0, 0), 0, 0, 0)


class TestHolonomy:
    def test_trivial(self):
        assert holonomy_phase((0, 0, 0), (1, 2, -1), (0.3, 0.1, 0.7)) == 1

    def test_along_x1(self):
        w, x = (1, 2, 3), (Fraction(1, 3), Fraction(2, 5), Fraction(1, 7))
        for g1 in range(-3, 4):
            g = (g1, 0, 0)
            e = holonomy_exponent(w, g, x)
            # no dx2 or dx3 component along the path: both representatives vanish
            assert e == holonomy_exponent(w, g, x, "polarized") == 0

    def test_polarized_cocycle_exact(self):
        rng = random.Random(9)
        w = (1, -2, 3)
        for _ in range(20):
            x = tuple(Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(3))
            for g1 in CUBE[::4]:
                for g2 in CUBE[::3]:
                    d = holonomy_cocycle_defect(w, g1, g2, x, "polarized")
                    assert d.denominator == 1

    def test_polarized_phase_multiplies(self):
        w, x = (2, 1, -1), (0.25, -0.4, 0.6)
        for g1, g2 in [((1, 0, 0), (0, 1, 0)), ((1, -1, 2), (2, 1, 0))]:
            x2 = tuple(a + b for a, b in zip(x, g1))
            g12 = tuple(a + b for a, b in zip(g1, g2))
            lhs = holonomy_phase(w, g12, x, "polarized")
            rhs = holonomy_phase(w, g1, x, "polarized") * holonomy_phase(w, g2, x2, "polarized")
            assert abs(lhs - rhs) < 1e-12

    def test_straight_defect_half_integer(self):
        e1, e2, e3 = (1, 0, 0), (0, 1, 0), (0, 0, 1)
        d = holonomy_cocycle_defect(e1, e2, e3, (0, 0, 0))
        assert d == Fraction(1, 2)
        rng = random.Random(1)
        for _ in range(20):
            x = tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(3))
            assert holonomy_cocycle_defect(e1, e2, e3, x) == d
            for g1, g2 in zip(CUBE[::7], CUBE[::11]):
                dd = holonomy_cocycle_defect((1, 2, -1), g1, g2, x)
                assert (2 * dd).denominator == 1

    def test_bad_path(self):
        with pytest.raises(ValueError):
            holonomy_exponent((1, 0, 0), (1, 0, 0), (0, 0, 0), "loop")


class TestDuality:
    @pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
    def test_bijection(self, N):
        r = duality_label_table(N)
        assert r["bijection"], r["first_mismatch"]
        assert r["twisted_sectors"] == r["heisenberg_sectors"]

    def test_rows(self):
        r = duality_label_table(1)
        row = next(x for x in r["rows"] if (x["w2"], x["w3"]) == (1, 0))
        assert row["twisted_modulus"] == row["heisenberg_modulus"] == 1
        zero = [x for x in r["rows"] if (x["w1"], x["w2"], x["w3"]) == (0, 0, 0)]
        assert zero and all(x["twisted_modulus"] == 0 == x["heisenberg_modulus"] for x in zero)
        text = table_csv(r)
        assert text.splitlines()[0].startswith("w1,w2,w3,p1")
        assert len(text.splitlines()) == 1 + r["twisted_sectors"]

    def test_bad_bound(self):
        with pytest.raises(ValueError):
            duality_label_table(0)
