from fractions import Fraction
from itertools import product

import pytest

from hdft.mode_algebra import (
    Hbar, LieElement, P, W, X, Xstar, bracket, eps, generators_up_to, grade,
    jacobiator, verify_jacobi,
)


def test_structure_constants():
    assert bracket(P(1), P(2)) == LieElement({W(3): -1})
    assert bracket(Xstar(1, 3), X(1, -3)) == LieElement({Hbar(): Fraction(-1, 3)})
    assert bracket(Xstar(1, 2), Xstar(2, -2)) == LieElement({W(3): Fraction(1, 4)})
    assert bracket(W(1), X(2, 5)) == 0


def test_zero_mode_brackets():
    assert bracket(P(1), X(1, 0)) == LieElement({Hbar(): 1})
    assert bracket(W(2), Xstar(2, 0)) == LieElement({Hbar(): 1})
    assert bracket(P(1), Xstar(2, 0)) == LieElement({X(3, 0): Fraction(-1, 2)})
    assert bracket(Xstar(1, 2), Xstar(2, 0)) == LieElement({X(3, 2): Fraction(1, 4)})
    assert bracket(Xstar(1, 0), Xstar(2, 0)) == 0


def test_epsilon():
    assert eps(1, 2, 3) == 1 and eps(2, 1, 3) == -1 and eps(1, 1, 2) == 0
    for i, j, k in product((1, 2, 3), repeat=3):
        assert eps(i, j, k) == -eps(j, i, k) == eps(j, k, i)


def test_grade():
    assert grade(Xstar(2, -3)) == -3
    assert grade(Hbar()) == 0
    assert grade(X(1, 7)) == 7


@pytest.fixture(scope="module")
def gens6():
    return generators_up_to(6)


def test_antisymmetry_and_grading(gens6):
    for a in gens6:
        for b in gens6:
            ab = bracket(a, b)
            assert ab == -bracket(b, a)
            for g, _ in ab.items():
                assert grade(g) == grade(a) + grade(b)


def test_hbar_central(gens6):
    assert all(bracket(Hbar(), g) == 0 for g in gens6)


def test_jacobiator_examples():
    assert jacobiator(Xstar(1, 2), Xstar(2, 3), Xstar(3, -5)) == 0
    assert jacobiator(Xstar(1, 4), Xstar(2, -4), Xstar(3, 0)) == 0
    assert jacobiator(P(1), P(1), Xstar(2, 3)) == 0


def test_verify_jacobi_small():
    r = verify_jacobi(2)
    assert r.ok and r.checked > 0
    assert verify_jacobi(1, kinds=("P", "W")).ok


def test_flux_off_oscillators():
    gens = generators_up_to(4)
    stars = [g for g in gens if g.kind == "Xstar"]
    assert all(bracket(a, b, flux=False) == 0 for a in stars for b in stars)
    assert bracket(P(1), P(2), flux=False) == 0
    assert verify_jacobi(2, flux=False).ok


def test_bad_direction():
    with pytest.raises(ValueError):
        W(4)
