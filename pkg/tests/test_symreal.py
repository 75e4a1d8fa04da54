import math
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergolab.symreal import (
    BasisError,
    RadicalBasis,
    SymbolicReal,
    enclose,
    floor_exact,
    format_symreal,
    frac_of_multiples,
    parse_symreal,
    squarefree_part,
)

B = RadicalBasis((2, 3, 5))
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
elements = st.dictionaries(st.integers(0, B.dimension - 1), rationals, max_size=B.dimension).map(
    lambda d: SymbolicReal(B, d))


def dec_value(a: SymbolicReal) -> Decimal:
    getcontext().prec = 60
    return sum((Decimal(q.numerator) / Decimal(q.denominator)) * Decimal(B.elements[i]).sqrt()
               for i, q in a.coords.items()) if a.coords else Decimal(0)


def test_basis_elements_are_reduced_products():
    assert B.elements == (1, 2, 3, 5, 6, 10, 15, 30)
    assert RadicalBasis((6, 10)).elements == (1, 6, 10, 15)


def test_bad_radicands():
    with pytest.raises(BasisError):
        RadicalBasis((4,))
    with pytest.raises(BasisError):
        RadicalBasis((2, 2))
    with pytest.raises(BasisError):
        RadicalBasis((2,)).sqrt(3)


def test_squarefree_part():
    assert squarefree_part(12) == (2, 3)
    assert squarefree_part(30) == (1, 30)


def test_add_examples(b23):
    r2, r3 = b23.sqrt(2), b23.sqrt(3)
    assert (r2 + (-r2)).is_zero()
    assert (Fraction(1, 2) + r2) + Fraction(1, 2) == 1 + r2
    assert format_symreal(r2 + r3 + r2 * r3) == "sqrt(6) + sqrt(3) + sqrt(2)"


def test_mul_examples(b23):
    r2, r3 = b23.sqrt(2), b23.sqrt(3)
    assert r2 * r2 == b23.rational(2)
    assert r2 * r3 == b23.sqrt(6)
    assert (1 + r2) * (1 - r2) == b23.rational(-1)


def test_basis_mismatch():
    with pytest.raises(BasisError):
        RadicalBasis((2,)).sqrt(2) + RadicalBasis((3,)).sqrt(3)


def test_is_rational(b23):
    assert b23.rational(Fraction(3, 7)).is_rational()
    assert not b23.sqrt(2).is_rational()
    assert b23.zero().is_rational()


def test_enclose_examples(b23):
    e = enclose(b23.sqrt(2), 10)
    assert e.width <= Fraction(1, 2**10) and Fraction(141421356, 10**8) in e
    assert enclose(b23.rational(Fraction(3, 4)), 5).lo == Fraction(3, 4)
    e = enclose(b23.sqrt(2) + b23.sqrt(3), 20)
    assert e.lo <= Fraction(314626437, 10**8) <= e.hi


def test_floor_examples(b23):
    assert floor_exact(b23.rational(Fraction(7, 2))) == 3
    assert floor_exact(9 * b23.sqrt(2)) == 12
    assert floor_exact(-b23.sqrt(2)) == -2


def test_inverse_and_division(b23):
    a = 1 + b23.sqrt(2) + b23.sqrt(6)
    assert a * a.inverse() == b23.one()
    assert (b23.sqrt(3) / b23.sqrt(2)) * b23.sqrt(2) == b23.sqrt(3)


def test_round_trip_text():
    basis = RadicalBasis((2, 3))
    a = parse_symreal("3/2*sqrt(6) - 1/4", basis)
    assert format_symreal(a) == "3/2*sqrt(6) - 1/4"
    assert parse_symreal(format_symreal(a), basis) == a


@settings(max_examples=300, deadline=None)
@given(elements, elements, elements)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c


@settings(max_examples=200, deadline=None)
@given(elements, st.integers(1, 80))
def test_enclosure_soundness(a, p):
    e = enclose(a, p)
    assert e.width <= Fraction(1, 2**p)
    v = dec_value(a)
    lo = Decimal(e.lo.numerator) / Decimal(e.lo.denominator)
    hi = Decimal(e.hi.numerator) / Decimal(e.hi.denominator)
    assert lo - Decimal(10) ** -40 <= v <= hi + Decimal(10) ** -40


@settings(max_examples=200, deadline=None)
@given(elements)
def test_floor_brackets_value(a):
    f = floor_exact(a)
    e = enclose(a, 200)
    assert f <= e.lo and e.hi < f + 1 or (a.is_rational() and f <= e.lo < f + 1)


@settings(max_examples=100, deadline=None)
@given(elements)
def test_irrational_never_integer(a):
    if not a.is_rational():
        assert floor_exact(a) != math.ceil(float(a)) or float(a) != int(float(a))


def test_frac_of_multiples_matches_exact():
    alpha = parse_symreal("sqrt(2) + 1/3", RadicalBasis((2,)))
    ks = [1, 7, 10**6, 10**14 + 3, -5]
    got = frac_of_multiples(alpha, ks)
    for k, g in zip(ks, got):
        x = alpha * k
        exact = x - floor_exact(x)
        assert abs(g - float(enclose(exact, 80).lo)) < 1e-15
    assert np.all((got >= 0) & (got < 1))
