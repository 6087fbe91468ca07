from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from perdecomp.errors import DivisionByZero, FieldMismatch
from perdecomp.scalars import GF, Field, QuadSurd, is_prime, is_squarefree

from conftest import FIELDS, FIELD_IDS, scalars


def test_prime_and_squarefree_helpers():
    assert [p for p in range(20) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert is_squarefree(30) and not is_squarefree(12)


def test_gf_arithmetic():
    a = GF(3, 5)
    assert a + 4 == 2
    assert a * a == 4
    assert a.inverse() == 2
    assert -a == 2
    assert a ** -1 * a == 1
    with pytest.raises(DivisionByZero):
        GF(0, 7).inverse()
    with pytest.raises(FieldMismatch):
        GF(1, 3) + GF(1, 5)


def test_quadsurd_inverse_via_conjugate():
    x = QuadSurd(1, 1, 2)
    assert x.norm() == -1
    assert x * x.inverse() == 1
    assert x.inverse() == QuadSurd(-1, 1, 2)
    assert str(QuadSurd(0, -1, 2)) == "-sqrt(2)"
    with pytest.raises(FieldMismatch):
        QuadSurd(1, 1, 2) + QuadSurd(1, 1, 3)


def test_field_parsing():
    assert Field.from_string("q") == Field.rationals()
    assert Field.from_string("fp:7") == Field.prime(7)
    assert Field.from_string("qsqrt:2") == Field.real_quadratic(2)
    for bad in ("fp:4", "qsqrt:4", "qsqrt:1", "r"):
        with pytest.raises(ValueError):
            Field.from_string(bad)


def test_field_coercion_rejects_foreign_elements():
    with pytest.raises(FieldMismatch):
        Field.rationals()(GF(1, 3))
    with pytest.raises(DivisionByZero):
        Field.prime(3)(Fraction(1, 3))
    assert Field.prime(5)(Fraction(1, 2)) == 3


@pytest.mark.parametrize("F", FIELDS, ids=FIELD_IDS)
def test_json_round_trip(F):
    assert Field.from_json(F.to_json()) == F
    for v in [0, 1, -3, Fraction(7, 4) if F.kind != "Fp" else 2]:
        x = F(v)
        assert F.parse(F.encode(x)) == x
    if F.kind == "QSqrt":
        y = F.sqrt_d() * Fraction(-2, 3) + 5
        assert F.parse(F.encode(y)) == y


@pytest.mark.parametrize("F", FIELDS, ids=FIELD_IDS)
@given(data=st.data())
def test_field_axioms(F, data):
    a, b, c = (data.draw(scalars(F)) for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a - a == F.zero
    if a:
        assert a * (F.one / a) == F.one
