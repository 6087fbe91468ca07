import random

import pytest
import sympy
from hypothesis import given, strategies as st

from perdecomp.polyring import (Poly, cyclotomic, cyclotomic_factors, cyclotomic_indices,
                                divisors, euler_phi, factor_fp, moebius,
                                order_of_irreducible_power, order_of_x_mod_irreducible,
                                torsion_order_poly, trace_of, unit_root_factors, unity_split,
                                x_power_is_one)
from perdecomp.scalars import Field

Q = Field.rationals()
X = sympy.Symbol("x")


def P(F, *cs):
    return Poly(F, cs)


def to_sympy(f):
    return sum(int(c) * X ** i for i, c in enumerate(f.coeffs))


def test_small_cyclotomics():
    assert cyclotomic(12) == P(Q, 1, 0, -1, 0, 1)
    assert cyclotomic(6) == P(Q, 1, -1, 1)
    assert cyclotomic(1) == P(Q, -1, 1)


@pytest.mark.parametrize("d", [1, 2, 7, 15, 30, 36, 105])
def test_cyclotomic_against_sympy(d):
    # oracle: sympy's own implementation
    assert to_sympy(cyclotomic(d)) == sympy.expand(sympy.cyclotomic_poly(d, X))


def test_number_theory_against_sympy():
    for n in range(1, 120):
        assert euler_phi(n) == sympy.totient(n)
        assert moebius(n) == sympy.mobius(n)
        assert divisors(n) == sympy.divisors(n)


def test_cyclotomic_indices_complete():
    idx = cyclotomic_indices(4)
    assert [e for e in idx if euler_phi(e) == 4] == [5, 8, 10, 12]
    assert all(euler_phi(e) > 4 for e in range(max(idx) + 1, 400))


def test_division_and_gcd():
    f = P(Q, -1, 0, 0, 1)       # x^3 - 1
    g = P(Q, -1, 0, 1)          # x^2 - 1
    assert f.gcd(g) == P(Q, -1, 1)
    q, r = divmod(f, g)
    assert q * g + r == f and r.degree < g.degree
    assert f.lcm(g) == f * g.exact_div(f.gcd(g))


def test_trace_of():
    assert trace_of(P(Q, 1, 1, 1)) == -1
    F = Field.real_quadratic(2)
    assert trace_of(P(F, 1, F.sqrt_d(), 1)) == -F.sqrt_d()


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_factor_fp_against_sympy(p):
    F = Field.prime(p)
    rng = random.Random(p)
    for _ in range(15):
        deg = rng.randint(1, 8)
        f = Poly(F, [rng.randrange(p) for _ in range(deg)] + [1])
        ours = sorted((tuple(c.v for c in g.coeffs), m) for g, m in factor_fp(f))
        _, facs = sympy.factor_list(sum(c.v * X ** i for i, c in enumerate(f.coeffs)),
                                    X, modulus=p)
        theirs = []
        for g, m in facs:
            cs = [int(c) % p for c in reversed(sympy.Poly(g, X, modulus=p).all_coeffs())]
            inv = pow(cs[-1], -1, p)
            theirs.append((tuple(c * inv % p for c in cs), m))
        assert ours == sorted(theirs)


def _brute_order(f, cap=500):
    F = f.field
    x = Poly.x(F)
    acc = x % f
    for r in range(1, cap):
        if acc.is_one():
            return r
        acc = (acc * x) % f
    return None


def test_orders_over_fp():
    F2 = Field.prime(2)
    assert order_of_x_mod_irreducible(P(F2, 1, 1, 0, 0, 1)) == 15
    assert order_of_x_mod_irreducible(P(F2, 1, 1, 1)) == 3
    assert order_of_irreducible_power(P(F2, 1, 1), 2) == 2
    for f in [P(F2, 1, 1) ** 3, P(F2, 1, 1, 1) ** 2, P(Field.prime(3), 1, 1) ** 4]:
        assert torsion_order_poly(f) == _brute_order(f)


def test_order_in_characteristic_zero():
    assert torsion_order_poly(cyclotomic(5)) == 5
    assert torsion_order_poly(cyclotomic(3) * cyclotomic(4)) == 12
    assert torsion_order_poly(P(Q, 1, 1, 1) * P(Q, 1, 1, 1)) is None
    assert torsion_order_poly(P(Q, 2, 0, 1)) is None


def test_split_over_quadratic_field():
    F = Field.real_quadratic(2)
    hs = cyclotomic_factors(8, F)
    assert len(hs) == 2 and all(h.degree == 2 for h in hs)
    assert hs[0] * hs[1] == cyclotomic(8, F)
    h = P(F, 1, F.sqrt_d(), 1)
    assert torsion_order_poly(h) == 8
    assert x_power_is_one(h, 8) and not x_power_is_one(h, 4)
    a, found, rest = unit_root_factors(h * P(F, -1, 1))
    assert a == 0 and rest.is_one() and sorted(e for _, _, e in found) == [1, 8]


def test_unity_split():
    a, cyc, rest = unity_split(P(Q, 0, 0, -1, 1))   # x^3 - x^2
    assert a == 2 and dict(cyc) == {1: 1} and rest.is_one()


@given(st.integers(1, 60))
def test_product_of_cyclotomics(n):
    prod = Poly.one(Q)
    for d in divisors(n):
        prod = prod * cyclotomic(d)
    assert prod == Poly.x(Q, n) - Poly.one(Q)


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6),
       st.lists(st.integers(-5, 5), min_size=1, max_size=6))
def test_divmod_identity(a, b):
    f, g = Poly(Q, a), Poly(Q, b)
    if g.is_zero():
        return
    q, r = divmod(f, g)
    assert q * g + r == f
    assert r.is_zero() or r.degree < g.degree
