"""Univariate polynomials over a :class:`~perdecomp.scalars.Field`.

Besides plain arithmetic this module carries the number theory the
decompositions need: cyclotomic polynomials, Moebius and Euler functions,
multiplicative orders of ``x`` modulo a polynomial, factorization over GF(p)
(distinct-degree plus equal-degree splitting) and extraction of the
root-of-unity part of a polynomial in characteristic zero.
"""

import random
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from math import isqrt, lcm

from .errors import DivisionByZero, FieldMismatch, NotMonic
from .scalars import PRIME, REAL_QUADRATIC, RATIONALS, Field


class Poly:
    """Dense polynomial; ``coeffs[i]`` is the coefficient of ``x**i``."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs=()):
        cs = [field(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.field = field
        self.coeffs = tuple(cs)

    @classmethod
    def _raw(cls, field, cs):
        # cs already consists of field elements
        cs = list(cs)
        while cs and not cs[-1]:
            cs.pop()
        p = cls.__new__(cls)
        p.field = field
        p.coeffs = tuple(cs)
        return p

    @classmethod
    def x(cls, field, power=1):
        return cls._raw(field, [field.zero] * power + [field.one])

    @classmethod
    def constant(cls, field, c):
        return cls._raw(field, [field(c)])

    @classmethod
    def one(cls, field):
        return cls.constant(field, 1)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def lc(self):
        if not self.coeffs:
            return self.field.zero
        return self.coeffs[-1]

    def coeff(self, i):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.field.zero

    def is_zero(self):
        return not self.coeffs

    def is_one(self):
        return len(self.coeffs) == 1 and self.coeffs[0] == 1

    def is_monic(self):
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def monic(self):
        if not self.coeffs:
            raise DivisionByZero("zero polynomial has no monic form")
        inv = self.field.one / self.coeffs[-1]
        return Poly._raw(self.field, [c * inv for c in self.coeffs])

    def _check(self, other):
        if isinstance(other, Poly):
            if other.field != self.field:
                raise FieldMismatch(f"{self.field} vs {other.field}")
            return other
        return Poly.constant(self.field, other)

    def __add__(self, other):
        o = self._check(other)
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        cs = list(a)
        for i, c in enumerate(b):
            cs[i] = cs[i] + c
        return Poly._raw(self.field, cs)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.field, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = self.field(other)
            return Poly._raw(self.field, [c * a for a in self.coeffs])
        o = self._check(other)
        if not self.coeffs or not o.coeffs:
            return Poly._raw(self.field, [])
        zero = self.field.zero
        cs = [zero] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(o.coeffs):
                cs[i + j] = cs[i + j] + a * b
        return Poly._raw(self.field, cs)

    __rmul__ = __mul__

    def __pow__(self, e):
        result = Poly.one(self.field)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __divmod__(self, other):
        g = self._check(other)
        if g.is_zero():
            raise DivisionByZero("polynomial division by zero")
        r = list(self.coeffs)
        dg = g.degree
        if len(r) - 1 < dg:
            return Poly._raw(self.field, []), self
        inv = self.field.one / g.coeffs[-1]
        q = [self.field.zero] * (len(r) - dg)
        for i in range(len(r) - 1, dg - 1, -1):
            c = r[i]
            if not c:
                continue
            c = c * inv
            q[i - dg] = c
            for j, gc in enumerate(g.coeffs):
                r[i - dg + j] = r[i - dg + j] - c * gc
        return Poly._raw(self.field, q), Poly._raw(self.field, r[:dg])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other):
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ValueError("division is not exact")
        return q

    def divides(self, other):
        return (other % self).is_zero()

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.field == other.field and self.coeffs == other.coeffs
        if isinstance(other, int):
            return self == Poly.constant(self.field, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def __call__(self, value):
        acc = self.field.zero
        for c in reversed(self.coeffs):
            acc = acc * value + c
        return acc

    def derivative(self):
        return Poly._raw(self.field, [c * i for i, c in enumerate(self.coeffs)][1:])

    def gcd(self, other):
        a, b = self, self._check(other)
        while not b.is_zero():
            a, b = b, a % b
        if a.is_zero():
            return a
        return a.monic()

    def lcm(self, other):
        o = self._check(other)
        if self.is_zero() or o.is_zero():
            return Poly._raw(self.field, [])
        return (self * o).exact_div(self.gcd(o)).monic()

    def powmod(self, e, modulus):
        result = Poly.one(self.field) % modulus
        base = self % modulus
        while e:
            if e & 1:
                result = (result * base) % modulus
            base = (base * base) % modulus
            e >>= 1
        return result

    def sort_key(self):
        return (self.degree, tuple(self.field.sort_key(c) for c in self.coeffs))

    def to_json(self):
        return [self.field.encode(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, field, obj):
        return cls._raw(field, [field.parse(c) for c in obj])

    def __repr__(self):
        return f"Poly({self.field.to_string()}, {self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            cs = str(c)
            if self.field.kind == REAL_QUADRATIC and c.a and c.b:
                cs = f"({cs})"
            if mono and c == 1:
                term = mono
            elif mono and c == -1 and self.field.kind != PRIME:
                term = "-" + mono
            elif mono:
                term = f"{cs}*{mono}"
            else:
                term = cs
            terms.append(term)
        out = terms[0]
        for t in terms[1:]:
            out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
        return out


def trace_of(f):
    """Sum of the roots of monic ``f``: the negated second-highest coefficient."""
    if not f.is_monic():
        raise NotMonic(f"{f} is not monic")
    if f.degree < 1:
        raise NotMonic("trace needs degree >= 1")
    return -f.coeff(f.degree - 1)


# -- elementary number theory -------------------------------------------------

def factorint(n):
    """Prime factorization of ``n >= 1`` by trial division, as a Counter."""
    out = Counter()
    f = 2
    while f * f <= n:
        while n % f == 0:
            out[f] += 1
            n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out[n] += 1
    return out


def moebius(n):
    fac = factorint(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def euler_phi(n):
    result = n
    for p in factorint(n):
        result = result // p * (p - 1)
    return result


def divisors(n):
    small = [d for d in range(1, isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


@lru_cache(maxsize=None)
def _cyclotomic_int(d):
    # integer coefficients of Phi_d, constant term first
    q = Field.rationals()
    num = Poly.x(q, d) - 1
    for e in divisors(d):
        if e < d:
            num = num.exact_div(Poly(q, _cyclotomic_int(e)))
    return tuple(int(c) for c in num.coeffs)


@lru_cache(maxsize=None)
def cyclotomic(d, field=None):
    """Phi_d, computed over Q by recursive exact division and mapped into ``field``."""
    if d < 1:
        raise ValueError("cyclotomic index must be >= 1")
    return Poly(field or Field.rationals(), _cyclotomic_int(d))


@lru_cache(maxsize=None)
def cyclotomic_indices(max_degree):
    """All e with phi(e) <= max_degree, ascending (phi(e) >= sqrt(e/2) bounds e)."""
    return tuple(e for e in range(1, 2 * max_degree * max_degree + 3)
                 if euler_phi(e) <= max_degree)


# -- finite fields ------------------------------------------------------------

def _pth_root(f):
    p = f.field.p
    return Poly._raw(f.field, [f.coeffs[i] for i in range(0, len(f.coeffs), p)])


def squarefree_decomposition(f):
    """Return [(g, m)] with f = prod g^m, each g squarefree (GF(p), f monic)."""
    out = []
    fp = f.derivative()
    if fp.is_zero():
        for g, m in squarefree_decomposition(_pth_root(f)):
            out.append((g, m * f.field.p))
        return out
    c = f.gcd(fp)
    w = f.exact_div(c)
    i = 1
    while not w.is_one():
        y = w.gcd(c)
        fac = w.exact_div(y)
        if fac.degree > 0:
            out.append((fac.monic(), i))
        w = y
        c = c.exact_div(y)
        i += 1
    if c.degree > 0:
        for g, m in squarefree_decomposition(_pth_root(c).monic()):
            out.append((g, m * f.field.p))
    return out


def distinct_degree(f):
    """Split squarefree monic f into [(g_d, d)] where g_d collects degree-d factors."""
    out = []
    xpoly = Poly.x(f.field)
    h = xpoly % f
    d = 0
    rest = f
    while rest.degree >= 2 * (d + 1):
        d += 1
        h = h.powmod(f.field.p, rest)
        g = rest.gcd(h - xpoly)
        if g.degree > 0:
            out.append((g, d))
            rest = rest.exact_div(g)
            h = h % rest
    if rest.degree > 0:
        out.append((rest.monic(), rest.degree))
    return out


def equal_degree(f, d, rng):
    """Split monic squarefree f, all of whose factors have degree d."""
    if f.degree == d:
        return [f]
    field = f.field
    p = field.p
    while True:
        a = Poly._raw(field, [field.random_element(rng) for _ in range(f.degree)])
        if a.degree < 1:
            continue
        if p == 2:
            t = a % f
            acc = t
            for _ in range(d - 1):
                t = (t * t) % f
                acc = acc + t
            b = acc
        else:
            b = a.powmod((p ** d - 1) // 2, f) - 1
        g = f.gcd(b)
        if 0 < g.degree < f.degree:
            return (equal_degree(g, d, rng)
                    + equal_degree(f.exact_div(g).monic(), d, rng))


def factor_fp(f, seed=0):
    """Factor monic f over GF(p) into [(irreducible, multiplicity)], sorted."""
    if f.field.kind != PRIME:
        raise FieldMismatch("factor_fp needs a prime field")
    if not f.is_monic():
        raise NotMonic(f"{f} is not monic")
    rng = random.Random(seed)
    counts = Counter()
    for g, m in squarefree_decomposition(f):
        for block, d in distinct_degree(g):
            for irr in equal_degree(block, d, rng):
                counts[irr] += m
    return sorted(counts.items(), key=lambda gm: gm[0].sort_key())


def order_of_x_mod_irreducible(g):
    """Multiplicative order of x in GF(p)[x]/(g), g irreducible with g(0) != 0."""
    p = g.field.p
    group = p ** g.degree - 1
    xpoly = Poly.x(g.field)
    order = group
    for q in factorint(group):
        while order % q == 0 and xpoly.powmod(order // q, g).is_one():
            order //= q
    return order


def _p_exponent_ceiling(e, p):
    t, pt = 0, 1
    while pt < e:
        pt *= p
        t += 1
    return pt


def order_of_irreducible_power(g, e):
    """Order of x modulo g**e over GF(p)."""
    return order_of_x_mod_irreducible(g) * _p_exponent_ceiling(e, g.field.p)


# -- characteristic zero: roots of unity --------------------------------------

def unity_split(f):
    """Write monic f = x^a * prod Phi_d^m * rest with rational cyclotomics Phi_d."""
    field = f.field
    a = 0
    while a < len(f.coeffs) and not f.coeffs[a]:
        a += 1
    rest = Poly._raw(field, f.coeffs[a:])
    cyclo = Counter()
    if rest.degree > 0:
        for e in cyclotomic_indices(rest.degree):
            phi = cyclotomic(e, field)
            if phi.degree > rest.degree:
                continue
            while True:
                q, r = divmod(rest, phi)
                if not r.is_zero():
                    break
                rest = q
                cyclo[e] += 1
            if rest.degree == 0:
                break
    return a, cyclo, rest


@lru_cache(maxsize=None)
def cyclotomic_factors(e, field):
    """Monic irreducible factors of Phi_e over ``field`` (characteristic zero)."""
    phi = cyclotomic(e, field)
    if field.kind == RATIONALS or phi.degree == 1:
        return (phi,)
    # Phi_e splits over Q(sqrt d) iff sqrt d lies in Q(zeta_e), i.e. iff the
    # discriminant of Q(sqrt d) divides e
    disc = field.d if field.d % 4 == 1 else 4 * field.d
    if e % disc:
        return (phi,)
    return tuple(sorted(_split_over_quadratic(e, field.d, field),
                        key=lambda h: h.sort_key()))


def _split_over_quadratic(e, d, field):
    import sympy

    x = sympy.Symbol("x")
    root = sympy.sqrt(d)
    expr = sum(c * x ** i for i, c in enumerate(_cyclotomic_int(e)))
    _, facs = sympy.factor_list(expr, x, extension=root)
    out = []
    for fac, mult in facs:
        cs = []
        for c in reversed(sympy.Poly(fac, x).all_coeffs()):
            c = sympy.expand(c)
            b = c.coeff(root)
            a = sympy.expand(c - b * root)
            cs.append(field(_to_fraction(a)) + field.sqrt_d() * _to_fraction(b))
        h = Poly._raw(field, cs).monic()
        out.extend([h] * int(mult))
    prod = Poly.one(field)
    for h in out:
        prod = prod * h
    if prod != cyclotomic(e, field):
        raise ArithmeticError(f"factorization of Phi_{e} over {field} failed")
    return out


def _to_fraction(r):
    import sympy

    r = sympy.Rational(r)
    return Fraction(int(r.p), int(r.q))


def unit_root_factors(f, order_bound=None):
    """Split monic f (characteristic 0) into x^a * prod h^m * rest.

    The h are monic irreducibles over the field of f dividing some x^r - 1;
    returns ``(a, [(h, m, r)], rest)`` where r is the exact order of each root
    of h.  ``order_bound`` caps the cyclotomic indices tried.
    """
    field = f.field
    a = 0
    while a < len(f.coeffs) and not f.coeffs[a]:
        a += 1
    rest = Poly._raw(field, f.coeffs[a:])
    found = []
    if rest.degree > 0:
        # an irreducible h over Q(sqrt d) can have degree phi(e)/2
        span = rest.degree if field.kind == RATIONALS else 2 * rest.degree
        for e in cyclotomic_indices(span):
            if order_bound is not None and e > order_bound:
                break
            for h in cyclotomic_factors(e, field):
                m = 0
                while h.degree <= rest.degree:
                    q, r = divmod(rest, h)
                    if not r.is_zero():
                        break
                    rest = q
                    m += 1
                if m:
                    found.append((h, m, e))
            if rest.degree == 0:
                break
    return a, found, rest


def default_order_bound(f):
    """Largest root order possible for an irreducible factor of f."""
    deg = f.degree if f.field.kind == RATIONALS else 2 * f.degree
    return 2 * deg * deg


def torsion_order_poly(f, bound=None):
    """Least r with f | x^r - 1, or None if there is none.

    Over GF(p) this is computed from the factorization of f.  In
    characteristic 0, f must be a squarefree product of irreducible factors of
    cyclotomic polynomials; each root order is found by searching indices up
    to ``bound`` (default: the complete bound 2*deg^2 over Q, 8*deg^2 over
    Q(sqrt d)) and the result is their lcm.
    """
    if not f.is_monic():
        raise NotMonic(f"{f} is not monic")
    if f.degree < 1:
        raise NotMonic("order needs degree >= 1")
    if not f.coeff(0):
        return None
    if f.field.kind == PRIME:
        r = 1
        for g, e in factor_fp(f):
            r = lcm(r, order_of_irreducible_power(g, e))
        return r
    bound = default_order_bound(f) if bound is None else bound
    a, found, rest = unit_root_factors(f, order_bound=bound)
    if a or rest.degree > 0 or any(m > 1 for _, m, _ in found):
        return None
    r = 1
    for _, _, e in found:
        r = lcm(r, e)
    return r


def x_power_is_one(f, r):
    """Independent check: f | x^r - 1."""
    return Poly.x(f.field).powmod(r, f).is_one()


def is_squarefree(f):
    return f.gcd(f.derivative()).degree == 0

