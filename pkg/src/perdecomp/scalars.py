"""Exact scalars for the three supported field families.

Elements of Q are plain :class:`fractions.Fraction` values.  Prime-field
residues are :class:`GF` and elements of Q(sqrt d) are :class:`QuadSurd`.
All three support the usual arithmetic operators, so matrix and polynomial
code never needs to know which field it is running over; the owning
:class:`Field` supplies zero, one, parsing and JSON encoding.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import DivisionByZero, FieldMismatch

RATIONALS = "Q"
_ZERO = Fraction(0)
PRIME = "Fp"
REAL_QUADRATIC = "QSqrt"


def is_prime(p):
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def is_squarefree(d):
    f = 2
    while f * f <= d:
        if d % (f * f) == 0:
            return False
        f += 1
    return True


class GF:
    """Residue modulo a prime ``p``, always stored in ``[0, p)``."""

    __slots__ = ("v", "p")

    def __init__(self, v, p):
        self.v = v % p
        self.p = p

    def _coerce(self, other):
        if isinstance(other, GF):
            if other.p != self.p:
                raise FieldMismatch(f"GF({self.p}) vs GF({other.p})")
            return other.v
        if isinstance(other, int):
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GF(self.v + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GF(self.v - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GF(o - self.v, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GF(self.v * o, self.p)

    __rmul__ = __mul__

    def inverse(self):
        if self.v == 0:
            raise DivisionByZero(f"0 has no inverse in GF({self.p})")
        return GF(pow(self.v, -1, self.p), self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * GF(o, self.p).inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GF(o, self.p) * self.inverse()

    def __neg__(self):
        return GF(-self.v, self.p)

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        return GF(pow(self.v, e, self.p), self.p)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self.v - o) % self.p == 0

    def __hash__(self):
        return hash(self.v)

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return f"GF({self.v}, {self.p})"

    def __str__(self):
        return str(self.v)


class QuadSurd:
    """``a + b*sqrt(d)`` with rational ``a``, ``b`` and squarefree ``d >= 2``."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = d

    @classmethod
    def _mk(cls, a, b, d):
        # a and b are already Fractions
        x = object.__new__(cls)
        x.a = a
        x.b = b
        x.d = d
        return x

    def _coerce(self, other):
        if isinstance(other, QuadSurd):
            if other.d != self.d:
                raise FieldMismatch(f"Q(sqrt {self.d}) vs Q(sqrt {other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadSurd._mk(Fraction(other), _ZERO, self.d)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadSurd._mk(self.a + o.a, self.b + o.b if (self.b or o.b) else _ZERO, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadSurd._mk(self.a - o.a, self.b - o.b if (self.b or o.b) else _ZERO, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b, c, e = self.a, self.b, o.a, o.b
        if not b:
            if not e:
                return QuadSurd._mk(a * c, _ZERO, self.d)
            return QuadSurd._mk(a * c, a * e, self.d)
        if not e:
            return QuadSurd._mk(a * c, b * c, self.d)
        return QuadSurd._mk(a * c + self.d * b * e, a * e + b * c, self.d)

    __rmul__ = __mul__

    def conjugate(self):
        return QuadSurd._mk(self.a, -self.b, self.d)

    def norm(self):
        return self.a * self.a - self.d * self.b * self.b

    def inverse(self):
        nrm = self.norm()
        if nrm == 0:
            raise DivisionByZero("0 has no inverse")
        return QuadSurd._mk(self.a / nrm, -self.b / nrm, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __neg__(self):
        return QuadSurd._mk(-self.a, -self.b, self.d)

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = QuadSurd(1, 0, self.d)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __repr__(self):
        return f"QuadSurd({self.a}, {self.b}, {self.d})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        root = f"sqrt({self.d})"
        if self.b == 1:
            tail = root
        elif self.b == -1:
            tail = "-" + root
        else:
            tail = f"{self.b}*{root}"
        if self.a == 0:
            return tail
        if tail.startswith("-"):
            return f"{self.a} - {tail[1:]}"
        return f"{self.a} + {tail}"


@dataclass(frozen=True)
class Field:
    """Descriptor of one of: Q, GF(p), Q(sqrt d)."""

    kind: str
    p: int = 0
    d: int = 0

    def __post_init__(self):
        if self.kind == PRIME:
            if not is_prime(self.p):
                raise ValueError(f"{self.p} is not prime")
        elif self.kind == REAL_QUADRATIC:
            if self.d < 2 or not is_squarefree(self.d):
                raise ValueError(f"d = {self.d} must be squarefree and >= 2")
        elif self.kind != RATIONALS:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @classmethod
    def rationals(cls):
        return cls(RATIONALS)

    @classmethod
    def prime(cls, p):
        return cls(PRIME, p=p)

    @classmethod
    def real_quadratic(cls, d):
        return cls(REAL_QUADRATIC, d=d)

    @classmethod
    def from_string(cls, text):
        """Parse the CLI form ``q``, ``fp:<p>`` or ``qsqrt:<d>``."""
        t = text.strip().lower()
        if t in ("q", "qq", "rationals"):
            return cls.rationals()
        if t.startswith("fp:"):
            return cls.prime(int(t[3:]))
        if t.startswith("qsqrt:"):
            return cls.real_quadratic(int(t[6:]))
        raise ValueError(f"cannot parse field {text!r}")

    def to_string(self):
        if self.kind == PRIME:
            return f"fp:{self.p}"
        if self.kind == REAL_QUADRATIC:
            return f"qsqrt:{self.d}"
        return "q"

    def __str__(self):
        if self.kind == PRIME:
            return f"GF({self.p})"
        if self.kind == REAL_QUADRATIC:
            return f"Q(sqrt({self.d}))"
        return "Q"

    @property
    def characteristic(self):
        return self.p if self.kind == PRIME else 0

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def __call__(self, value):
        """Coerce an int, Fraction or element of this field."""
        if self.kind == RATIONALS:
            if isinstance(value, (GF, QuadSurd)):
                raise FieldMismatch(f"{value!r} is not rational")
            return Fraction(value)
        if self.kind == PRIME:
            if isinstance(value, GF):
                if value.p != self.p:
                    raise FieldMismatch(f"GF({value.p}) element in GF({self.p})")
                return value
            if isinstance(value, Fraction):
                if value.denominator % self.p == 0:
                    raise DivisionByZero(f"{value} has no image in GF({self.p})")
                return GF(value.numerator, self.p) / value.denominator
            if isinstance(value, int):
                return GF(value, self.p)
            raise FieldMismatch(f"{value!r} is not in GF({self.p})")
        if isinstance(value, QuadSurd):
            if value.d != self.d:
                raise FieldMismatch(f"{value!r} is not in {self}")
            return value
        if isinstance(value, GF):
            raise FieldMismatch(f"{value!r} is not in {self}")
        return QuadSurd(value, 0, self.d)

    def sqrt_d(self):
        if self.kind != REAL_QUADRATIC:
            raise ValueError("field has no distinguished square root")
        return QuadSurd(0, 1, self.d)

    def contains(self, x):
        if self.kind == RATIONALS:
            return isinstance(x, (int, Fraction))
        if self.kind == PRIME:
            return isinstance(x, GF) and x.p == self.p
        return isinstance(x, QuadSurd) and x.d == self.d

    # JSON encodings: Q -> "a/b", GF(p) -> int, Q(sqrt d) -> ["a/b", "c/e"].

    def encode(self, x):
        if self.kind == PRIME:
            return x.v
        if self.kind == RATIONALS:
            return str(Fraction(x))
        return [str(x.a), str(x.b)]

    def parse(self, obj):
        if self.kind == REAL_QUADRATIC:
            if isinstance(obj, (list, tuple)):
                if len(obj) != 2:
                    raise ValueError(f"expected [a, b], got {obj!r}")
                return QuadSurd(_parse_rational(obj[0]), _parse_rational(obj[1]), self.d)
            return QuadSurd(_parse_rational(obj), 0, self.d)
        if isinstance(obj, (list, tuple)):
            raise ValueError(f"pair encoding {obj!r} is only valid over Q(sqrt d)")
        return self(_parse_rational(obj))

    def sort_key(self, x):
        if self.kind == PRIME:
            return (x.v,)
        if self.kind == RATIONALS:
            return (Fraction(x),)
        return (x.a, x.b)

    def random_element(self, rng, height=3):
        if self.kind == PRIME:
            return GF(rng.randrange(self.p), self.p)
        a = Fraction(rng.randint(-height, height), rng.randint(1, height))
        if self.kind == RATIONALS:
            return a
        b = Fraction(rng.randint(-height, height), rng.randint(1, height))
        return QuadSurd(a, b, self.d)

    def to_json(self):
        if self.kind == PRIME:
            return {"kind": PRIME, "p": self.p}
        if self.kind == REAL_QUADRATIC:
            return {"kind": REAL_QUADRATIC, "d": self.d}
        return {"kind": RATIONALS}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            return cls.from_string(obj)
        kind = obj.get("kind")
        if kind == PRIME:
            return cls.prime(int(obj["p"]))
        if kind == REAL_QUADRATIC:
            return cls.real_quadratic(int(obj["d"]))
        if kind == RATIONALS:
            return cls.rationals()
        raise ValueError(f"unknown field descriptor {obj!r}")


def _parse_rational(obj):
    if isinstance(obj, bool):
        raise ValueError("booleans are not scalars")
    if isinstance(obj, int):
        return Fraction(obj)
    if isinstance(obj, str):
        return Fraction(obj.strip())
    raise ValueError(f"cannot parse scalar {obj!r}")

