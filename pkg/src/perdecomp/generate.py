"""Seeded periodic test matrices with known elementary divisors."""

import random
from dataclasses import dataclass
from functools import lru_cache

from .matcore import ElementaryDivisor, Matrix, block_matrix
from .polyring import (Poly, cyclotomic_factors, cyclotomic_indices, factor_fp,
                       order_of_irreducible_power)
from .scalars import PRIME


@dataclass
class GeneratorConfig:
    size: int = 6
    seed: int = 0
    nil_cap: int = 6             # largest nilpotent block
    index_cap: int = 30          # largest cyclotomic index / x^r - 1 exponent
    power_cap: int = 3           # largest power of an irreducible over GF(p)
    rank_min: bool = False       # require 2 * rank >= n
    max_size: int = 12

    def validate(self):
        if not 1 <= self.size <= self.max_size:
            raise ValueError(f"size must be in 1..{self.max_size}")
        if self.nil_cap < 2 or self.index_cap < 1 or self.power_cap < 1:
            raise ValueError("caps must be positive (nilpotent cap >= 2)")


@dataclass
class GeneratedInstance:
    A: Matrix
    divisors: list
    transform: Matrix            # A = P B P^-1 with B the block matrix of divisors
    seed: int

    @property
    def field(self):
        return self.A.field

    def to_json(self):
        return {"field": self.field.to_json(),
                "seed": self.seed,
                "matrix": self.A.to_json()["rows"],
                "divisors": [d.to_json() for d in self.divisors],
                "orders": [d.order for d in self.divisors],
                "transform": self.transform.to_json()["rows"]}


@lru_cache(maxsize=None)
def torsion_factors(field, index_cap, power_cap, max_degree):
    """Admissible (base, exp, order) torsion divisors of degree <= max_degree."""
    out = []
    if field.kind == PRIME:
        seen = set()
        x = Poly.x(field)
        for r in range(1, index_cap + 1):
            if r % field.p == 0:
                continue
            for g, _ in factor_fp(x ** r - Poly.one(field)):
                if g in seen:
                    continue
                seen.add(g)
                for m in range(1, power_cap + 1):
                    if g.degree * m <= max_degree:
                        out.append((g, m, order_of_irreducible_power(g, m)))
    else:
        span = max_degree if field.kind == "Q" else 2 * max_degree
        for e in cyclotomic_indices(span):
            if e > index_cap:
                break
            for h in cyclotomic_factors(e, field):
                if h.degree <= max_degree:
                    out.append((h, 1, e))
    out.sort(key=lambda t: (t[0].degree * t[1], t[2], t[0].sort_key()))
    return tuple(out)


def sample_divisors(field, size, rng, cfg):
    """Random elementary divisors of total degree ``size`` in canonical order."""
    x = Poly.x(field)
    pool = torsion_factors(field, cfg.index_cap, cfg.power_cap, size)
    while True:
        left = size
        divs = []
        while left:
            kinds = ["zero"]
            if left >= 2:
                kinds.append("nil")
            fits = [t for t in pool if t[0].degree * t[1] <= left]
            if fits:
                kinds += ["torsion", "torsion"]
            kind = rng.choice(kinds)
            if kind == "zero":
                divs.append(ElementaryDivisor(x, 1))
                left -= 1
            elif kind == "nil":
                k = rng.randint(2, min(left, cfg.nil_cap))
                divs.append(ElementaryDivisor(x, k))
                left -= k
            else:
                g, m, order = rng.choice(fits)
                divs.append(ElementaryDivisor(g, m, order))
                left -= g.degree * m
        divs.sort(key=lambda d: d.sort_key())
        if cfg.rank_min:
            rank = size - sum(1 for d in divs if d.kind != "torsion")
            if 2 * rank < size:
                continue
        return divs


def unimodular(field, n, rng, ops=None):
    """(P, P^-1) from a seeded product of elementary integer operations."""
    ops = 2 * n if ops is None else ops
    P = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    Pinv = [row[:] for row in P]
    for _ in range(ops if n > 1 else 0):
        i, j = rng.sample(range(n), 2)
        c = rng.choice((-2, -1, 1, 2))
        # P <- P (I + c E_ij): column j += c * column i
        for row in P:
            row[j] += c * row[i]
        # P^-1 <- (I - c E_ij) P^-1: row i -= c * row j
        Pinv[i] = [a - c * b for a, b in zip(Pinv[i], Pinv[j])]
    return Matrix(field, P), Matrix(field, Pinv)


def generate(field, cfg):
    cfg.validate()
    rng = random.Random(cfg.seed)
    divs = sample_divisors(field, cfg.size, rng, cfg)
    B = block_matrix(field, divs)
    P, Pinv = unimodular(field, cfg.size, rng)
    if P * Pinv != Matrix.identity(field, cfg.size):
        raise AssertionError("unimodular inverse bookkeeping failed")
    return GeneratedInstance(P * B * Pinv, divs, P, cfg.seed)
