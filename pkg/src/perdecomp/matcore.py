"""Exact dense matrices and the canonical form of a periodic matrix.

The canonical form is the primary rational canonical form: one companion
block per elementary divisor.  Elementary divisors come from the Smith form
of ``xI - A``; the similarity transform is built independently from the
cyclic decomposition of each primary component and checked by exact
multiplication.
"""

from dataclasses import dataclass
from math import lcm

from .errors import DivisionByZero, FieldMismatch, InternalInconsistency, NotSplitOverField
from .polyring import (
    Poly,
    factor_fp,
    order_of_irreducible_power,
    unit_root_factors,
)
from .scalars import PRIME


class Matrix:
    """Immutable dense matrix over a field (rectangular shapes allowed)."""

    __slots__ = ("field", "rows", "nrows", "ncols")

    def __init__(self, field, rows):
        rows = tuple(tuple(field(v) for v in r) for r in rows)
        self._set(field, rows)

    def _set(self, field, rows):
        self.field = field
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0
        if any(len(r) != self.ncols for r in rows):
            raise ValueError("ragged matrix")

    @classmethod
    def _raw(cls, field, rows):
        m = cls.__new__(cls)
        m._set(field, tuple(tuple(r) for r in rows))
        return m

    @classmethod
    def zeros(cls, field, nrows, ncols=None):
        z = field.zero
        return cls._raw(field, [[z] * (nrows if ncols is None else ncols) for _ in range(nrows)])

    @classmethod
    def identity(cls, field, n):
        z, o = field.zero, field.one
        return cls._raw(field, [[o if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, field, cols):
        return cls._raw(field, list(zip(*cols)))

    @classmethod
    def block_diag(cls, field, blocks):
        n = sum(b.nrows for b in blocks)
        out = [[field.zero] * n for _ in range(n)]
        k = 0
        for b in blocks:
            for i in range(b.nrows):
                out[k + i][k:k + b.ncols] = b.rows[i]
            k += b.nrows
        return cls._raw(field, out)

    @property
    def n(self):
        if self.nrows != self.ncols:
            raise ValueError("matrix is not square")
        return self.nrows

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j):
        return [r[j] for r in self.rows]

    def columns(self):
        return [list(c) for c in zip(*self.rows)] if self.rows else []

    def _same(self, other):
        if not isinstance(other, Matrix):
            return False
        if other.field != self.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")
        return True

    def __add__(self, other):
        self._same(other)
        return Matrix._raw(self.field, [[a + b for a, b in zip(r, s)]
                                        for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        self._same(other)
        return Matrix._raw(self.field, [[a - b for a, b in zip(r, s)]
                                        for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return Matrix._raw(self.field, [[-a for a in r] for r in self.rows])

    def __mul__(self, other):
        if not self._same(other):
            c = self.field(other)
            return Matrix._raw(self.field, [[c * a for a in r] for r in self.rows])
        if self.ncols != other.nrows:
            raise ValueError("dimension mismatch")
        cols = list(zip(*other.rows)) if other.rows else []
        zero = self.field.zero
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                acc = zero
                for a, b in zip(r, c):
                    if a and b:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return Matrix._raw(self.field, out)

    def __rmul__(self, other):
        c = self.field(other)
        return Matrix._raw(self.field, [[c * a for a in r] for r in self.rows])

    def apply(self, vec):
        zero = self.field.zero
        out = []
        for r in self.rows:
            acc = zero
            for a, b in zip(r, vec):
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return out

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = Matrix.identity(self.field, self.n)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and self.rows == other.rows

    def __hash__(self):
        return hash((self.field, self.rows))

    @property
    def T(self):
        return Matrix._raw(self.field, list(zip(*self.rows)) if self.rows else [])

    def trace(self):
        acc = self.field.zero
        for i in range(self.n):
            acc = acc + self.rows[i][i]
        return acc

    def is_zero(self):
        return all(not a for r in self.rows for a in r)

    def is_identity(self):
        return self == Matrix.identity(self.field, self.n)

    def submatrix(self, row_idx, col_idx):
        return Matrix._raw(self.field, [[self.rows[i][j] for j in col_idx] for i in row_idx])

    def rank(self):
        return len(_rref(self.field, self.rows)[1])

    def det(self):
        n = self.n
        a = [list(r) for r in self.rows]
        det = self.field.one
        for c in range(n):
            piv = next((i for i in range(c, n) if a[i][c]), None)
            if piv is None:
                return self.field.zero
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                det = -det
            det = det * a[c][c]
            inv = self.field.one / a[c][c]
            for i in range(c + 1, n):
                if a[i][c]:
                    f = a[i][c] * inv
                    a[i] = [x - f * y for x, y in zip(a[i], a[c])]
        return det

    def inverse(self):
        n = self.n
        ident = Matrix.identity(self.field, n).rows
        aug = [list(r) + list(e) for r, e in zip(self.rows, ident)]
        red, piv = _rref(self.field, aug)
        if piv[:n] != list(range(n)):
            raise DivisionByZero("matrix is singular")
        return Matrix._raw(self.field, [r[n:] for r in red[:n]])

    def kernel(self):
        """Basis (list of vectors) of the right null space."""
        red, piv = _rref(self.field, self.rows)
        free = [j for j in range(self.ncols) if j not in piv]
        basis = []
        for f in free:
            v = [self.field.zero] * self.ncols
            v[f] = self.field.one
            for i, p in enumerate(piv):
                v[p] = -red[i][f]
            basis.append(v)
        return basis

    def solve(self, rhs):
        """One solution x of self * x = rhs (free variables zero), or None."""
        aug = [list(r) + [b] for r, b in zip(self.rows, rhs)]
        red, piv = _rref(self.field, aug)
        if piv and piv[-1] == self.ncols:
            return None
        x = [self.field.zero] * self.ncols
        for i, p in enumerate(piv):
            x[p] = red[i][-1]
        return x

    def conjugate_by(self, P, P_inv=None):
        """Return P * self * P^-1."""
        return P * self * (P.inverse() if P_inv is None else P_inv)

    def poly_eval(self, f):
        n = self.n
        acc = Matrix.zeros(self.field, n)
        ident = Matrix.identity(self.field, n)
        for c in reversed(f.coeffs):
            acc = acc * self + ident * c
        return acc

    def to_json(self):
        return {"field": self.field.to_json(),
                "rows": [[self.field.encode(a) for a in r] for r in self.rows]}

    def __repr__(self):
        body = "; ".join(", ".join(str(a) for a in r) for r in self.rows)
        return f"Matrix({self.field.to_string()}, [{body}])"


def _rref(field, rows):
    """Reduced row echelon form; pivot chosen as first nonzero entry."""
    a = [list(r) for r in rows]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    piv = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = field.one / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv.append(c)
        r += 1
    return a[:r], piv


class Span:
    """Incrementally maintained subspace of F^n (echelon basis)."""

    def __init__(self, field, n):
        self.field = field
        self.n = n
        self.basis = []   # (pivot, normalized vector)

    def reduce(self, v):
        v = list(v)
        for p, b in self.basis:
            if v[p]:
                f = v[p]
                v = [x - f * y for x, y in zip(v, b)]
        return v

    def add(self, v):
        """Add v; return True if the dimension grew."""
        v = self.reduce(v)
        p = next((i for i, x in enumerate(v) if x), None)
        if p is None:
            return False
        inv = self.field.one / v[p]
        v = [x * inv for x in v]
        new_basis = []
        for q, b in self.basis:
            if b[p]:
                f = b[p]
                b = [x - f * y for x, y in zip(b, v)]
            new_basis.append((q, b))
        new_basis.append((p, v))
        self.basis = new_basis
        return True

    def contains(self, v):
        return not any(self.reduce(v))

    @property
    def dim(self):
        return len(self.basis)

    def copy(self):
        s = Span(self.field, self.n)
        s.basis = list(self.basis)
        return s


def companion(f):
    """Companion of monic f: ones on the subdiagonal, -coefficients in the last column."""
    field = f.field
    n = f.degree
    rows = [[field.zero] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = field.one
    for i in range(n):
        rows[i][n - 1] = -f.coeff(i)
    return Matrix._raw(field, rows)


# -- characteristic and minimal polynomials -----------------------------------

def _faddeev_leverrier(A):
    """Return (charpoly coefficients low->high, [H_{n-1}, ..., H_0])."""
    field = A.field
    n = A.n
    ident = Matrix.identity(field, n)
    coeffs = [field.zero] * (n + 1)
    coeffs[n] = field.one
    Hs = [ident]
    M = ident
    for k in range(1, n + 1):
        AM = A * M
        coeffs[n - k] = -AM.trace() / k
        if k < n:
            M = AM + ident * coeffs[n - k]
            Hs.append(M)
    return coeffs, Hs


def _hessenberg_charpoly(A):
    field = A.field
    n = A.n
    H = [list(r) for r in A.rows]
    for j in range(n - 2):
        p = next((i for i in range(j + 1, n) if H[i][j]), None)
        if p is None:
            continue
        if p != j + 1:
            H[p], H[j + 1] = H[j + 1], H[p]
            for r in H:
                r[p], r[j + 1] = r[j + 1], r[p]
        inv = field.one / H[j + 1][j]
        for k in range(j + 2, n):
            if H[k][j]:
                u = H[k][j] * inv
                H[k] = [a - u * b for a, b in zip(H[k], H[j + 1])]
                for r in H:
                    r[j + 1] = r[j + 1] + u * r[k]
    xpoly = Poly.x(field)
    ps = [Poly.one(field)]
    for m in range(1, n + 1):
        pm = (xpoly - H[m - 1][m - 1]) * ps[m - 1]
        t = field.one
        for i in range(1, m):
            t = t * H[m - i][m - i - 1]
            if not t:
                break
            c = H[m - i - 1][m - 1]
            if c:
                pm = pm - ps[m - i - 1] * (t * c)
        ps.append(pm)
    return ps[n]


def charpoly(A):
    """det(xI - A).  Faddeev-LeVerrier in characteristic 0, Hessenberg over GF(p)."""
    if A.field.kind == PRIME:
        return _hessenberg_charpoly(A)
    coeffs, _ = _faddeev_leverrier(A)
    return Poly._raw(A.field, coeffs)


def charpoly_hessenberg(A):
    """Hessenberg route in any field; used as an independent cross-check."""
    return _hessenberg_charpoly(A)


def krylov_annihilator(A, v):
    """Monic least-degree g with g(A) v = 0."""
    field = A.field
    span = Span(field, A.nrows)
    vecs = []
    w = list(v)
    while span.add(w):
        vecs.append(w)
        w = A.apply(w)
    if not vecs:
        return Poly.one(field)
    c = Matrix.from_columns(field, vecs).solve(w)
    return Poly._raw(field, [-x for x in c] + [field.one])


def minpoly(A):
    """lcm over the standard basis of the per-vector Krylov annihilators."""
    field = A.field
    n = A.n
    m = Poly.one(field)
    for i in range(n):
        e = [field.zero] * n
        e[i] = field.one
        if m.degree > 0 and not any(_apply_poly(A, m, e)):
            continue
        m = m.lcm(krylov_annihilator(A, e))
    return m


def _apply_poly(A, f, v):
    acc = [A.field.zero] * len(v)
    for c in reversed(f.coeffs):
        acc = A.apply(acc)
        acc = [a + c * b for a, b in zip(acc, v)]
    return acc


def krylov_matrix(A, v, length=None):
    length = A.n if length is None else length
    cols = [list(v)]
    for _ in range(length - 1):
        cols.append(A.apply(cols[-1]))
    return Matrix.from_columns(A.field, cols)


def is_cyclic_vector(A, v):
    return krylov_matrix(A, v).rank() == A.n


def is_nonderogatory(A):
    return minpoly(A).degree == A.n


# -- resolvent ----------------------------------------------------------------

@dataclass(frozen=True)
class ResolventCoeffs:
    """adj(xI - A) = sum_i x^i H[i]."""

    H: tuple
    charpoly: Poly


def resolvent(A):
    field = A.field
    n = A.n
    chi = charpoly(A)
    ident = Matrix.identity(field, n)
    H = [None] * n
    H[n - 1] = ident
    for i in range(n - 1, 0, -1):
        H[i - 1] = H[i] * A + ident * chi.coeff(i)
    witness = H[0] * A + ident * chi.coeff(0)
    if not witness.is_zero():
        raise InternalInconsistency("Cayley-Hamilton witness failed")
    return ResolventCoeffs(tuple(H), chi)


# -- Smith form of xI - A -----------------------------------------------------

def smith_invariant_factors(A):
    """Invariant factors d_1 | ... | d_n of xI - A over F[x], all monic."""
    field = A.field
    n = A.n
    zero = Poly._raw(field, [])
    M = [[(Poly._raw(field, [-A.rows[i][j], field.one]) if i == j
           else Poly._raw(field, [-A.rows[i][j]])) for j in range(n)] for i in range(n)]
    diag = []
    for t in range(n):
        while True:
            best = None
            for i in range(t, n):
                for j in range(t, n):
                    if not M[i][j].is_zero() and (best is None or M[i][j].degree < best[0]):
                        best = (M[i][j].degree, i, j)
            if best is None:
                break
            _, i, j = best
            M[t], M[i] = M[i], M[t]
            for r in M:
                r[t], r[j] = r[j], r[t]
            piv = M[t][t]
            clean = True
            for i in range(t + 1, n):
                if not M[i][t].is_zero():
                    q, r = divmod(M[i][t], piv)
                    M[i] = [a - q * b for a, b in zip(M[i], M[t])]
                    if not r.is_zero():
                        clean = False
            for j in range(t + 1, n):
                if not M[t][j].is_zero():
                    q, r = divmod(M[t][j], piv)
                    for row in M:
                        row[j] = row[j] - q * row[t]
                    if not r.is_zero():
                        clean = False
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n)
                        if not (M[i][j] % piv).is_zero()), None)
            if bad is None:
                break
            M[t] = [a + b for a, b in zip(M[t], M[bad[0]])]
        diag.append(M[t][t].monic() if not M[t][t].is_zero() else zero)
    return diag


# -- elementary divisors and the canonical form -------------------------------

X_KIND = "x"
NIL_KIND = "nilpotent"
TORSION_KIND = "torsion"


@dataclass(frozen=True)
class ElementaryDivisor:
    """base**exp with base irreducible; base == x gives the X / nilpotent kinds."""

    base: Poly
    exp: int
    order: int = None    # torsion order of the companion block (torsion kind only)

    @property
    def kind(self):
        if self.base.degree == 1 and not self.base.coeff(0):
            return X_KIND if self.exp == 1 else NIL_KIND
        return TORSION_KIND

    @property
    def poly(self):
        return self.base ** self.exp

    @property
    def size(self):
        return self.base.degree * self.exp

    def sort_key(self):
        kind = self.kind
        if kind == X_KIND:
            return (0,)
        if kind == NIL_KIND:
            return (1, -self.exp)
        order = self.order if self.order is not None else float("inf")
        return (2, order, self.size, self.poly.sort_key())

    def to_json(self):
        kind = self.kind
        if kind == X_KIND:
            return "x"
        if kind == NIL_KIND:
            return {"nilpotent": self.exp}
        return {"torsion": self.poly.to_json()}

    def __str__(self):
        kind = self.kind
        if kind == X_KIND:
            return "x"
        if kind == NIL_KIND:
            return f"x^{self.exp}"
        if self.exp == 1:
            return f"({self.base})"
        return f"({self.base})^{self.exp}"


def split_invertible_part(f):
    """Factor monic f with f(0) != 0 into [(irreducible, mult, order)].

    Over GF(p) any f works; in characteristic 0 every factor must divide a
    polynomial x^r - 1 (orders of powers are reported as None).
    """
    field = f.field
    if field.kind == PRIME:
        return [(g, m, order_of_irreducible_power(g, m)) for g, m in factor_fp(f)]
    a, found, rest = unit_root_factors(f)
    if a or rest.degree > 0:
        raise NotSplitOverField(f"factor {rest} is not a product of cyclotomic factors over {field}")
    return [(h, m, e if m == 1 else None) for h, m, e in found]


def divisors_from_invariants(invariants):
    out = []
    for d in invariants:
        if d.degree < 1:
            continue
        a = 0
        while not d.coeff(a):
            a += 1
        if a:
            out.append(ElementaryDivisor(Poly.x(d.field), a))
        rest = Poly._raw(d.field, d.coeffs[a:])
        if rest.degree > 0:
            for h, m, order in split_invertible_part(rest):
                out.append(ElementaryDivisor(h, m, order))
    out.sort(key=lambda e: e.sort_key())
    return out


@dataclass(frozen=True)
class CanonicalData:
    """P^-1 A P = block, with one companion block per divisor in order."""

    divisors: tuple
    transform: Matrix
    block: Matrix

    def offsets(self):
        out, k = [], 0
        for d in self.divisors:
            out.append(k)
            k += d.size
        return out

    def to_json(self):
        return {"divisors": [d.to_json() for d in self.divisors],
                "transform": self.transform.to_json()["rows"],
                "block": self.block.to_json()["rows"]}


def elementary_divisors(A):
    return divisors_from_invariants(smith_invariant_factors(A))


def _primary_chains(A, base, exps):
    """Cyclic generators for the base-primary component, one per exponent.

    Returns {exp: [generator vectors]} such that the Krylov chains of the
    generators (length deg(base) * exp) together form a basis of the
    component.  Top vectors at level j are chosen independent modulo
    ker B^(j-1) + B ker B^(j+1) with B = base(A).
    """
    field = A.field
    n = A.n
    B = A.poly_eval(base)
    top = max(exps)
    kernels = [[]]
    Bp = Matrix.identity(field, n)
    for _ in range(top + 1):
        Bp = Bp * B
        kernels.append(Bp.kernel())
    # kernels[j] = basis of ker B^j; kernels[0] is the zero space
    need = {j: exps.count(j) for j in set(exps)}
    d = base.degree
    chosen = {}
    for j in range(top, 0, -1):
        if not need.get(j):
            continue
        span = Span(field, n)
        for v in kernels[j - 1]:
            span.add(v)
        for v in kernels[min(j + 1, top + 1)]:
            span.add(B.apply(v))
        picks = []
        for w in kernels[j]:
            if len(picks) == need[j]:
                break
            if span.contains(w):
                continue
            orbit = [w]
            for _ in range(d - 1):
                orbit.append(A.apply(orbit[-1]))
            for u in orbit:
                span.add(u)
            picks.append(w)
        if len(picks) != need[j]:
            raise InternalInconsistency(f"could not find {need[j]} generators at level {j}")
        chosen[j] = picks
    return chosen


def canonical_form(A):
    """Primary rational canonical form with a verified similarity transform."""
    field = A.field
    divisors = elementary_divisors(A)
    groups = {}
    for dv in divisors:
        groups.setdefault(dv.base, []).append(dv.exp)
    pools = {}
    for base, exps in groups.items():
        chains = _primary_chains(A, base, exps)
        for j, gens in chains.items():
            pools[(base, j)] = list(gens)
    columns = []
    blocks = []
    for dv in divisors:
        w = pools[(dv.base, dv.exp)].pop(0)
        columns.extend(krylov_matrix(A, w, dv.size).columns())
        blocks.append(companion(dv.poly))
    P = Matrix.from_columns(field, columns)
    B = Matrix.block_diag(field, blocks)
    if P.det() == 0 or A * P != P * B:
        raise InternalInconsistency("canonical transform failed verification")
    return CanonicalData(tuple(divisors), P, B)


def block_matrix(field, divisors):
    return Matrix.block_diag(field, [companion(d.poly) for d in divisors])


def divisor_torsion_order(dv):
    if dv.kind != TORSION_KIND:
        return None
    if dv.order is not None:
        return dv.order
    if dv.base.field.kind == PRIME:
        return order_of_irreducible_power(dv.base, dv.exp)
    return None


def lcm_all(values):
    r = 1
    for v in values:
        r = lcm(r, v)
    return r
