"""Periodicity detection and the two certified decompositions.

* idempotent + torsion for every periodic matrix;
* torsion + square-zero whenever ``2 * rank >= n``.

Every decomposition is computed in canonical coordinates (or directly, over
GF(p)), conjugated back and re-verified with exact arithmetic before it is
returned.  A failed internal check raises :class:`InternalInconsistency`.
"""

import random
from dataclasses import dataclass, field as dc_field
from math import lcm

from .errors import (Derogatory, InternalInconsistency, NotPeriodicError, NotTorsion,
                     RankTooLow, SolverExhausted, TraceMismatch)
from .matcore import (NIL_KIND, TORSION_KIND, X_KIND, Matrix, Span, canonical_form, charpoly,
                      companion, is_cyclic_vector, is_nonderogatory, krylov_matrix,
                      lcm_all, minpoly, resolvent)
from .polyring import (Poly, cyclotomic, cyclotomic_factors, cyclotomic_indices, euler_phi,
                       factorint, torsion_order_poly, trace_of, unit_root_factors)
from .scalars import PRIME, RATIONALS, REAL_QUADRATIC, Field

ET = "ET"
TN = "TN"

TRIVIAL = "Trivial"
PAIR_FULL = "PairFull"
STEER_RANK1 = "SteerRank1"
STEER_GENERAL = "SteerGeneral"
FP_GLOBAL = "FpGlobal"


# -- types ---------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodWitness:
    """A^m0 = A^n0 with n0 = max(nil_index, 1) and m0 = n0 + torsion_order."""

    n0: int
    m0: int
    nil_index: int
    torsion_order: int

    def to_json(self):
        return {"n0": self.n0, "m0": self.m0, "nil_index": self.nil_index,
                "torsion_order": self.torsion_order}


@dataclass
class SearchBudget:
    """Limits for the best-effort steering search.

    ``max_rank`` caps the rank of the square-zero part tried by the random
    ladder (None means n // 2); ``max_height`` bounds integer entries of the
    random factors; ``max_sweeps`` is the number of round-robin passes over
    the rows of V; ``tries`` is the number of random U per height;
    ``max_targets`` caps how many targets the ladder visits; ``max_fills``
    caps filler patterns for the reduced-form solver.
    """

    max_rank: int = None
    max_height: int = 2
    max_sweeps: int = 3
    tries: int = 2
    max_targets: int = 3
    max_fills: int = 6
    seed: int = 0


@dataclass(frozen=True)
class SteerTarget:
    q: Poly
    claimed_order: int = None    # None over GF(p): invertibility suffices
    factors: tuple = ()          # ((irreducible, root order), ...) in characteristic 0
    source: str = "subset"

    def to_json(self):
        return {"q": self.q.to_json(), "claimed_order": self.claimed_order,
                "source": self.source}


@dataclass
class Chunk:
    """A group of canonical blocks solved together.

    ``zero_ids`` are indices of x-divisors, ``core_ids`` indices of the
    nilpotent or torsion divisors sharing the chunk.
    """

    zero_ids: tuple
    core_ids: tuple
    core_kind: str               # "nilpotent" | "torsion" | "mixed" (GF(p) only)
    strategy: str

    @property
    def zeros(self):
        return len(self.zero_ids)

    def to_json(self, divisors):
        return {"zeros": self.zeros,
                "core": [divisors[i].to_json() for i in self.core_ids],
                "strategy": self.strategy}


@dataclass
class ChunkPlan:
    chunks: list

    def to_json(self, divisors):
        return [c.to_json(divisors) for c in self.chunks]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_json(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class VerifyReport:
    checks: list

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def to_json(self):
        return {"ok": self.ok, "checks": [c.to_json() for c in self.checks]}


@dataclass
class Certificate:
    kind: str
    parts: dict                  # {"E","T"} for ET, {"T","N"} for TN
    torsion_order: int
    transform: Matrix
    checks: list = dc_field(default_factory=list)
    plan: list = None            # chunk plan summary (TN only)

    @property
    def field(self):
        return self.transform.field

    def to_json(self):
        out = {"kind": self.kind,
               "field": self.field.to_json(),
               "parts": {k: v.to_json()["rows"] for k, v in self.parts.items()},
               "torsion_order": self.torsion_order,
               "transform": self.transform.to_json()["rows"],
               "checks": [c.to_json() for c in self.checks]}
        if self.plan is not None:
            out["plan"] = self.plan
        return out

    @classmethod
    def from_json(cls, obj):
        F = Field.from_json(obj["field"])
        kind = obj["kind"]
        if kind not in (ET, TN):
            raise ValueError(f"unknown certificate kind {kind!r}")
        expected = {"E", "T"} if kind == ET else {"T", "N"}
        if set(obj["parts"]) != expected:
            raise ValueError(f"{kind} certificate needs parts {sorted(expected)}")
        parts = {k: _parse_matrix(F, rows) for k, rows in obj["parts"].items()}
        s = obj["torsion_order"]
        if not isinstance(s, int) or isinstance(s, bool) or s < 1:
            raise ValueError("torsion_order must be a positive integer")
        checks = [Check(c["name"], c["passed"], c.get("detail", "")) for c in obj.get("checks", [])]
        return cls(kind, parts, s, _parse_matrix(F, obj["transform"]), checks, obj.get("plan"))


def _parse_matrix(F, rows):
    return Matrix._raw(F, [[F.parse(a) for a in r] for r in rows])


# -- periodicity and torsion orders --------------------------------------------

def _split_minpoly(mp, order_bound=None):
    """(a, s) with mp = x^a * g and s the order of x modulo g, or None."""
    F = mp.field
    a = 0
    while not mp.coeff(a):
        a += 1
    g = Poly._raw(F, mp.coeffs[a:])
    if g.degree == 0:
        return a, 1
    s = torsion_order_poly(g, order_bound)
    if s is None:
        return None
    return a, s


def is_periodic(A, order_bound=None):
    """PeriodWitness, or None when no power relation A^m = A^n (m > n >= 1) holds.

    ``order_bound`` caps the cyclotomic indices searched in characteristic 0
    (default: the complete bound).
    """
    split = _split_minpoly(minpoly(A), order_bound)
    if split is None:
        return None
    a, s = split
    n0 = max(a, 1)
    m0 = n0 + s
    if A ** m0 != A ** n0:
        raise InternalInconsistency(f"A^{m0} != A^{n0} for the computed witness")
    return PeriodWitness(n0, m0, a, s)


def torsion_order_matrix(T):
    """Least s >= 1 with T^s = I, or None if T is not torsion."""
    mp = minpoly(T)
    if not mp.coeff(0):
        return None
    s = torsion_order_poly(mp)
    if s is None:
        return None
    if not (T ** s).is_identity():
        raise InternalInconsistency(f"T^{s} != I for the computed order")
    return s


# -- verification --------------------------------------------------------------

def verify_certificate(A, cert):
    """Re-check every invariant of ``cert`` against ``A`` with exact arithmetic."""
    checks = []
    F = A.field
    n = A.n
    parts = cert.parts
    shapes_ok = all(M.field == F and M.nrows == n and M.ncols == n for M in parts.values())
    shapes_ok = shapes_ok and cert.transform.field == F and cert.transform.nrows == n
    checks.append(Check("shape", shapes_ok, "" if shapes_ok else "size or field mismatch"))
    if not shapes_ok:
        return VerifyReport(checks)
    T = parts["T"]
    other = parts["E"] if cert.kind == ET else parts["N"]
    checks.append(Check("sum", T + other == A))
    if cert.kind == ET:
        checks.append(Check("idempotent", other * other == other))
    else:
        checks.append(Check("square_zero", (other * other).is_zero()))
    s = cert.torsion_order
    checks.append(Check("torsion", (T ** s).is_identity(), f"T^{s} = I"))
    bad = [q for q in factorint(s) if (T ** (s // q)).is_identity()]
    checks.append(Check("minimal_order", not bad,
                        "" if not bad else f"T^{s // bad[0]} = I already"))
    checks.append(Check("transform_invertible", cert.transform.det() != 0))
    return VerifyReport(checks)


def _finish(A, cert):
    report = verify_certificate(A, cert)
    if not report.ok:
        raise InternalInconsistency(f"certificate failed checks {report.failed()}")
    cert.checks = report.checks
    return cert


# -- idempotent + torsion ------------------------------------------------------

def _block_et(dv):
    """(E, T) for one canonical block with E + T = companion(dv.poly)."""
    F = dv.base.field
    kind = dv.kind
    if kind == X_KIND:
        return Matrix.identity(F, 1), -Matrix.identity(F, 1)
    if kind == NIL_KIND:
        k = dv.exp
        E = Matrix._raw(F, [[F.one if j == k - 1 else F.zero for j in range(k)] for _ in range(k)])
        T = companion(Poly._raw(F, [F.one] * (k + 1)))
        return E, T
    return Matrix.zeros(F, dv.size), companion(dv.poly)


def idempotent_torsion(A, canon=None, order_bound=None):
    """A = E + T with E idempotent and T torsion."""
    if is_periodic(A, order_bound) is None:
        raise NotPeriodicError("matrix is not periodic")
    canon = canonical_form(A) if canon is None else canon
    F = A.field
    Es, Ts = [], []
    for dv in canon.divisors:
        E, T = _block_et(dv)
        Es.append(E)
        Ts.append(T)
    P = canon.transform
    Pinv = P.inverse()
    E = P * Matrix.block_diag(F, Es) * Pinv
    T = P * Matrix.block_diag(F, Ts) * Pinv
    s = torsion_order_matrix(T)
    if s is None:
        raise InternalInconsistency("torsion part is not torsion")
    return _finish(A, Certificate(ET, {"E": E, "T": T}, s, P))


# -- pairing of zeros with a full torsion block ---------------------------------

def pair_full(Tk):
    """Square-zero N for A = diag(0_k, Tk) such that A - N is torsion."""
    if torsion_order_matrix(Tk) is None:
        raise NotTorsion("block is not torsion")
    F = Tk.field
    k = Tk.n
    rows = []
    for i in range(k):
        rows.append([-a for a in Tk.rows[i]] * 2)
    for i in range(k):
        rows.append(list(Tk.rows[i]) * 2)
    N = Matrix._raw(F, rows)
    A = Matrix.block_diag(F, [Matrix.zeros(F, k), Tk])
    T6 = Tk ** 6
    if not (N * N).is_zero() or (A - N) ** 6 != Matrix.block_diag(F, [T6, T6]):
        raise InternalInconsistency("pairing identity failed")
    return N


# -- rank-one steering ----------------------------------------------------------

def _unit(F, n, i):
    v = [F.zero] * n
    v[i] = F.one
    return v


def _cyclic_vectors(M, rng):
    F = M.field
    n = M.n
    for i in range(n):
        yield _unit(F, n, i)
    acc = [F.zero] * n
    for i in range(n):
        acc = list(acc)
        acc[i] = F.one
        if i:
            yield acc
    while True:
        yield [F(rng.randint(-3, 3)) for _ in range(n)]


def steer_rank1(M, q, seed=0, max_random=200):
    """Rank <= 1 square-zero N with charpoly(M + N) = q, for non-derogatory M.

    With adj(xI - M) = sum x^i H_i and N = u v^T,
    det(xI - M - N) = chi(x) - sum_i x^i v^T H_i u, so v solves the linear
    system (H_i u)^T v = (chi - q)_i.  The system is invertible exactly when
    u is a cyclic vector of M.
    """
    F = M.field
    n = M.n
    if not q.is_monic() or q.degree != n:
        raise ValueError("target must be monic of degree n")
    res = resolvent(M)
    chi = res.charpoly
    if trace_of(chi) != trace_of(q):
        raise TraceMismatch(f"trace of {q} differs from trace of M")
    d = chi - q
    if d.is_zero():
        return Matrix.zeros(F, n)
    if not is_nonderogatory(M):
        raise Derogatory("rank-one steering needs a cyclic matrix")
    rng = random.Random(seed)
    for tried, u in enumerate(_cyclic_vectors(M, rng)):
        if tried > 2 * n + max_random:
            break
        if not is_cyclic_vector(M, u):
            continue
        system = Matrix._raw(F, [res.H[i].apply(u) for i in range(n)])
        v = system.solve([d.coeff(i) for i in range(n)])
        if v is None:
            continue
        N = Matrix._raw(F, [[a * b for b in v] for a in u])
        if not (N * N).is_zero() or charpoly(M + N) != q:
            raise InternalInconsistency("rank-one steering failed verification")
        return N
    raise InternalInconsistency("no cyclic vector found for a cyclic matrix")


# -- targets --------------------------------------------------------------------

def torsion_pool(F, max_degree):
    """[(h, e)]: monic irreducible factors h of Phi_e over F with deg h <= max_degree."""
    span = max_degree if F.kind == RATIONALS else 2 * max_degree
    out = []
    for e in cyclotomic_indices(span):
        for h in cyclotomic_factors(e, F):
            if h.degree <= max_degree:
                out.append((h, e))
    return out


def subset_targets(F, degree, trace, exclude=(), limit=4000):
    """Squarefree products of distinct pool factors with given degree and trace.

    Enumerated by depth-first search in ascending pool order, at most
    ``limit`` results, then sorted by (claimed order, coefficients).
    """
    pool = [(h, e) for h, e in torsion_pool(F, degree) if h not in exclude]
    found = []

    def dfs(start, deg, tr, chosen):
        if len(found) >= limit:
            return
        if deg == degree:
            if tr == trace:
                found.append(tuple(chosen))
            return
        for i in range(start, len(pool)):
            h, e = pool[i]
            if deg + h.degree > degree:
                continue
            chosen.append(pool[i])
            dfs(i + 1, deg + h.degree, tr + trace_of(h), chosen)
            chosen.pop()

    dfs(0, 0, F.zero, [])
    out = []
    for combo in found:
        q = Poly.one(F)
        for h, _ in combo:
            q = q * h
        out.append(SteerTarget(q, lcm_all(e for _, e in combo), combo, "subset"))
    out.sort(key=lambda t: (t.claimed_order, t.q.sort_key()))
    return out


def _target_from_poly(q, claimed, source):
    """SteerTarget for q if q is a squarefree product of torsion factors, else None."""
    a, found, rest = unit_root_factors(q)
    if a or rest.degree > 0 or any(m > 1 for _, m, _ in found):
        return None
    factors = tuple((h, e) for h, _, e in found)
    if claimed % lcm_all(e for _, e in factors):
        raise InternalInconsistency(f"{q} does not divide x^{claimed} - 1")
    return SteerTarget(q, claimed, factors, source)


def _cyclotomic_index(h):
    """e with h == Phi_e over the rationals, or None."""
    if h.field.kind == PRIME:
        return None
    for e in cyclotomic_indices(h.degree):
        if euler_phi(e) == h.degree and cyclotomic(e, h.field) == h:
            return e
    return None


def single_zero_target(p, zeros):
    """Target for zeros x-blocks next to one rational cyclotomic block p.

    n = zeros + deg p; trace 0 -> x^n - 1 (order n), trace 1 -> alternating
    x^n - x^(n-1) + ... (order 2(n+1) for even n, n+1 for odd n), trace -1
    -> x^n + ... + 1 (order n + 1).
    """
    F = p.field
    if p.degree < 2 or not 1 <= zeros < p.degree or _cyclotomic_index(p) is None:
        return None
    n = zeros + p.degree
    tau = trace_of(p)
    if tau == 0:
        q = Poly.x(F, n) - Poly.one(F)
        claimed = n
    elif tau == 1:
        q = Poly._raw(F, [F((-1) ** (n - i)) for i in range(n + 1)])
        claimed = 2 * (n + 1) if n % 2 == 0 else n + 1
    elif tau == -1:
        q = Poly._raw(F, [F.one] * (n + 1))
        claimed = n + 1
    else:
        return None
    return _target_from_poly(q, claimed, "cyclotomic-block")


def quadratic_target(p, order, zeros):
    """p * (x^k - 1), or p * (x^k + 1) if p shares a root with x^k - 1 (k = zeros >= 2)."""
    F = p.field
    k = zeros
    if k < 2:
        return None
    xk = Poly.x(F, k)
    minus = xk - Poly.one(F)
    if p.gcd(minus).degree == 0:
        q, claimed = p * minus, lcm(k, order)
    else:
        q, claimed = p * (xk + Poly.one(F)), lcm(2 * k, order)
    return _target_from_poly(q, claimed, "irreducible-block")


def target_pool(field, zeros, core, chunk_trace):
    """Ordered candidate targets for a characteristic-0 chunk.

    ``core`` is a list of elementary divisors of one kind.  Block-specific
    targets come first, then the subset search ordered by claimed order.
    """
    size = zeros + sum(d.size for d in core)
    out = []
    if len(core) == 1 and core[0].kind == TORSION_KIND:
        p = core[0].poly
        t = single_zero_target(p, zeros)
        if t is not None:
            out.append(t)
        if field.kind == REAL_QUADRATIC and zeros >= 2 and core[0].order:
            t = quadratic_target(p, core[0].order, zeros)
            if t is not None:
                out.append(t)
    seen = {t.q for t in out}
    for t in subset_targets(field, size, chunk_trace):
        if t.q not in seen:
            seen.add(t.q)
            out.append(t)
    for t in out:
        if t.q.degree != size or trace_of(t.q) != chunk_trace:
            raise InternalInconsistency(f"target {t.q} does not match the chunk")
    return out


def choose_target(field, zeros, core, chunk_trace):
    """First target of :func:`target_pool`, or None when the pool is empty."""
    pool = target_pool(field, zeros, core, chunk_trace)
    return pool[0] if pool else None


# -- derogatory steering -----------------------------------------------------------

def _zero_cyclic_split(M):
    """(k, C) when M = diag(0_k, C) with C invertible and cyclic, else None."""
    n = M.n
    k = 0
    while k < n and all(not M.rows[k][j] and not M.rows[j][k] for j in range(n)):
        k += 1
    if k == 0 or k == n:
        return None
    idx = list(range(k, n))
    C = M.submatrix(idx, idx)
    if any(M.rows[i][j] for i in range(k) for j in range(n)):
        return None
    if C.det() == 0 or not is_nonderogatory(C):
        return None
    return k, C


def _fill_patterns(m, k, rng, count):
    """Fixed rows m-k+1..m-1 of H; shifted identities first, then random."""
    rows = range(m - k + 1, m)
    for shift in (m - k, m - k + 1):
        yield {i: [1 if j == i - shift else 0 for j in range(k)] for i in rows}
    for _ in range(max(count - 2, 0)):
        yield {i: [rng.randint(-2, 2) for _ in range(k)] for i in rows}


def _reduced_form_solve(C, k, q, fill):
    """Square-zero N for diag(0_k, C) with C = companion(chi) invertible, or None.

    Take U = [I_k; G] and V^T = S[-G, I] with S selecting the last k
    coordinates; then V^T U = 0 and diag(0, C) + U V^T is similar to
    [[0, S], [H, C]] with H = C G.  Its characteristic polynomial is affine
    in rows 0..m-k of H once the remaining rows are fixed, so the target is
    met by one exact linear solve over probe evaluations.
    """
    F = C.field
    m = C.n
    n = k + m
    slots = [(i, j) for i in range(m - k + 1) for j in range(k)]

    def assemble(vals):
        H = [[F.zero] * k for _ in range(m)]
        for i, row in fill.items():
            H[i] = [F(v) for v in row]
        for (i, j), v in zip(slots, vals):
            H[i][j] = v
        return H

    def reduced(H):
        rows = [[F.zero] * n for _ in range(n)]
        for j in range(k):
            rows[j][m + j] = F.one
        for i in range(m):
            rows[k + i][:k] = H[i]
            rows[k + i][k:] = C.rows[i]
        return Matrix._raw(F, rows)

    zero = [F.zero] * len(slots)
    base = charpoly(reduced(assemble(zero)))
    cols = []
    for s in range(len(slots)):
        probe = list(zero)
        probe[s] = F.one
        cols.append(charpoly(reduced(assemble(probe))) - base)
    system = Matrix._raw(F, [[c.coeff(i) for c in cols] for i in range(n)])
    sol = system.solve([(q - base).coeff(i) for i in range(n)])
    if sol is None:
        return None
    H = Matrix._raw(F, assemble(sol))
    G = C.inverse() * H
    U = Matrix._raw(F, [_unit(F, k, i) for i in range(k)] + [list(r) for r in G.rows])
    SG = [G.rows[m - k + j] for j in range(k)]
    Vt = Matrix._raw(F, [[-a for a in SG[j]] + _unit(F, m, m - k + j) for j in range(k)])
    N = U * Vt
    A = Matrix.block_diag(F, [Matrix.zeros(F, k), C])
    if not (N * N).is_zero() or charpoly(A + N) != q:
        return None
    return N


def steer_zero_block(M, targets, budget, trace):
    """Steering for diag(0_k, C) with C invertible cyclic and k < size(C)."""
    split = _zero_cyclic_split(M)
    if split is None:
        return None
    k, C = split
    m = C.n
    if k > m - 1:
        return None
    F = M.field
    # move C to companion form: C = Pc * companion(chi) * Pc^-1
    chi = charpoly(C)
    rng = random.Random(budget.seed)
    u = next(v for v in _cyclic_vectors(C, rng) if is_cyclic_vector(C, v))
    Pc = krylov_matrix(C, u)
    Cc = companion(chi)
    if C * Pc != Pc * Cc:
        raise InternalInconsistency("Krylov basis does not bring C to companion form")
    Q = Matrix.block_diag(F, [Matrix.identity(F, k), Pc])
    Qinv = Q.inverse()
    for t in targets:
        for fi, fill in enumerate(_fill_patterns(m, k, rng, budget.max_fills)):
            N = _reduced_form_solve(Cc, k, t.q, fill)
            trace.append(f"reduced-form target={t.q} fill#{fi}: {'ok' if N is not None else 'no'}")
            if N is not None:
                return t, Q * N * Qinv
    return None


def _nilpotent_zero_split(M):
    """(z, k) when M = diag(0_z, companion(x^k)) exactly, else None."""
    F = M.field
    n = M.n
    for z in range(1, n - 1):
        k = n - z
        if M == Matrix.block_diag(F, [Matrix.zeros(F, z), companion(Poly.x(F, k))]):
            return z, k
    return None


def _compositions(total, parts, lo):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for a in range(lo, total - lo * (parts - 1) + 1):
        for rest in _compositions(total - a, parts - 1, lo):
            yield (a,) + rest


def _group_factors(factors, sizes, F):
    """Split factors into groups of the given degrees, each of trace 0."""
    groups = [[] for _ in sizes]
    order = sorted(range(len(factors)), key=lambda i: -factors[i][0].degree)

    def place(pos, degs, trs):
        if pos == len(order):
            return all(d == s for d, s in zip(degs, sizes)) and all(t == 0 for t in trs)
        h, e = factors[order[pos]]
        tried = set()
        for g in range(len(sizes)):
            key = (degs[g], trs[g], sizes[g])
            if key in tried or degs[g] + h.degree > sizes[g]:
                continue
            tried.add(key)
            groups[g].append((h, e))
            degs[g] += h.degree
            trs[g] = trs[g] + trace_of(h)
            if place(pos + 1, degs, trs):
                return True
            groups[g].pop()
            degs[g] -= h.degree
            trs[g] = trs[g] - trace_of(h)
        return False

    if place(0, [0] * len(sizes), [F.zero] * len(sizes)):
        return groups
    return None


def _flag_basis(F, z, k, cuts):
    """Basis making diag(0_z, N_k) block upper triangular with cyclic nilpotent blocks.

    Peel W = span(e_{a+1} + g, e_{a+2}, ..., e_k, remaining g's): it is
    invariant, carries one chain shorter by a and one fewer zero, and the
    quotient by it is a single nilpotent Jordan block of size a + 1
    (chain e_1 -> ... -> e_a -> -g).
    """
    n = z + k
    chain = [_unit(F, n, z + i) for i in range(k)]
    pieces = []
    for j, a in enumerate(cuts):
        g = _unit(F, n, j)
        pieces.append(chain[:a] + [[-c for c in g]])
        chain = [[x + y for x, y in zip(chain[a], g)]] + chain[a + 1:]
    blocks = [chain] + list(reversed(pieces))
    return blocks


def steer_nilpotent_flag(M, targets, budget, trace):
    """Steering for diag(0_z, N_k), 1 <= z <= k - 2.

    In the flag basis M is block upper triangular with cyclic nilpotent
    diagonal blocks.  Each block is steered with rank one to its own group of
    target factors; distinct groups share no root, so the block triangular sum
    is diagonalizable with roots of unity as eigenvalues, i.e. torsion.
    """
    split = _nilpotent_zero_split(M)
    if split is None:
        return None
    z, k = split
    F = M.field
    for t in targets:
        if not t.factors:
            continue
        for cuts in _compositions_bounded(z, k):
            sizes = [k - sum(cuts)] + [a + 1 for a in reversed(cuts)]
            groups = _group_factors(list(t.factors), sizes, F)
            trace.append(f"flag target={t.q} cuts={cuts}: {'ok' if groups else 'no grouping'}")
            if groups is None:
                continue
            blocks = _flag_basis(F, z, k, cuts)
            P = Matrix.from_columns(F, [v for b in blocks for v in b])
            Pinv = P.inverse()
            B = Pinv * M * P
            Ns = []
            off = 0
            for size, grp in zip(sizes, groups):
                idx = list(range(off, off + size))
                if B.submatrix(idx, idx) != companion(Poly.x(F, size)):
                    raise InternalInconsistency("flag block is not a nilpotent Jordan block")
                q = Poly.one(F)
                for h, _ in grp:
                    q = q * h
                Ns.append(steer_rank1(B.submatrix(idx, idx), q))
                off += size
            N = P * Matrix.block_diag(F, Ns) * Pinv
            if (N * N).is_zero() and charpoly(M + N) == t.q and torsion_order_matrix(M + N):
                return t, N
            trace.append("flag candidate rejected by verification")
    return None


def _compositions_bounded(z, k):
    """Cut lengths a_1..a_z >= 1 with sum <= k - 2, largest final block first."""
    for total in range(z, k - 1):
        yield from _compositions(total, z, 1)


def _left_null(U):
    """Basis of {w : w^T U = 0}."""
    return U.T.kernel()


def steer_random_ladder(M, targets, budget, trace):
    """Seeded search over N = U V^T with V^T U = 0, solving one row of V at a time."""
    F = M.field
    n = M.n
    rng = random.Random(budget.seed)
    r_lo = max(n - M.rank(), 1)
    r_hi = n // 2 if budget.max_rank is None else min(budget.max_rank, n // 2)
    for t in targets[:budget.max_targets]:
        for r in range(r_lo, r_hi + 1):
            for h in range(1, budget.max_height + 1):
                for attempt in range(budget.tries):
                    U = Matrix._raw(F, [[F(rng.randint(-h, h)) for _ in range(r)] for _ in range(n)])
                    if U.rank() < r:
                        continue
                    W = _left_null(U)
                    coef = [[F(rng.randint(-h, h)) for _ in W] for _ in range(r)]

                    def build(cf):
                        rows = [[sum((c * w[i] for c, w in zip(cf[j], W)), F.zero)
                                 for i in range(n)] for j in range(r)]
                        return U * Matrix._raw(F, rows)

                    for sweep in range(budget.max_sweeps):
                        for j in range(r):
                            trial = [list(row) for row in coef]
                            trial[j] = [F.zero] * len(W)
                            base = charpoly(M + build(trial))
                            cols = []
                            for l in range(len(W)):
                                trial[j] = [F.one if ll == l else F.zero for ll in range(len(W))]
                                cols.append(charpoly(M + build(trial)) - base)
                            system = Matrix._raw(F, [[c.coeff(i) for c in cols] for i in range(n)])
                            sol = system.solve([(t.q - base).coeff(i) for i in range(n)])
                            if sol is None:
                                continue
                            coef[j] = sol
                            N = build(coef)
                            if charpoly(M + N) == t.q and (N * N).is_zero():
                                trace.append(f"ladder target={t.q} rank={r} height={h}: ok")
                                return t, N
                    trace.append(f"ladder target={t.q} rank={r} height={h} try={attempt}: no")
    return None


def steer_general(M, targets, budget=None):
    """Square-zero N with charpoly(M + N) among ``targets``; raises SolverExhausted.

    Ladder: rank-one steering when M is cyclic, the reduced-form solve for
    zeros beside an invertible cyclic block, the flag construction for zeros
    beside a nilpotent block, then a seeded random search.
    Returns (target, N).
    """
    budget = SearchBudget() if budget is None else budget
    trace = []
    if not targets:
        raise SolverExhausted("no admissible target", trace)
    if is_nonderogatory(M):
        t = targets[0]
        return t, steer_rank1(M, t.q, seed=budget.seed)
    for rung in (steer_zero_block, steer_nilpotent_flag, steer_random_ladder):
        found = rung(M, targets, budget, trace)
        if found is not None:
            t, N = found
            if not (N * N).is_zero() or charpoly(M + N) != t.q:
                raise InternalInconsistency("steering result failed verification")
            return found
    raise SolverExhausted("steering budget exhausted", trace)


# -- finite fields ----------------------------------------------------------------

def _avoiding_vector(F, n, spans):
    """A vector outside every span in ``spans`` (two proper subspaces)."""
    outside = [None] * len(spans)
    for i in range(n):
        e = _unit(F, n, i)
        flags = [not s.contains(e) for s in spans]
        if all(flags):
            return e
        for j, f in enumerate(flags):
            if f and outside[j] is None:
                outside[j] = e
    # a lies outside spans[0] only, b outside spans[1] only: a + b avoids both
    a, b = outside
    v = [x + y for x, y in zip(a, b)]
    if any(s.contains(v) for s in spans):
        raise InternalInconsistency("sum trick failed")
    return v


def fp_completion(A):
    """(T, N) with A = T + N, N^2 = 0 and T invertible, over GF(p).

    W is a complement of col(A) meeting ker(A) only in 0; U spans W and V^T
    kills W while mapping ker(A) isomorphically onto F^r.  Then V^T U = 0,
    and (A - N) x = 0 forces A x in col(A) and in W, so A x = 0 and
    V^T x = 0, hence x = 0.
    """
    F = A.field
    if F.kind != PRIME:
        raise ValueError("fp_completion needs a prime field")
    n = A.n
    rank = A.rank()
    if 2 * rank < n:
        raise RankTooLow(rank, n)
    r = n - rank
    if r == 0:
        return A, Matrix.zeros(F, n)
    ker = A.kernel()
    col_span = Span(F, n)
    for c in A.columns():
        col_span.add(c)
    ker_span = Span(F, n)
    for v in ker:
        ker_span.add(v)
    W = []
    for _ in range(r):
        w = _avoiding_vector(F, n, [col_span, ker_span])
        col_span.add(w)
        ker_span.add(w)
        W.append(w)
    basis = W + ker
    full = Span(F, n)
    for v in basis:
        if not full.add(v):
            raise InternalInconsistency("W and ker A are not independent")
    for i in range(n):
        e = _unit(F, n, i)
        if full.add(e):
            basis.append(e)
    Binv = Matrix.from_columns(F, basis).inverse()
    Vt = Matrix._raw(F, [Binv.rows[r + i] for i in range(r)])
    U = Matrix.from_columns(F, W)
    N = U * Vt
    T = A - N
    if not (N * N).is_zero() or T.det() == 0:
        raise InternalInconsistency("finite-field completion failed verification")
    return T, N


# -- allocation -----------------------------------------------------------------------

def _coprime_groups(ids, divisors):
    """Greedy partition into groups with pairwise distinct irreducible bases."""
    groups = []
    for i in ids:
        for g in groups:
            if all(divisors[j].base != divisors[i].base for j in g):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def _subset_with_sum(ids, sizes, target):
    """Indices (in order) whose sizes sum to target, preferring few blocks, or None."""
    reach = {0: ()}
    for i in ids:
        for total, chosen in list(reach.items()):
            t = total + sizes[i]
            if t <= target and t not in reach:
                reach[t] = chosen + (i,)
    return reach.get(target)


def allocate_zeros(canon, field):
    """Group canonical blocks into chunks, distributing the x-blocks.

    Feasible iff z <= sum(k_i - 2) + t (z = number of x-blocks, k_i the
    nilpotent sizes, t the torsion size), which is equivalent to
    2 * rank >= n.  Zeros go to torsion blocks first (whole-block pairings,
    then coprime groups), and any surplus is spread one at a time over the
    nilpotent blocks, largest first, at most k - 2 each.
    """
    divs = canon.divisors
    n = sum(d.size for d in divs)
    zero_ids = [i for i, d in enumerate(divs) if d.kind == X_KIND]
    nil_ids = [i for i, d in enumerate(divs) if d.kind == NIL_KIND]
    tor_ids = [i for i, d in enumerate(divs) if d.kind == TORSION_KIND]
    rank = n - len(zero_ids) - len(nil_ids)
    if 2 * rank < n:
        raise RankTooLow(rank, n)
    if field.kind == PRIME:
        return ChunkPlan([Chunk(tuple(zero_ids), tuple(nil_ids + tor_ids), "mixed", FP_GLOBAL)])
    z = len(zero_ids)
    t = sum(divs[i].size for i in tor_ids)
    sizes = {i: divs[i].size for i in tor_ids}
    r = min(z, t)
    surplus = z - r
    pending = list(zero_ids)

    def take(c):
        out = tuple(pending[:c])
        del pending[:c]
        return out

    chunks = []
    # torsion side
    if tor_ids:
        full = _subset_with_sum(tor_ids, sizes, r) if r else ()
        if r and full is not None:
            chunks.append(Chunk(take(r), full, TORSION_KIND, PAIR_FULL))
            rest = [i for i in tor_ids if i not in full]
            if rest:
                chunks.append(Chunk((), tuple(rest), TORSION_KIND, TRIVIAL))
        else:
            groups = _coprime_groups(tor_ids, divs)
            groups.sort(key=lambda g: -sum(sizes[i] for i in g))
            counts = _spread(groups, sizes, r)
            for g, c in zip(groups, counts):
                gsize = sum(sizes[i] for i in g)
                if c == 0:
                    strat = TRIVIAL
                elif c == gsize:
                    strat = PAIR_FULL
                elif c == 1:
                    strat = STEER_RANK1
                else:
                    strat = STEER_GENERAL
                chunks.append(Chunk(take(c), tuple(g), TORSION_KIND, strat))
    # nilpotent side
    share = {i: 0 for i in nil_ids}
    while surplus:
        moved = False
        for i in nil_ids:
            if surplus and share[i] < divs[i].exp - 2:
                share[i] += 1
                surplus -= 1
                moved = True
        if not moved:
            raise InternalInconsistency("zeros left over after allocation")
    for i in nil_ids:
        c = share[i]
        chunks.append(Chunk(take(c), (i,), NIL_KIND, STEER_GENERAL if c else TRIVIAL))
    if pending:
        raise InternalInconsistency("unallocated zero blocks")
    return ChunkPlan(chunks)


def _spread(groups, sizes, r):
    """Zero counts per group summing to r; each count in 0..size(group)."""
    caps = [sum(sizes[i] for i in g) for g in groups]
    counts = [0] * len(groups)
    left = r
    # first pass keeps every group steerable (count <= size - 1) where possible
    for j, cap in enumerate(caps):
        c = min(left, max(cap - 1, 0))
        counts[j] = c
        left -= c
    for j, cap in enumerate(caps):
        if left and counts[j] < cap:
            # a group that must absorb one more zero becomes a full pairing
            left -= cap - counts[j]
            counts[j] = cap
            if left < 0:
                raise InternalInconsistency("zero spreading overshot")
    if left:
        raise InternalInconsistency("zero spreading failed")
    return counts


# -- torsion + square-zero ----------------------------------------------------------

def _chunk_coords(chunk, offsets, divisors):
    idx = []
    for i in chunk.zero_ids + chunk.core_ids:
        idx.extend(range(offsets[i], offsets[i] + divisors[i].size))
    return idx


def _solve_chunk(chunk, M, divisors, budget):
    """Square-zero Nsq with M - Nsq torsion, for one chunk matrix M."""
    F = M.field
    z = chunk.zeros
    core = [divisors[i] for i in chunk.core_ids]
    if chunk.strategy == TRIVIAL and chunk.core_kind == TORSION_KIND:
        return Matrix.zeros(F, M.n), None
    if chunk.strategy == PAIR_FULL:
        idx = list(range(z, M.n))
        return pair_full(M.submatrix(idx, idx)), None
    pool = target_pool(F, z, core, M.trace())
    if not pool:
        raise SolverExhausted("no admissible target",
                              [f"chunk {chunk.to_json(divisors)}: empty target pool"])
    if chunk.strategy in (TRIVIAL, STEER_RANK1):
        t = pool[0]
        return -steer_rank1(M, t.q, seed=budget.seed), t
    t, N = steer_general(M, pool, budget)
    return -N, t


def torsion_squarezero(A, budget=None, order_bound=None):
    """A = T + N with T torsion and N^2 = 0 (requires 2 * rank(A) >= n)."""
    budget = SearchBudget() if budget is None else budget
    F = A.field
    n = A.n
    if is_periodic(A, order_bound) is None:
        raise NotPeriodicError("matrix is not periodic")
    rank = A.rank()
    if 2 * rank < n:
        raise RankTooLow(rank, n)
    if F.kind == PRIME:
        T, N = fp_completion(A)
        s = torsion_order_matrix(T)
        cert = Certificate(TN, {"T": T, "N": N}, s, Matrix.identity(F, n),
                           plan=[{"strategy": FP_GLOBAL}])
        return _finish(A, cert)
    canon = canonical_form(A)
    plan = allocate_zeros(canon, F)
    offsets = canon.offsets()
    B = canon.block
    Ncan = [[F.zero] * n for _ in range(n)]
    summary = []
    for chunk in plan.chunks:
        idx = _chunk_coords(chunk, offsets, canon.divisors)
        M = B.submatrix(idx, idx)
        Nsq, target = _solve_chunk(chunk, M, canon.divisors, budget)
        for a, i in enumerate(idx):
            for b, j in enumerate(idx):
                Ncan[i][j] = Nsq.rows[a][b]
        entry = chunk.to_json(canon.divisors)
        if target is not None:
            entry["target"] = target.to_json()
        summary.append(entry)
    P = canon.transform
    Pinv = P.inverse()
    Nc = Matrix._raw(F, Ncan)
    N = P * Nc * Pinv
    T = P * (B - Nc) * Pinv
    s = torsion_order_matrix(T)
    if s is None:
        raise InternalInconsistency("assembled T is not torsion")
    return _finish(A, Certificate(TN, {"T": T, "N": N}, s, P, plan=summary))


# -- the obstruction over Q(sqrt 2) ---------------------------------------------------

def _sign(x):
    """Exact sign of a + b*sqrt(d)."""
    a, b = x.a, x.b
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sa == 0 or sb == 0 or sa == sb:
        return sa or sb
    # opposite signs: compare a^2 with d b^2
    diff = a * a - x.d * b * b
    return sa if diff > 0 else (-sa if diff < 0 else 0)


def _bareiss_det(rows):
    """Determinant of a square matrix of polynomials (fraction-free elimination)."""
    a = [list(r) for r in rows]
    n = len(a)
    F = a[0][0].field
    sign = 1
    prev = Poly.one(F)
    for k in range(n - 1):
        if a[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not a[i][k].is_zero()), None)
            if swap is None:
                return Poly._raw(F, [])
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).exact_div(prev)
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return det if sign == 1 else -det


def resultant_y(f, g):
    """Res_y(f, g) for f, g given as coefficient lists in y (low to high) of polys in x."""
    F = f[0].field
    zero = Poly._raw(F, [])
    m, k = len(f) - 1, len(g) - 1
    size = m + k
    rows = []
    for i in range(k):
        row = [zero] * size
        for j, c in enumerate(reversed(f)):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for j, c in enumerate(reversed(g)):
            row[i + j] = c
        rows.append(row)
    return _bareiss_det(rows)


@dataclass
class ObstructionReport:
    matrix: Matrix
    period_check: bool
    witness: PeriodWitness
    trace: object
    root_cases: list             # [{"alpha1", "other_sum", "feasible"}]
    forced_poly: Poly
    quadratic: Poly
    quadratic_is_torsion: bool
    min_poly: Poly
    min_poly_trace: object
    candidates: list             # [(d, Phi_d)]
    mismatches: dict             # d -> bool (True when Phi_d != min_poly)
    solver_verdict: str

    @property
    def ok(self):
        return (self.period_check and not self.quadratic_is_torsion
                and all(self.mismatches.values()))

    def to_json(self):
        return {"matrix": self.matrix.to_json()["rows"],
                "period_check": self.period_check,
                "witness": self.witness.to_json(),
                "trace": str(self.trace),
                "root_cases": self.root_cases,
                "forced_poly": str(self.forced_poly),
                "quadratic": str(self.quadratic),
                "quadratic_is_torsion": self.quadratic_is_torsion,
                "min_poly": str(self.min_poly),
                "min_poly_trace": str(self.min_poly_trace),
                "candidates": {f"Phi_{d}": str(p) for d, p in self.candidates},
                "mismatches": {f"Phi_{d}": v for d, v in self.mismatches.items()},
                "solver_verdict": self.solver_verdict,
                "ok": self.ok}


def remark29_matrix():
    F = Field.real_quadratic(2)
    r2 = F.sqrt_d()
    return Matrix(F, [[0, 0, 0], [0, 0, -1], [0, 1, -r2]])


def check_remark29():
    """Rank-2 periodic 3x3 matrix over Q(sqrt 2) with no torsion + square-zero split.

    If A = T + N then T is invertible with charpoly of degree 3 and trace
    equal to trace(A) = -sqrt 2, its roots are roots of unity, and one of them
    (alpha1) is real.  alpha1 = 1 would force the other two to sum to
    -1 - sqrt 2, beyond the reach of two unit-modulus numbers, so alpha1 = -1
    and the charpoly is (x + 1)(x^2 + (sqrt 2 - 1) x + 1).  Its quadratic
    factor has roots whose minimal polynomial over Q is a quartic of trace 2,
    not one of the degree-4 cyclotomics.
    """
    A = remark29_matrix()
    F = A.field
    Q = Field.rationals()
    r2 = F.sqrt_d()
    x = Poly.x(F)
    witness = is_periodic(A)
    period_check = A ** 9 == A
    if not period_check or witness is None:
        raise InternalInconsistency("A^9 != A")
    tr = A.trace()
    cases = []
    feasible = []
    for alpha in (F(1), F(-1)):
        s = tr - alpha
        # two roots of unity closed under conjugation sum to a real in [-2, 2]
        ok = _sign(F(4) - s * s) >= 0
        cases.append({"alpha1": str(alpha), "other_sum": str(s), "feasible": ok})
        if ok:
            feasible.append((alpha, s))
    if len(feasible) != 1:
        raise InternalInconsistency("expected exactly one admissible real root")
    alpha, s = feasible[0]
    quad = x * x - x * s + Poly.one(F)
    forced = (x - Poly.constant(F, alpha)) * quad
    expected = (x + Poly.one(F)) * Poly(F, [1, r2 - 1, 1])
    if forced != expected or trace_of(forced) != tr:
        raise InternalInconsistency("forced polynomial differs from (x+1)(x^2+(sqrt2-1)x+1)")
    _, found, rest = unit_root_factors(quad)
    quad_torsion = rest.degree == 0
    # eliminate sqrt 2: quad = (x^2 + b x + 1) + c x * y with y^2 = 2
    lo = Poly(Q, [1, quad.coeff(1).a, 1])
    hi = Poly(Q, [0, quad.coeff(1).b])
    res = resultant_y([lo, hi], [Poly(Q, [-2]), Poly(Q, []), Poly(Q, [1])])
    min_poly = res.monic()
    target = Poly(Q, [1, -2, 1, -2, 1])
    if min_poly != target:
        raise InternalInconsistency(f"minimal polynomial {min_poly} differs from {target}")
    cands = [(d, cyclotomic(d, Q)) for d in range(1, 2 * 4 * 4 + 1) if euler_phi(d) == 4]
    mism = {d: p != min_poly for d, p in cands}
    try:
        torsion_squarezero(A)
        verdict = "decomposed"
    except SolverExhausted as exc:
        verdict = str(exc)
    return ObstructionReport(A, period_check, witness, tr, cases, forced, quad, quad_torsion,
                             min_poly, trace_of(min_poly), cands, mism, verdict)
