import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from perdecomp.decompose import (ET, PAIR_FULL, STEER_GENERAL, STEER_RANK1, TRIVIAL,
                                 Certificate, allocate_zeros, check_remark29,
                                 choose_target, fp_completion, idempotent_torsion,
                                 is_periodic, pair_full, resultant_y, steer_general,
                                 steer_rank1, subset_targets, target_pool,
                                 torsion_order_matrix, torsion_squarezero,
                                 verify_certificate)
from perdecomp.errors import (Derogatory, NotPeriodicError, NotTorsion, RankTooLow,
                              SolverExhausted, TraceMismatch)
from perdecomp.generate import GeneratorConfig, generate
from perdecomp.matcore import (ElementaryDivisor, Matrix, canonical_form, charpoly,
                               companion)
from perdecomp.polyring import Poly, cyclotomic, trace_of
from perdecomp.scalars import Field

from conftest import FIELDS, FIELD_IDS

Q = Field.rationals()
F2 = Field.prime(2)
F5 = Field.prime(5)
QS2 = Field.real_quadratic(2)


def M(F, rows):
    return Matrix(F, rows)


def diag(F, *blocks):
    return Matrix.block_diag(F, list(blocks))


def zeros(F, k):
    return Matrix.zeros(F, k)


# -- periodicity ------------------------------------------------------------------

def test_periodic_examples():
    w = is_periodic(M(Q, [[0, 0], [1, 0]]))
    assert (w.n0, w.m0) == (2, 3)
    assert is_periodic(M(Q, [[1, 1], [0, 1]])) is None
    A = M(QS2, [[0, 0, 0], [0, 0, -1], [0, 1, -QS2.sqrt_d()]])
    w = is_periodic(A)
    assert (w.n0, w.m0) == (1, 9)


def test_periodic_witness_normalization():
    inst = generate(Q, GeneratorConfig(size=5, seed=3))
    w = is_periodic(inst.A)
    assert w.n0 == max(w.nil_index, 1) and w.m0 == w.n0 + w.torsion_order
    assert inst.A ** w.m0 == inst.A ** w.n0


def test_every_matrix_over_fp_is_periodic():
    rng = random.Random(0)
    for _ in range(20):
        A = M(Field.prime(3), [[rng.randrange(3) for _ in range(3)] for _ in range(3)])
        assert is_periodic(A) is not None


def test_torsion_order_examples():
    assert torsion_order_matrix(Matrix.identity(Q, 3)) == 1
    assert torsion_order_matrix(companion(cyclotomic(6))) == 6
    assert torsion_order_matrix(M(F2, [[1, 1], [0, 1]])) == 2
    assert torsion_order_matrix(M(Q, [[1, 1], [0, 1]])) is None
    assert torsion_order_matrix(M(Q, [[0, 0], [1, 0]])) is None


# -- idempotent + torsion --------------------------------------------------------------

def test_et_zero_block():
    cert = idempotent_torsion(M(Q, [[0]]))
    assert cert.parts["E"] == M(Q, [[1]]) and cert.parts["T"] == M(Q, [[-1]])
    assert cert.torsion_order == 2


def test_et_nilpotent_block():
    cert = idempotent_torsion(M(Q, [[0, 0], [1, 0]]))
    assert cert.parts["E"] == M(Q, [[0, 1], [0, 1]])
    assert cert.parts["T"] == M(Q, [[0, -1], [1, -1]])
    assert cert.torsion_order == 3


def test_et_torsion_input():
    A = companion(cyclotomic(5))
    cert = idempotent_torsion(A)
    assert cert.parts["E"].is_zero() and cert.parts["T"] == A


def test_et_characteristic_two_zero_block():
    cert = idempotent_torsion(M(F2, [[0]]))
    assert cert.parts["T"] == M(F2, [[1]]) and cert.torsion_order == 1


def test_et_rejects_non_periodic():
    with pytest.raises(NotPeriodicError):
        idempotent_torsion(M(Q, [[2]]))


@pytest.mark.parametrize("F", FIELDS, ids=FIELD_IDS)
@settings(max_examples=25)
@given(seed=st.integers(0, 10 ** 6), size=st.integers(1, 6))
def test_et_certificates_verify(F, seed, size):
    inst = generate(F, GeneratorConfig(size=size, seed=seed))
    cert = idempotent_torsion(inst.A)
    assert verify_certificate(inst.A, cert).ok


# -- pairing ----------------------------------------------------------------------

def test_pair_full_examples():
    N = pair_full(M(Q, [[1]]))
    A = diag(Q, zeros(Q, 1), M(Q, [[1]]))
    assert A - N == M(Q, [[1, 1], [-1, 0]])
    assert torsion_order_matrix(A - N) == 6
    N = pair_full(M(Q, [[-1]]))
    A = diag(Q, zeros(Q, 1), M(Q, [[-1]]))
    assert A - N == M(Q, [[-1, -1], [1, 0]])
    assert torsion_order_matrix(A - N) == 3
    with pytest.raises(NotTorsion):
        pair_full(M(Q, [[2]]))


# -- targets --------------------------------------------------------------------------

def test_targets_for_cyclotomic_blocks():
    x = Poly.x(Q)
    t = choose_target(Q, 1, [ElementaryDivisor(cyclotomic(4), 1, 4)], Q(0))
    assert t.q == x ** 3 - 1 and t.claimed_order == 3
    t = choose_target(Q, 1, [ElementaryDivisor(cyclotomic(3), 1, 3)], Q(-1))
    assert t.q == Poly(Q, [1, 1, 1, 1]) and t.claimed_order == 4


def test_target_for_irreducible_block_over_quadratic_field():
    p = Poly(QS2, [1, QS2.sqrt_d(), 1])
    t = choose_target(QS2, 2, [ElementaryDivisor(p, 1, 8)], trace_of(p))
    assert t.q == p * Poly(QS2, [-1, 0, 1]) and t.claimed_order == 8


def test_no_target_for_obstructed_chunk():
    p = Poly(QS2, [1, QS2.sqrt_d(), 1])
    assert choose_target(QS2, 1, [ElementaryDivisor(p, 1, 8)], trace_of(p)) is None


def test_subset_targets_are_admissible():
    for t in subset_targets(Q, 6, Q(0)):
        assert t.q.degree == 6 and trace_of(t.q) == 0
        assert (Poly.x(Q).powmod(t.claimed_order, t.q)).is_one()
    orders = [t.claimed_order for t in subset_targets(Q, 5, Q(1))]
    assert orders == sorted(orders)


# -- rank-one steering ---------------------------------------------------------------

def test_steer_rank1_example():
    A = M(Q, [[0, 0], [0, -1]])
    N = steer_rank1(A, cyclotomic(3))
    assert N == M(Q, [[-1, 1], [-1, 1]])
    assert A + N == M(Q, [[-1, 1], [-1, 0]])
    assert torsion_order_matrix(A + N) == 3


def test_steer_rank1_identity_cases():
    A = companion(cyclotomic(5))
    assert steer_rank1(A, cyclotomic(5)).is_zero()
    assert steer_rank1(M(Q, [[1]]), Poly(Q, [-1, 1])).is_zero()


def test_steer_rank1_errors():
    with pytest.raises(TraceMismatch):
        steer_rank1(M(Q, [[0, 0], [1, 0]]), Poly(Q, [1, 1, 1]))
    with pytest.raises(Derogatory):
        steer_rank1(zeros(Q, 2), Poly(Q, [-1, 0, 1]))


def _random_trace_matched(F, chi, rng):
    n = chi.degree
    cs = [F.random_element(rng, 3) for _ in range(n - 1)]
    return Poly._raw(F, cs + [chi.coeff(n - 1), F.one])


@pytest.mark.parametrize("F", [Q, F5], ids=["q", "fp:5"])
@given(seed=st.integers(0, 10 ** 6), n=st.integers(1, 5))
def test_steer_rank1_property(F, seed, n):
    rng = random.Random(seed)
    f = Poly._raw(F, [F.random_element(rng, 3) for _ in range(n)] + [F.one])
    Mx = companion(f)
    q = _random_trace_matched(F, f, rng)
    N = steer_rank1(Mx, q, seed=seed)
    assert (N * N).is_zero()
    assert charpoly(Mx + N) == q
    assert N.rank() <= 1


# -- derogatory steering ----------------------------------------------------------

def test_steer_general_zero_block_with_phi5():
    A = diag(Q, zeros(Q, 2), companion(cyclotomic(5)))
    x = Poly.x(Q)
    target = [t for t in subset_targets(Q, 6, Q(-1)) if t.q == (x * x - 1) * cyclotomic(5)]
    t, N = steer_general(A, target)
    assert (N * N).is_zero()
    assert ((A + N) ** 10).is_identity()


def test_steer_general_nilpotent_with_one_zero():
    A = diag(Q, zeros(Q, 1), companion(Poly.x(Q, 3)))
    t, N = steer_general(A, subset_targets(Q, 4, Q(0)))
    assert (N * N).is_zero() and charpoly(A + N) == t.q
    assert torsion_order_matrix(A + N) is not None


def test_steer_general_delegates_when_cyclic():
    A = companion(Poly.x(Q, 2))
    t, N = steer_general(A, subset_targets(Q, 2, Q(0)))
    assert charpoly(A + N) == t.q


def test_steer_general_empty_targets():
    with pytest.raises(SolverExhausted):
        steer_general(diag(Q, zeros(Q, 1), companion(Poly.x(Q, 3))), [])


# -- finite fields ------------------------------------------------------------------

def test_fp_completion_example():
    A = M(F2, [[0, 0], [0, 1]])
    T, N = fp_completion(A)
    assert N == M(F2, [[1, 1], [1, 1]])
    assert T == M(F2, [[1, 1], [1, 0]])
    assert (T ** 3).is_identity()


def test_fp_completion_trivial_and_low_rank():
    A = M(F5, [[1, 2], [3, 4]])
    T, N = fp_completion(A)
    assert T == A and N.is_zero()
    with pytest.raises(RankTooLow):
        fp_completion(zeros(F2, 2))


# -- allocation -----------------------------------------------------------------------

def _canon_for(F, divisors):
    from perdecomp.matcore import block_matrix
    return canonical_form(block_matrix(F, divisors))


def test_allocation_examples():
    x = Poly.x(Q)
    c = _canon_for(Q, [ElementaryDivisor(x, 1), ElementaryDivisor(x, 3)])
    plan = allocate_zeros(c, Q)
    assert [(ch.zeros, ch.strategy) for ch in plan.chunks] == [(1, STEER_GENERAL)]
    c = _canon_for(Q, [ElementaryDivisor(x, 1), ElementaryDivisor(cyclotomic(1), 1, 1)])
    plan = allocate_zeros(c, Q)
    assert [(ch.zeros, ch.strategy) for ch in plan.chunks] == [(1, PAIR_FULL)]
    c = _canon_for(Q, [ElementaryDivisor(x, 1), ElementaryDivisor(x, 1),
                       ElementaryDivisor(x, 2), ElementaryDivisor(x, 2)])
    with pytest.raises(RankTooLow):
        allocate_zeros(c, Q)


def test_allocation_steerable_torsion_group():
    x = Poly.x(Q)
    c = _canon_for(Q, [ElementaryDivisor(x, 1), ElementaryDivisor(cyclotomic(4), 1, 4)])
    plan = allocate_zeros(c, Q)
    assert [(ch.zeros, ch.strategy) for ch in plan.chunks] == [(1, STEER_RANK1)]


@given(seed=st.integers(0, 10 ** 6), size=st.integers(1, 8))
def test_allocation_invariants(seed, size):
    inst = generate(Q, GeneratorConfig(size=size, seed=seed))
    c = canonical_form(inst.A)
    z = sum(1 for d in c.divisors if d.kind == "x")
    t = sum(d.size for d in c.divisors if d.kind == "torsion")
    slack = sum(d.exp - 2 for d in c.divisors if d.kind == "nilpotent")
    rank = inst.A.rank()
    # feasibility identity: z <= sum(k_i - 2) + t  iff  2 rank >= n
    assert (z <= slack + t) == (2 * rank >= size)
    if 2 * rank < size:
        with pytest.raises(RankTooLow):
            allocate_zeros(c, Q)
        return
    plan = allocate_zeros(c, Q)
    sizes = sum(ch.zeros + sum(c.divisors[i].size for i in ch.core_ids) for ch in plan.chunks)
    assert sizes == size
    assert sum(ch.zeros for ch in plan.chunks) == z
    for ch in plan.chunks:
        core = [c.divisors[i] for i in ch.core_ids]
        if ch.core_kind == "nilpotent":
            assert ch.zeros <= core[0].exp - 2
        if ch.strategy == PAIR_FULL:
            assert ch.zeros == sum(d.size for d in core)
        if ch.strategy == TRIVIAL:
            assert ch.zeros == 0


# -- torsion + square-zero -----------------------------------------------------------

def test_tn_single_zero_examples():
    A = diag(Q, zeros(Q, 1), companion(cyclotomic(4)))
    cert = torsion_squarezero(A)
    assert (cert.parts["T"] ** 3).is_identity()
    A = diag(Q, zeros(Q, 1), companion(cyclotomic(3)))
    cert = torsion_squarezero(A)
    assert 4 % cert.torsion_order == 0


def test_tn_nilpotent_block():
    cert = torsion_squarezero(M(Q, [[0, 0], [1, 0]]))
    assert (cert.parts["T"] ** cert.torsion_order).is_identity()
    assert verify_certificate(M(Q, [[0, 0], [1, 0]]), cert).ok


def test_tn_failure_modes():
    with pytest.raises(RankTooLow):
        torsion_squarezero(zeros(Q, 3))
    with pytest.raises(NotPeriodicError):
        torsion_squarezero(M(Q, [[1, 1], [0, 1]]))


def test_tn_obstructed_matrix_exhausts():
    A = M(QS2, [[0, 0, 0], [0, 0, -1], [0, 1, -QS2.sqrt_d()]])
    with pytest.raises(SolverExhausted, match="no admissible target"):
        torsion_squarezero(A)


@pytest.mark.parametrize("F", FIELDS, ids=FIELD_IDS)
@settings(max_examples=20)
@given(seed=st.integers(0, 10 ** 6), size=st.integers(1, 6))
def test_tn_certificates_verify(F, seed, size):
    inst = generate(F, GeneratorConfig(size=size, seed=seed, rank_min=True))
    try:
        cert = torsion_squarezero(inst.A)
    except SolverExhausted:
        # only derogatory nilpotent chunks in characteristic 0 may exhaust
        assert F.characteristic == 0
        return
    assert verify_certificate(inst.A, cert).ok


def test_target_orders_divide_claims():
    for e in (3, 4, 5, 7, 8, 9, 12):
        p = cyclotomic(e)
        for z in range(1, p.degree):
            A = diag(Q, zeros(Q, z), companion(p))
            pool = target_pool(Q, z, [ElementaryDivisor(p, 1, e)], A.trace())
            t, N = steer_general(A, pool[:1]) if z > 1 else (pool[0], steer_rank1(A, pool[0].q))
            assert t.claimed_order % torsion_order_matrix(A + N) == 0


def test_similarity_invariance():
    rng = random.Random(5)
    from perdecomp.generate import unimodular
    for seed in range(8):
        inst = generate(Q, GeneratorConfig(size=5, seed=seed, rank_min=True))
        P, Pinv = unimodular(Q, 5, rng)
        B = Pinv * inst.A * P
        cert = torsion_squarezero(B)
        T = P * cert.parts["T"] * Pinv
        N = P * cert.parts["N"] * Pinv
        moved = Certificate("TN", {"T": T, "N": N}, cert.torsion_order, P)
        assert verify_certificate(inst.A, moved).ok


# -- verification --------------------------------------------------------------------

def test_verify_detects_tampering():
    A = M(Q, [[0, 0], [1, 0]])
    cert = torsion_squarezero(A)
    bad = Certificate("TN", {"T": cert.parts["T"] + M(Q, [[0, 1], [0, 0]]),
                             "N": cert.parts["N"] - M(Q, [[0, 1], [0, 0]])},
                      cert.torsion_order, cert.transform)
    report = verify_certificate(A, bad)
    assert not report.ok
    cert = idempotent_torsion(M(Q, [[0]]))
    assert verify_certificate(M(Q, [[0]]), cert).ok


def test_verify_detects_square_zero_failure():
    A = M(Q, [[0]])
    bad = Certificate("TN", {"T": M(Q, [[-1]]), "N": M(Q, [[1]])}, 2, Matrix.identity(Q, 1))
    assert "square_zero" in verify_certificate(A, bad).failed()


def test_verify_checks_minimality():
    T = companion(cyclotomic(3))
    A = T
    cert = Certificate(ET, {"E": zeros(Q, 2), "T": T}, 6, Matrix.identity(Q, 2))
    report = verify_certificate(A, cert)
    assert report.failed() == ["minimal_order"]


def test_certificate_json_round_trip():
    A = M(QS2, [[0, 1], [1, QS2.sqrt_d()]])
    cert = idempotent_torsion(A) if is_periodic(A) else idempotent_torsion(M(QS2, [[0]]))
    again = Certificate.from_json(cert.to_json())
    assert again.parts == cert.parts and again.torsion_order == cert.torsion_order


# -- rank necessity (exhaustive over GF(2), n = 3) ---------------------------------------

def _all_matrices(F, n):
    for bits in product(range(F.p), repeat=n * n):
        yield Matrix(F, [bits[i * n:(i + 1) * n] for i in range(n)])


def test_rank_threshold_is_exact_over_f2_n2():
    mats = list(_all_matrices(F2, 2))
    sq0 = [N for N in mats if (N * N).is_zero()]
    for A in mats:
        exists = any((A - N).det() != 0 for N in sq0)
        assert exists == (2 * A.rank() >= 2)


# -- the obstruction ------------------------------------------------------------------

def test_remark29_report():
    rep = check_remark29()
    assert rep.period_check and rep.ok
    assert rep.min_poly == Poly(Q, [1, -2, 1, -2, 1])
    assert sorted(d for d, _ in rep.candidates) == [5, 8, 10, 12]
    assert rep.solver_verdict == "no admissible target"


def test_resultant_eliminates_root():
    # Res_y(x - y, y^2 - 2) = x^2 - 2
    r = resultant_y([Poly.x(Q), Poly(Q, [-1])], [Poly(Q, [-2]), Poly(Q, []), Poly(Q, [1])])
    assert r.monic() == Poly(Q, [-2, 0, 1])
