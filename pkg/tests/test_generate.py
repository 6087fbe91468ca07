import pytest
from hypothesis import given, strategies as st

from perdecomp.decompose import is_periodic
from perdecomp.generate import GeneratorConfig, generate
from perdecomp.matcore import block_matrix, canonical_form

from conftest import FIELDS, FIELD_IDS


@pytest.mark.parametrize("F", FIELDS, ids=FIELD_IDS)
def test_generation_is_deterministic(F):
    a = generate(F, GeneratorConfig(size=6, seed=11))
    b = generate(F, GeneratorConfig(size=6, seed=11))
    assert a.to_json() == b.to_json()


@pytest.mark.parametrize("F", FIELDS, ids=FIELD_IDS)
@given(seed=st.integers(0, 10 ** 6), size=st.integers(1, 7))
def test_ground_truth_matches_canonical_form(F, seed, size):
    inst = generate(F, GeneratorConfig(size=size, seed=seed))
    B = block_matrix(F, inst.divisors)
    assert inst.A * inst.transform == inst.transform * B
    canon = canonical_form(inst.A)
    assert [d.to_json() for d in canon.divisors] == [d.to_json() for d in inst.divisors]


@given(seed=st.integers(0, 10 ** 6), size=st.integers(1, 8))
def test_rank_min_instances_meet_threshold(seed, size):
    F = FIELDS[1]
    inst = generate(F, GeneratorConfig(size=size, seed=seed, rank_min=True))
    assert 2 * inst.A.rank() >= size


def test_torsion_only_matrix_has_n0_one():
    F = FIELDS[3]
    for seed in range(40):
        inst = generate(F, GeneratorConfig(size=4, seed=seed))
        if all(d.kind == "torsion" for d in inst.divisors):
            w = is_periodic(inst.A)
            assert w.n0 == 1 and (inst.A ** w.torsion_order).is_identity()
            return
    pytest.fail("no torsion-only instance in 40 seeds")


def test_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(size=0).validate()
    with pytest.raises(ValueError):
        GeneratorConfig(nil_cap=1).validate()
