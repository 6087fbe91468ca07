import random

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from perdecomp.matcore import Matrix
from perdecomp.scalars import Field

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIELDS = [Field.rationals(), Field.prime(2), Field.prime(3), Field.prime(5),
          Field.real_quadratic(2)]
FIELD_IDS = [F.to_string() for F in FIELDS]


@st.composite
def scalars(draw, F, height=3):
    seed = draw(st.integers(0, 2 ** 32))
    return F.random_element(random.Random(seed), height)


@st.composite
def matrices(draw, F, max_n=4, height=2):
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2 ** 32))
    rng = random.Random(seed)
    return Matrix(F, [[F.random_element(rng, height) for _ in range(n)] for _ in range(n)])


# -- acceptance summary -----------------------------------------------------------

_criteria = {}


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[crit] = (report.outcome, dict(report.user_properties).get("title", ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_criteria):
        outcome, title = _criteria[crit]
        word = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {crit:2d}: {word}  {title}")


@pytest.fixture
def criterion(record_property):
    def mark(number, title):
        record_property("criterion", number)
        record_property("title", title)
    return mark
