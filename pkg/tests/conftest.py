import numpy as np
import pytest

from qbridge.berezin import first_class, second_class
from qbridge.catalog import binary_icosahedral, highest_weight_projection, quaternion8, s3_standard_rep, symmetric3
from qbridge.groups import build_su2_grid, coset_space, spin_representation, stability_subgroup


def random_herm(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + A.conj().T) / 2


def spin_side(group, j):
    rep = spin_representation(group, j)
    return stability_subgroup(rep, highest_weight_projection(rep.dim))


@pytest.fixture(scope="session")
def s3():
    g = symmetric3()
    rep = s3_standard_rep(g)
    pd = stability_subgroup(rep, np.diag([0.0, 1.0]))
    return first_class(coset_space(g, pd))


@pytest.fixture(scope="session")
def q8():
    g = quaternion8()
    pd = spin_side(g, 0.5)
    return first_class(coset_space(g, pd))


@pytest.fixture(scope="session")
def icosa():
    return binary_icosahedral()


@pytest.fixture(scope="session")
def icosa_specs(icosa):
    """First-class specs for spins 1/2 and 1 and the second-class (1/2, 1) spec."""
    p1, p2 = spin_side(icosa, 0.5), spin_side(icosa, 1)
    c = coset_space(icosa, p1)
    return first_class(c), first_class(coset_space(icosa, p2)), second_class(c, p1, p2)


@pytest.fixture(scope="session")
def su2_24():
    return build_su2_grid(24)


@pytest.fixture(scope="session")
def su2_small():
    return build_su2_grid(6)


@pytest.fixture(scope="session")
def su2_spec_factory(su2_24):
    cache = {}

    def make(j):
        if j not in cache:
            pd = spin_side(su2_24, j)
            cache[j] = first_class(coset_space(su2_24, pd))
        return cache[j]

    return make


# ---------------------------------------------------------------------------
# acceptance reporting: one pass/fail line per criterion


_ACCEPTANCE = {}


@pytest.fixture
def criterion(capsys):
    """record(n, ok, detail) prints the criterion's line and fails the test if not ok."""

    def record(n, ok, detail, seconds=None):
        timing = "" if seconds is None else f" [{seconds:.1f}s]"
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}{timing}"
        _ACCEPTANCE[n] = line
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
