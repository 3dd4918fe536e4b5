"""Pytest configuration and fixtures for lbrelax tests."""

import itertools

import numpy as np
import pytest

import lbrelax
from lbrelax import IlpInstance, Sense


@pytest.fixture
def cover_triangle():
    """Vertex cover of a triangle; optimum 2."""
    return IlpInstance(
        objective=[1, 1, 1],
        rows=[[(0, 1), (1, 1)], [(1, 1), (2, 1)], [(0, 1), (2, 1)]],
        senses=[Sense.GE] * 3,
        rhs=[1, 1, 1],
        name="triangle",
    )


@pytest.fixture
def at_most_one():
    """``x1 + x2 <= 1`` with a zero objective."""
    return IlpInstance(objective=[0, 0], rows=[[(0, 1), (1, 1)]], senses=["LE"], rhs=[1], name="at-most-one")


@pytest.fixture
def infeasible():
    """``x1 <= 0`` and ``x1 >= 1``."""
    return IlpInstance(objective=[1], rows=[[(0, 1)], [(0, 1)]], senses=["LE", "GE"], rhs=[0, 1], name="infeasible")


def _random_ilp(rng, n, m, density=0.6, name="random"):
    """Random integer-data ILP with mixed senses, feasible at a planted 0/1 point."""
    planted = rng.integers(0, 2, size=n)
    rows, senses, rhs = [], [], []
    for _ in range(m):
        support = np.flatnonzero(rng.random(n) < density)
        if support.size == 0:
            support = rng.choice(n, size=1)
        coefs = rng.integers(-5, 6, size=support.size)
        coefs[coefs == 0] = 1
        activity = int(coefs @ planted[support])
        sense = rng.choice(["LE", "LE", "GE", "EQ"])
        slack = int(rng.integers(0, 3))
        bound = activity + slack if sense == "LE" else activity - slack if sense == "GE" else activity
        rows.append(list(zip(support.tolist(), coefs.tolist())))
        senses.append(str(sense))
        rhs.append(bound)
    objective = rng.integers(-10, 11, size=n)
    return IlpInstance(objective=objective, rows=rows, senses=senses, rhs=rhs, name=name)


@pytest.fixture
def random_ilp():
    """Factory ``random_ilp(seed, n, m)`` of feasible random instances."""

    def make(seed, n=8, m=6, density=0.6):
        return _random_ilp(np.random.default_rng(seed), n, m, density, name=f"random-{seed}")

    return make


FAMILIES = ("mvc", "mis", "sc", "mk")
ORACLE_SEEDS = range(50)


def small_family_instance(family, seed):
    """Seeded instance of ``family`` with at most 12 variables."""
    if family == "mvc":
        return lbrelax.generate_mvc(12, 2, seed)
    if family == "mis":
        return lbrelax.generate_mis(12, 2, seed)
    if family == "sc":
        return lbrelax.generate_sc(10, 8, density=0.3, seed=seed)
    return lbrelax.generate_mk(6, 2, seed)


@pytest.fixture
def small_family_instances():
    """Five seeded instances per family, all with at most 12 variables."""
    return {family: [small_family_instance(family, seed) for seed in range(5)] for family in FAMILIES}


@pytest.fixture(
    params=[(family, seed) for family in FAMILIES for seed in ORACLE_SEEDS],
    ids=lambda param: f"{param[0]}-{param[1]}",
)
def oracle_instance(request):
    """One of 50 seeded instances per family, all with at most 12 variables."""
    return small_family_instance(*request.param)


def enumerate_assignments(n):
    """All 0/1 vectors of length ``n`` as an ``(2**n, n)`` array."""
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8)


@pytest.fixture
def enumerate_binary():
    return enumerate_assignments


class FakeClock:
    """Clock advancing by ``step`` seconds on every call."""

    def __init__(self, step=0.001):
        self.now = 0.0
        self.step = step

    def __call__(self):
        self.now += self.step
        return self.now


@pytest.fixture
def fake_clock():
    return FakeClock()
