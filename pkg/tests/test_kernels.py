"""Exact row reduction: planted-rank oracles, nullspace verification, and
backend parity (the compiled and pure implementations must agree bitwise)."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imverma._kernels import BACKEND, nullspace, rank, rref, pyref

try:
    from imverma._kernels import _speedups
    BOTH = (pyref, _speedups)
except ImportError:
    BOTH = (pyref,)


def random_matrix(rng, m, n, den_max=6):
    return [[Fraction(rng.randint(-9, 9), rng.randint(1, den_max))
             for _ in range(n)] for _ in range(m)]


def mat_vec(rows, v):
    return [sum(r[j] * v[j] for j in range(len(v))) for r in rows]


def test_backend_selected():
    assert BACKEND in ("compiled", "python")


def test_rref_known_matrix():
    rows = [[Fraction(1), Fraction(2), Fraction(3)],
            [Fraction(2), Fraction(4), Fraction(6)],
            [Fraction(0), Fraction(1), Fraction(1)]]
    ech, piv = rref(rows)
    assert piv == [0, 1]
    assert ech == [[Fraction(1), Fraction(0), Fraction(1)],
                   [Fraction(0), Fraction(1), Fraction(1)]]


def test_nullspace_annihilates():
    rng = random.Random(11)
    for trial in range(30):
        m, n = rng.randint(1, 8), rng.randint(1, 8)
        a = random_matrix(rng, m, n)
        for v in nullspace(a, n):
            assert all(x == 0 for x in mat_vec(a, v))


def test_planted_rank():
    rng = random.Random(7)
    for trial in range(20):
        r = rng.randint(0, 4)
        m, n = r + rng.randint(0, 3), r + rng.randint(0, 3)
        b = random_matrix(rng, m, r) if r else [[] for _ in range(m)]
        c = random_matrix(rng, r, n)
        # force full rank factors by planting identities
        for i in range(r):
            b[i][i] += Fraction(100)
            c[i][i] += Fraction(100)
        a = [[sum(b[i][k] * c[k][j] for k in range(r)) for j in range(n)]
             for i in range(m)] if r else [[Fraction(0)] * n for _ in range(m)]
        assert rank(a) == r
        assert len(nullspace(a, n)) == n - r


def test_rank_nullity():
    rng = random.Random(3)
    for trial in range(25):
        m, n = rng.randint(1, 7), rng.randint(1, 7)
        a = random_matrix(rng, m, n)
        assert rank(a) + len(nullspace(a, n)) == n


def test_rref_idempotent():
    rng = random.Random(5)
    for trial in range(15):
        a = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
        ech, piv = rref(a)
        ech2, piv2 = rref(ech)
        assert ech == ech2 and piv == piv2


def test_empty_and_zero():
    assert rref([]) == ([], [])
    assert rank([[Fraction(0), Fraction(0)]]) == 0
    basis = nullspace([[Fraction(0), Fraction(0)]], 2)
    assert len(basis) == 2


def test_ragged_rejected():
    with pytest.raises(ValueError):
        rref([[Fraction(1)], [Fraction(1), Fraction(2)]])


@pytest.mark.skipif(len(BOTH) < 2, reason="compiled backend not built")
def test_backend_parity_random():
    rng = random.Random(17)
    for trial in range(40):
        m, n = rng.randint(1, 9), rng.randint(1, 9)
        a = random_matrix(rng, m, n)
        assert pyref.rref(a) == _speedups.rref(a)
        assert pyref.nullspace(a, n) == _speedups.nullspace(a, n)
        assert pyref.rank(a) == _speedups.rank(a)


small_fraction = st.builds(Fraction, st.integers(-20, 20), st.integers(1, 9))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(small_fraction, min_size=1, max_size=5),
                min_size=1, max_size=6).filter(
                    lambda rows: len({len(r) for r in rows}) == 1))
def test_property_nullspace_and_rank(rows):
    n = len(rows[0])
    ns = nullspace(rows, n)
    assert rank(rows) + len(ns) == n
    for v in ns:
        assert all(x == 0 for x in mat_vec(rows, v))
    if len(BOTH) == 2:
        assert pyref.rref(rows) == _speedups.rref(rows)
