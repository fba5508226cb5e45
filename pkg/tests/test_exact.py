import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercurrent import exact


def minors_gcd_invariants(m):
    """Independent oracle: d_1...d_k = gcd of all k x k minors."""
    rows, cols = len(m), len(m[0]) if m else 0

    def minor_gcds():
        from itertools import combinations

        out = []
        for k in range(1, min(rows, cols) + 1):
            g = 0
            for ri in combinations(range(rows), k):
                for ci in combinations(range(cols), k):
                    sub = [[Fraction(m[i][j]) for j in ci] for i in ri]
                    g = math.gcd(g, abs(_det(sub)))
            out.append(g)
            if g == 0:
                break
        return out

    def _det(a):
        n = len(a)
        a = [row[:] for row in a]
        sign = 1
        for c in range(n):
            p = next((r for r in range(c, n) if a[r][c] != 0), None)
            if p is None:
                return 0
            if p != c:
                a[c], a[p] = a[p], a[c]
                sign = -sign
            for r in range(c + 1, n):
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
        prod = Fraction(sign)
        for i in range(n):
            prod *= a[i][i]
        assert prod.denominator == 1
        return int(prod)

    gs = minor_gcds()
    factors = []
    prev = 1
    for g in gs:
        if g == 0:
            break
        factors.append(g // prev)
        prev = g
    return factors


def is_unimodular(u):
    det = _int_det(u)
    return det in (1, -1)


def _int_det(a):
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    sign = 1
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            m[c], m[p] = m[p], m[c]
            sign = -sign
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    det = Fraction(sign)
    for i in range(n):
        det *= m[i][i]
    return int(det)


def check_snf(m):
    u, d, v = exact.smith_normal_form(m)
    assert exact.mat_mul(exact.mat_mul(u, m), v) == d
    assert is_unimodular(u) and is_unimodular(v)
    diag = [d[i][i] for i in range(min(len(d), len(d[0])))]
    for i, row in enumerate(d):
        for j, entry in enumerate(row):
            if i != j:
                assert entry == 0
    for a, b in zip(diag, diag[1:]):
        if a == 0:
            assert b == 0
        else:
            assert b % a == 0
    assert all(x >= 0 for x in diag)
    return diag


def test_identity():
    diag = check_snf([[1, 0], [0, 1]])
    assert diag == [1, 1]


def test_small_matrix_invariants():
    # det = -4, entry gcd = 2, so the invariant factors are (2, 2).
    m = [[2, 4], [6, 10]]
    check_snf(m)
    assert exact.invariant_factors(m) == [2, 2]
    assert minors_gcd_invariants(m) == [2, 2]


def test_rank_and_columns():
    m = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    assert exact.rank(m) == 2
    assert exact.independent_columns(m) == [0, 1]
    assert exact.columns_independent(m, [0, 1])
    assert not exact.columns_independent(m, [0, 1, 2])


def test_solve_and_nullspace():
    m = [[1, 2], [3, 4]]
    x = exact.solve(m, [5, 11])
    assert x == [Fraction(1), Fraction(2)]
    assert exact.solve([[1, 1], [1, 1]], [1, 2]) is None
    ns = exact.nullspace([[1, 1, 0], [0, 0, 1]])
    assert len(ns) == 1 and ns[0] == [Fraction(-1), Fraction(1), Fraction(0)]


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 4),
    st.integers(1, 4),
    st.lists(st.integers(-9, 9), min_size=16, max_size=16),
)
def test_snf_properties(rows, cols, entries):
    m = [[entries[i * cols + j] for j in range(cols)] for i in range(rows)]
    diag = check_snf(m)
    factors = [x for x in diag if x != 0]
    assert factors == minors_gcd_invariants(m)


@settings(max_examples=40, deadline=None)
@given(st.randoms(use_true_random=False))
def test_snf_permutation_invariance(rnd):
    rows, cols = rnd.randint(2, 4), rnd.randint(2, 4)
    m = [[rnd.randint(-6, 6) for _ in range(cols)] for _ in range(rows)]
    base = exact.invariant_factors(m)
    perm_r = list(range(rows))
    perm_c = list(range(cols))
    rnd.shuffle(perm_r)
    rnd.shuffle(perm_c)
    shuffled = [[m[i][j] for j in perm_c] for i in perm_r]
    assert exact.invariant_factors(shuffled) == base


def test_solve_random_consistency():
    rnd = random.Random(7)
    for _ in range(40):
        rows, cols = rnd.randint(1, 5), rnd.randint(1, 5)
        m = [[rnd.randint(-5, 5) for _ in range(cols)] for _ in range(rows)]
        x_true = [Fraction(rnd.randint(-4, 4), rnd.randint(1, 3)) for _ in range(cols)]
        b = [sum(m[i][j] * x_true[j] for j in range(cols)) for i in range(rows)]
        x = exact.solve(m, b)
        assert x is not None
        residual = [sum(m[i][j] * x[j] for j in range(cols)) - b[i] for i in range(rows)]
        assert all(r == 0 for r in residual)


def test_empty_matrix():
    assert exact.rank([]) == 0
    assert exact.invariant_factors([]) == []
    assert exact.nullspace([[0, 0]]) == [
        [Fraction(1), Fraction(0)],
        [Fraction(0), Fraction(1)],
    ]


@pytest.mark.parametrize(
    "m,expected",
    [
        ([[2, 0], [0, 3]], [1, 6]),
        ([[0, 0], [0, 0]], []),
        ([[4]], [4]),
        ([[2, 1], [1, 2]], [1, 3]),
    ],
)
def test_known_invariant_factors(m, expected):
    assert exact.invariant_factors(m) == expected
    assert minors_gcd_invariants(m) == expected
