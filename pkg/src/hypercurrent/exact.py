"""Exact integer and rational linear algebra on small dense matrices.

Everything here works on plain Python lists of ints / Fractions, so there is
no overflow and no rounding: torsion orders, tree sections and homology
classes downstream all rely on these routines being exact.
"""

from __future__ import annotations

from fractions import Fraction


Matrix = list  # list of rows; rows are lists of int or Fraction


def identity_matrix(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if not a or not b:
        return []
    cols = len(b[0])
    return [
        [sum(ra[k] * b[k][j] for k in range(len(b))) for j in range(cols)]
        for ra in a
    ]


def _swap_rows(m: Matrix, i: int, j: int) -> None:
    m[i], m[j] = m[j], m[i]


def _swap_cols(m: Matrix, i: int, j: int) -> None:
    for row in m:
        row[i], row[j] = row[j], row[i]


def smith_normal_form(m: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Return (U, D, V) with U*M*V = D, U and V unimodular, D diagonal.

    The diagonal entries satisfy d1 | d2 | ... and are nonnegative.  Pivots
    are chosen by minimal absolute value to limit entry growth.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    d = [[int(x) for x in row] for row in m]
    u = identity_matrix(rows)
    v = identity_matrix(cols)

    def find_pivot(start: int):
        best = None
        for i in range(start, rows):
            for j in range(start, cols):
                val = abs(d[i][j])
                if val and (best is None or val < best[0]):
                    best = (val, i, j)
        return best

    t = 0
    while t < min(rows, cols):
        piv = find_pivot(t)
        if piv is None:
            break
        _, pi, pj = piv
        if pi != t:
            _swap_rows(d, pi, t)
            _swap_rows(u, pi, t)
        if pj != t:
            _swap_cols(d, pj, t)
            _swap_cols(v, pj, t)

        # Clear row and column t; restart whenever a remainder creates a
        # smaller pivot candidate.
        dirty = False
        for i in range(t + 1, rows):
            if d[i][t]:
                q = d[i][t] // d[t][t]
                for j in range(cols):
                    d[i][j] -= q * d[t][j]
                for j in range(rows):
                    u[i][j] -= q * u[t][j]
                if d[i][t]:
                    dirty = True
        for j in range(t + 1, cols):
            if d[t][j]:
                q = d[t][j] // d[t][t]
                for i in range(rows):
                    d[i][j] -= q * d[i][t]
                for i in range(cols):
                    v[i][j] -= q * v[i][t]
                if d[t][j]:
                    dirty = True
        if dirty:
            continue

        # Enforce divisibility of every remaining entry by the pivot.
        offender = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if d[i][j] % d[t][t]:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            for j in range(cols):
                d[t][j] += d[offender][j]
            for j in range(rows):
                u[t][j] += u[offender][j]
            continue
        t += 1

    for i in range(min(rows, cols)):
        if d[i][i] < 0:
            for j in range(cols):
                d[i][j] = -d[i][j]
            for j in range(rows):
                u[i][j] = -u[i][j]
    return u, d, v


def invariant_factors(m: Matrix) -> list[int]:
    """Nonzero diagonal entries of the Smith form of m."""
    if not m or not m[0]:
        return []
    _, d, _ = smith_normal_form(m)
    return [d[i][i] for i in range(min(len(d), len(d[0]))) if d[i][i] != 0]


def _to_fractions(m: Matrix) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in m]


def row_reduce(m: Matrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q; returns (rref, pivot column list)."""
    a = _to_fractions(m)
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(m: Matrix) -> int:
    if not m or not m[0]:
        return 0
    return len(row_reduce(m)[1])


def independent_columns(m: Matrix) -> list[int]:
    """Indices of the leftmost maximal independent column set (deterministic)."""
    if not m or not m[0]:
        return []
    return row_reduce(m)[1]


def columns_independent(m: Matrix, cols: list[int]) -> bool:
    sub = [[row[j] for j in cols] for row in m]
    return rank(sub) == len(cols)


def rows_independent(m: Matrix, rows_idx: list[int]) -> bool:
    sub = [m[i] for i in rows_idx]
    return rank(sub) == len(rows_idx)


def solve(m: Matrix, b: list) -> list[Fraction] | None:
    """One exact solution of M x = b over Q, or None if inconsistent.

    Free variables are set to zero, which makes the result deterministic.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    aug = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(m)]
    red, pivots = row_reduce(aug)
    if cols in pivots:
        return None
    # Free variables are zero, and rref rows have zeros at the other pivot
    # columns, so each pivot variable reads off the augmented column.
    x = [Fraction(0)] * cols
    for r, c in enumerate(pivots):
        x[c] = red[r][cols]
    return x


def nullspace(m: Matrix) -> list[list[Fraction]]:
    """Basis of the rational kernel of m, one vector per free column."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    if cols == 0:
        return []
    if rows == 0:
        return [[Fraction(i == j) for i in range(cols)] for j in range(cols)]
    red, pivots = row_reduce(m)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * cols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -red[r][fc]
        basis.append(vec)
    return basis


def in_span(m: Matrix, b: list) -> bool:
    """Whether b lies in the rational column span of m."""
    return solve(m, b) is not None
