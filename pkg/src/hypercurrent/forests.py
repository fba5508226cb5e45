"""Spanning trees, spanning co-trees, and their weighted section operators.

A spanning tree (top dimension d) is a subset S of the d-cells whose columns
of B_d form a basis of the rational column space; equivalently the
subcomplex T = X^{(d-1)} u S has H_d(T;Z) = 0 and the (d-1)-st Betti number
of X.  Its torsion order theta_T is the product of the invariant factors of
the column-restricted boundary matrix.

A spanning co-tree (dimension d-1) is determined by the complementary rows:
L is a co-tree iff the rows of B_d outside L are linearly independent with
|L| = |X_{d-1}| - rank(B_d).  Its order a_L is the (finite) order of the
relative group H_{d-1}(X, L; Z), again read off a Smith form.

On top of the enumeration sit the exact per-forest operators (the tree
section and the co-tree cycle representative) and their weighted sums: the
orthogonal section of the boundary operator in the W-modified inner product,
and the harmonic (Boltzmann) representative of a homology class in the
E-modified inner product.  Weights are always evaluated in shifted form
exp(-beta(S - S_min)) so that large beta never underflows to 0/0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import exact
from .complexes import (
    CWComplex,
    Chain,
    chain_from_vector,
    chain_to_vector,
    require_cycle,
)
from .errors import MinimalTieError, NotABoundaryError

PROJECTION_TOL = 1e-10


@dataclass(frozen=True)
class SpanningTree:
    cells: tuple[str, ...]
    theta: int


@dataclass(frozen=True)
class SpanningCoTree:
    cells: tuple[str, ...]
    a: int


@dataclass(frozen=True)
class ForestCatalog:
    trees: tuple[SpanningTree, ...]
    cotrees: tuple[SpanningCoTree, ...]
    delta: int


def enumerate_spanning_trees(c: CWComplex) -> list[SpanningTree]:
    """All spanning trees in the top dimension, in subset order."""
    d = c.dimension
    bd = c.boundary_matrix(d)
    n = c.n_cells(d)
    r = exact.rank(bd)
    trees = []
    for combo in itertools.combinations(range(n), r):
        cols = list(combo)
        if not exact.columns_independent(bd, cols):
            continue
        sub = [[row[j] for j in cols] for row in bd]
        theta = 1
        for f in exact.invariant_factors(sub):
            theta *= f
        trees.append(SpanningTree(tuple(c.cells[d][j] for j in cols), theta))
    return trees


def enumerate_spanning_cotrees(c: CWComplex) -> list[SpanningCoTree]:
    """All spanning co-trees in dimension d-1, in subset order.

    For d = 1 these are the single vertices v with H_0(X, v; Z) finite (the
    0-cells of a connected graph); in general they are the complements of
    independent row sets of B_d of full rank.
    """
    d = c.dimension
    bd = c.boundary_matrix(d)
    m = c.n_cells(d - 1)
    r = exact.rank(bd)
    cotrees = []
    for combo in itertools.combinations(range(m), m - r):
        keep = set(combo)
        rows_out = [i for i in range(m) if i not in keep]
        if not exact.rows_independent(bd, rows_out):
            continue
        sub = [bd[i] for i in rows_out]
        a = 1
        for f in exact.invariant_factors(sub):
            a *= f
        cotrees.append(SpanningCoTree(tuple(c.cells[d - 1][i] for i in combo), a))
    return cotrees


def build_catalog(c: CWComplex) -> ForestCatalog:
    trees = enumerate_spanning_trees(c)
    cotrees = enumerate_spanning_cotrees(c)
    delta = 1
    for t in trees:
        delta *= t.theta
    for l in cotrees:
        delta *= l.a
    return ForestCatalog(tuple(trees), tuple(cotrees), delta)


def delta_invariant(catalog: ForestCatalog) -> int:
    return catalog.delta


def sigma_T(c: CWComplex, tree: SpanningTree, b: Chain) -> Chain:
    """The unique d-chain supported on the tree whose boundary is b (exact)."""
    d = c.dimension
    if b.dimension != d - 1:
        raise NotABoundaryError(f"expected a chain at dimension {d - 1}")
    bd = c.boundary_matrix(d)
    cols = [c.cell_index(d, cell) for cell in tree.cells]
    sub = [[row[j] for j in cols] for row in bd]
    rhs = chain_to_vector(b, c.cells[d - 1])
    sol = exact.solve(sub, rhs)
    if sol is None:
        raise NotABoundaryError("chain is not in B_{d-1}: no tree chain bounds it")
    vec = [Fraction(0)] * c.n_cells(d)
    for j, val in zip(cols, sol):
        vec[j] = val
    return chain_from_vector(d, "rational", c.cells[d], vec)


def psi_L(c: CWComplex, cotree: SpanningCoTree, x: Chain) -> Chain:
    """The cycle supported on the co-tree representing the class of x (exact).

    Solves (B_d w) = x on the complementary rows; the resulting x - B_d w is
    the unique rational cycle supported on the co-tree homologous to x.
    """
    d = c.dimension
    require_cycle(c, x)
    bd = c.boundary_matrix(d)
    keep = {c.cell_index(d - 1, cell) for cell in cotree.cells}
    rows_out = [i for i in range(c.n_cells(d - 1)) if i not in keep]
    xv = chain_to_vector(x, c.cells[d - 1])
    sub = [bd[i] for i in rows_out]
    rhs = [xv[i] for i in rows_out]
    w = exact.solve(sub, rhs)
    if w is None:
        raise NotABoundaryError("class has no representative on the co-tree")
    out = [
        Fraction(xv[i]) - sum(Fraction(bd[i][j]) * w[j] for j in range(len(w)))
        for i in range(c.n_cells(d - 1))
    ]
    return chain_from_vector(d - 1, "rational", c.cells[d - 1], out)


def _shifted_weights(sums: Sequence[float], orders: Sequence[int], beta: float) -> np.ndarray:
    """order^2 * exp(-beta(sum - min sum)): proportional to the true weights."""
    arr = np.asarray(sums, dtype=float)
    shifted = arr - arr.min()
    return np.array([o * o for o in orders], dtype=float) * np.exp(-beta * shifted)


def _tree_matrix(c: CWComplex, tree: SpanningTree) -> np.ndarray:
    """The tree section as a dense matrix on all of C_{d-1} (float).

    On boundaries it agrees with sigma_T; elsewhere it is the least-squares
    solve through the tree columns, which the weighted-sum callers only ever
    apply to (numerical) boundaries.
    """
    d = c.dimension
    bd = c.boundary_matrix(d)
    cols = [c.cell_index(d, cell) for cell in tree.cells]
    sub = [[Fraction(row[j]) for j in cols] for row in bd]
    gram = exact.mat_mul(_transpose(sub), sub)
    # (S^T S)^{-1} S^T, exactly.
    inv = _invert_fraction(gram)
    pseudo = exact.mat_mul(inv, _transpose(sub))
    full = np.zeros((c.n_cells(d), c.n_cells(d - 1)))
    for r, j in enumerate(cols):
        full[j, :] = [float(v) for v in pseudo[r]]
    return full


def _transpose(m):
    return [list(row) for row in zip(*m)] if m else []


def _invert_fraction(m):
    n = len(m)
    aug = [[Fraction(m[i][j]) for j in range(n)] + [Fraction(i == j) for j in range(n)] for i in range(n)]
    red, pivots = exact.row_reduce(aug)
    if pivots != list(range(n)):
        raise NotABoundaryError("tree columns are not independent")
    return [row[n:] for row in red]


class KirchhoffOperator:
    """Weighted sum of tree sections: the boundary section in the W-metric."""

    def __init__(self, c: CWComplex, catalog: ForestCatalog):
        self.complex = c
        self.trees = catalog.trees
        self._matrices = [_tree_matrix(c, t) for t in self.trees]
        self._thetas = [t.theta for t in self.trees]
        d = c.dimension
        self._tree_cols = [
            [c.cell_index(d, cell) for cell in t.cells] for t in self.trees
        ]

    def tree_sums(self, w_values: Mapping[str, float]) -> list[float]:
        d = self.complex.dimension
        return [
            math.fsum(w_values[cell] for cell in t.cells) for t in self.trees
        ]

    def matrix(self, w_values: Mapping[str, float], beta: float) -> np.ndarray:
        weights = _shifted_weights(self.tree_sums(w_values), self._thetas, beta)
        weights = weights / weights.sum()
        out = np.zeros_like(self._matrices[0])
        for wt, mat in zip(weights, self._matrices):
            out += wt * mat
        return out


class BoltzmannFamily:
    """Harmonic representative of a fixed class, as a function of (E, beta).

    Precomputes the exact co-tree representatives of the class once; the
    time-dependent part is a softmax over co-tree energy sums, so values and
    derivatives stay finite for arbitrarily large beta.
    """

    def __init__(self, c: CWComplex, catalog: ForestCatalog, z0: Chain):
        require_cycle(c, z0)
        self.complex = c
        self.cotrees = catalog.cotrees
        self._reps = np.array(
            [
                [float(v) for v in chain_to_vector(psi_L(c, l, z0), c.cells[c.dimension - 1])]
                for l in catalog.cotrees
            ]
        )
        self._orders = [l.a for l in catalog.cotrees]

    def _phis(self, e_values: Mapping[str, float], beta: float) -> np.ndarray:
        sums = [math.fsum(e_values[cell] for cell in l.cells) for l in self.cotrees]
        w = _shifted_weights(sums, self._orders, beta)
        return w / w.sum()

    def rho(self, e_values: Mapping[str, float], beta: float) -> np.ndarray:
        return self._phis(e_values, beta) @ self._reps

    def rho_dot(
        self,
        e_values: Mapping[str, float],
        e_dots: Mapping[str, float],
        beta: float,
    ) -> np.ndarray:
        """Closed-form time derivative of the weight softmax, applied to the reps."""
        phi = self._phis(e_values, beta)
        s_dot = np.array(
            [math.fsum(e_dots[cell] for cell in l.cells) for l in self.cotrees]
        )
        mean = float(phi @ s_dot)
        coeff = beta * phi * (mean - s_dot)
        return coeff @ self._reps


def kirchhoff_section(
    c: CWComplex,
    catalog: ForestCatalog,
    w_values: Mapping[str, float],
    beta: float,
    b: Chain,
) -> Chain:
    """Apply the tree-weighted section to a (numerical) boundary chain."""
    d = c.dimension
    vec = np.array([float(v) for v in chain_to_vector(b, c.cells[d - 1])])
    bd = c.boundary_array(d)
    if vec.any():
        # Precondition: b must lie in the span of the boundary columns.
        resid = vec - bd @ np.linalg.lstsq(bd, vec, rcond=None)[0]
        if np.linalg.norm(resid) > PROJECTION_TOL * (1.0 + np.linalg.norm(vec)):
            raise NotABoundaryError(
                f"chain is outside B_(d-1) (residual {np.linalg.norm(resid):.3g})"
            )
    op = KirchhoffOperator(c, catalog)
    out = op.matrix(w_values, beta) @ vec
    return chain_from_vector(d, "real", c.cells[d], out)


def boltzmann(
    c: CWComplex,
    catalog: ForestCatalog,
    e_values: Mapping[str, float],
    beta: float,
    x: Chain,
) -> Chain:
    """The Boltzmann (harmonic) cycle at the class of x for weights E."""
    fam = BoltzmannFamily(c, catalog, x)
    out = fam.rho(e_values, beta)
    return chain_from_vector(c.dimension - 1, "real", c.cells[c.dimension - 1], out)


def _unique_min(items, sums):
    best = min(sums)
    winners = [it for it, s in zip(items, sums) if s == best]
    if len(winners) > 1:
        raise MinimalTieError(
            "weights not generic: minimal weight ties between "
            + " and ".join(str(sorted(w.cells)) for w in winners)
        )
    return winners[0]


def minimal_tree(catalog: ForestCatalog, w_values: Mapping[str, float]) -> SpanningTree:
    sums = [math.fsum(w_values[cell] for cell in t.cells) for t in catalog.trees]
    return _unique_min(catalog.trees, sums)


def minimal_cotree(catalog: ForestCatalog, e_values: Mapping[str, float]) -> SpanningCoTree:
    sums = [math.fsum(e_values[cell] for cell in l.cells) for l in catalog.cotrees]
    return _unique_min(catalog.cotrees, sums)
