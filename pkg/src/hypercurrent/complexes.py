"""Finite CW complexes as graded cell sets with integer boundary matrices.

A complex of dimension d stores, for each k, the ordered list of k-cell
identifiers and the integer matrix B_k of shape |X_{k-1}| x |X_k| whose
(j, a) entry is the incidence number of the k-cell a with the (k-1)-cell j.
Top-dimensional incidences additionally carry a signed atom decomposition:
a list of +-1 whose sum equals the matrix entry.  Cell order is the input
order and fixes every matrix index convention downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import exact
from .errors import InvalidComplexError, InvalidSubcomplexError, NotACycleError

RING_TYPES = {"integer": int, "rational": Fraction, "real": float}


@dataclass(frozen=True)
class Chain:
    """Coefficient vector over the cells of one dimension.

    Absent cells are zero.  Integer and rational chains use exact arithmetic
    (Python int / Fraction); real chains use float.
    """

    dimension: int
    ring: str
    coefficients: Mapping[str, object]

    def __post_init__(self):
        if self.ring not in RING_TYPES:
            raise ValueError(f"unknown ring {self.ring!r}")

    def coefficient(self, cell: str):
        return self.coefficients.get(cell, RING_TYPES[self.ring](0))

    def norm(self) -> float:
        """Sum of absolute coefficient values (the l1 state norm)."""
        return float(sum(abs(v) for v in self.coefficients.values()))

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.coefficients.values())


def chain_from_vector(dimension: int, ring: str, cells: Sequence[str], vec) -> Chain:
    cast = RING_TYPES[ring]
    coeffs = {c: cast(v) for c, v in zip(cells, vec) if v != 0}
    return Chain(dimension, ring, coeffs)


def chain_to_vector(chain: Chain, cells: Sequence[str]) -> list:
    cell_set = set(cells)
    for c in chain.coefficients:
        if c not in cell_set:
            raise InvalidComplexError(
                f"chain references unknown dimension-{chain.dimension} cell {c!r}"
            )
    return [chain.coefficient(c) for c in cells]


@dataclass(frozen=True)
class HomologySummary:
    dimension: int
    betti: int
    torsion_factors: tuple[int, ...]
    torsion_order: int


@dataclass(frozen=True)
class CWComplex:
    """Immutable cell inventory plus integer boundary matrices and atoms."""

    name: str
    dimension: int
    cells: tuple[tuple[str, ...], ...]
    boundary: tuple[tuple[tuple[int, ...], ...], ...]
    atoms: Mapping[tuple[str, str], tuple[int, ...]] | None = None
    _index: tuple[dict, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        idx = tuple({c: i for i, c in enumerate(layer)} for layer in self.cells)
        object.__setattr__(self, "_index", idx)

    def n_cells(self, k: int) -> int:
        return len(self.cells[k])

    def cell_index(self, k: int, cell: str) -> int:
        try:
            return self._index[k][cell]
        except KeyError:
            raise InvalidComplexError(f"unknown dimension-{k} cell {cell!r}") from None

    def boundary_matrix(self, k: int) -> list[list[int]]:
        """B_k as mutable nested lists (a copy; exact integers)."""
        return [list(row) for row in self.boundary[k - 1]]

    def boundary_array(self, k: int) -> np.ndarray:
        return np.array(self.boundary[k - 1], dtype=float).reshape(
            self.n_cells(k - 1), self.n_cells(k)
        )

    def incidence(self, k: int, cell: str, face: str) -> int:
        return self.boundary[k - 1][self.cell_index(k - 1, face)][self.cell_index(k, cell)]

    def atom_signs(self, cell: str, face: str) -> tuple[int, ...]:
        if self.atoms is None:
            raise InvalidComplexError(
                f"complex {self.name!r} has no atom decomposition; call default_atoms"
            )
        return self.atoms.get((cell, face), ())


def make_complex(
    name: str,
    dimension: int,
    cells: Sequence[Sequence[str]],
    boundary_entries: Mapping[int, Mapping[tuple[str, str], int]] | None = None,
    atoms: Mapping[tuple[str, str], Sequence[int]] | None = None,
) -> CWComplex:
    """Build a CWComplex from sparse boundary entries keyed (cell, face)."""
    cells_t = tuple(tuple(layer) for layer in cells)
    if len(cells_t) != dimension + 1:
        raise InvalidComplexError(
            f"expected {dimension + 1} cell layers, got {len(cells_t)}"
        )
    index = [{c: i for i, c in enumerate(layer)} for layer in cells_t]
    mats = []
    for k in range(1, dimension + 1):
        rows = len(cells_t[k - 1])
        colsn = len(cells_t[k])
        m = [[0] * colsn for _ in range(rows)]
        for (cell, face), coeff in ((boundary_entries or {}).get(k, {})).items():
            if cell not in index[k]:
                raise InvalidComplexError(f"unknown dimension-{k} cell {cell!r}")
            if face not in index[k - 1]:
                raise InvalidComplexError(f"unknown dimension-{k - 1} cell {face!r}")
            m[index[k - 1][face]][index[k][cell]] = int(coeff)
        mats.append(tuple(tuple(row) for row in m))
    atoms_t = None
    if atoms is not None:
        atoms_t = {key: tuple(int(s) for s in signs) for key, signs in atoms.items()}
    return CWComplex(name, dimension, cells_t, tuple(mats), atoms_t)


def validate_complex(c: CWComplex) -> list[str]:
    """Check the chain-complex axioms; return a list of violations (empty = valid)."""
    violations: list[str] = []
    for k, layer in enumerate(c.cells):
        seen = set()
        for cell in layer:
            if cell in seen:
                violations.append(f"duplicate dimension-{k} cell id {cell!r}")
            seen.add(cell)
    for k in range(1, c.dimension + 1):
        mat = c.boundary[k - 1]
        if len(mat) != c.n_cells(k - 1) or (mat and len(mat[0]) != c.n_cells(k)):
            violations.append(f"boundary matrix B_{k} has wrong shape")
    for k in range(2, c.dimension + 1):
        prod = exact.mat_mul(c.boundary_matrix(k - 1), c.boundary_matrix(k))
        for i, row in enumerate(prod):
            for j, entry in enumerate(row):
                if entry != 0:
                    violations.append(
                        "dd != 0: (B_{km1} B_{k})[{f}, {a}] = {v}".format(
                            km1=k - 1,
                            k=k,
                            f=c.cells[k - 2][i],
                            a=c.cells[k][j],
                            v=entry,
                        )
                    )
    if c.atoms is not None and c.dimension >= 1:
        d = c.dimension
        for alpha in c.cells[d]:
            for face in c.cells[d - 1]:
                b = c.incidence(d, alpha, face)
                signs = c.atoms.get((alpha, face), ())
                if any(s not in (1, -1) for s in signs):
                    violations.append(f"atom signs for ({alpha!r}, {face!r}) not in {{+1,-1}}")
                elif sum(signs) != b:
                    violations.append(
                        f"atom sum for ({alpha!r}, {face!r}) is {sum(signs)}, "
                        f"incidence is {b}"
                    )
        for alpha, face in c.atoms:
            if alpha not in c._index[d] or face not in c._index[d - 1]:
                violations.append(f"atoms reference unknown cells ({alpha!r}, {face!r})")
    return violations


def default_atoms(c: CWComplex) -> CWComplex:
    """Populate atoms with |b| copies of sign(b) for each top incidence."""
    d = c.dimension
    atoms: dict[tuple[str, str], tuple[int, ...]] = {}
    for j, face in enumerate(c.cells[d - 1]):
        for a, alpha in enumerate(c.cells[d]):
            b = c.boundary[d - 1][j][a]
            if b:
                sign = 1 if b > 0 else -1
                atoms[(alpha, face)] = (sign,) * abs(b)
    return CWComplex(c.name, c.dimension, c.cells, c.boundary, atoms)


def skeleton(c: CWComplex, k: int) -> CWComplex:
    """Truncate to the k-skeleton (atoms are re-derived by default_atoms)."""
    if not 0 <= k <= c.dimension:
        raise InvalidComplexError(f"skeleton dimension {k} out of range 0..{c.dimension}")
    trunc = CWComplex(
        f"{c.name}-skeleton-{k}", k, c.cells[: k + 1], c.boundary[:k], None
    )
    return default_atoms(trunc) if k >= 1 else trunc


def boundary_apply(c: CWComplex, x: Chain) -> Chain:
    """Matrix-vector product with B_k, ring preserved."""
    k = x.dimension
    if not 1 <= k <= c.dimension:
        raise InvalidComplexError(f"boundary undefined at dimension {k}")
    vec = chain_to_vector(x, c.cells[k])
    mat = c.boundary[k - 1]
    out = [sum(mat[i][j] * vec[j] for j in range(len(vec))) for i in range(len(mat))]
    return chain_from_vector(k - 1, x.ring, c.cells[k - 1], out)


def coboundary_apply(c: CWComplex, x: Chain) -> Chain:
    """Adjoint of the boundary in the standard inner product (transpose)."""
    k = x.dimension
    if not 0 <= k <= c.dimension - 1:
        raise InvalidComplexError(f"coboundary undefined at dimension {k}")
    vec = chain_to_vector(x, c.cells[k])
    mat = c.boundary[k]
    ncols = len(c.cells[k + 1])
    out = [sum(mat[i][j] * vec[i] for i in range(len(vec))) for j in range(ncols)]
    return chain_from_vector(k + 1, x.ring, c.cells[k + 1], out)


def is_cycle(c: CWComplex, x: Chain) -> bool:
    if x.dimension == 0:
        return True
    return boundary_apply(c, x).is_zero()


def require_cycle(c: CWComplex, x: Chain) -> None:
    if not is_cycle(c, x):
        raise NotACycleError(f"chain at dimension {x.dimension} is not a cycle")


def check_subcomplex(c: CWComplex, cells: Sequence[str]) -> tuple[set[str], ...]:
    """Split a flat id list by dimension and verify boundary-support closure."""
    by_dim: tuple[set[str], ...] = tuple(set() for _ in range(c.dimension + 1))
    for cell in cells:
        dim = next((k for k in range(c.dimension + 1) if cell in c._index[k]), None)
        if dim is None:
            raise InvalidSubcomplexError(f"unknown cell {cell!r} in subcomplex")
        by_dim[dim].add(cell)
    for k in range(1, c.dimension + 1):
        for cell in by_dim[k]:
            col = c.cell_index(k, cell)
            for i, face in enumerate(c.cells[k - 1]):
                if c.boundary[k - 1][i][col] != 0 and face not in by_dim[k - 1]:
                    raise InvalidSubcomplexError(
                        f"subcomplex not closed: boundary of {cell!r} meets "
                        f"{face!r} which is missing"
                    )
    return by_dim


def _relative_boundary(c: CWComplex, k: int, omit: tuple[set[str], ...]) -> list[list[int]]:
    """B_k with rows/columns of subcomplex cells removed (k in 1..d)."""
    rows = [i for i, cell in enumerate(c.cells[k - 1]) if cell not in omit[k - 1]]
    cols = [j for j, cell in enumerate(c.cells[k]) if cell not in omit[k]]
    return [[c.boundary[k - 1][i][j] for j in cols] for i in rows]


def homology(
    c: CWComplex, k: int, relative_to: Sequence[str] | None = None
) -> HomologySummary:
    """Betti number and invariant factors of H_k (or H_k(X, L)) over Z."""
    if not 0 <= k <= c.dimension:
        raise InvalidComplexError(f"dimension {k} out of range 0..{c.dimension}")
    omit: tuple[set[str], ...]
    if relative_to is not None:
        omit = check_subcomplex(c, relative_to)
    else:
        omit = tuple(set() for _ in range(c.dimension + 1))

    n_k = sum(1 for cell in c.cells[k] if cell not in omit[k])
    if k >= 1:
        bk = _relative_boundary(c, k, omit)
        rank_k = exact.rank(bk)
    else:
        rank_k = 0
    if k + 1 <= c.dimension:
        bk1 = _relative_boundary(c, k + 1, omit)
        rank_k1 = exact.rank(bk1)
        factors = tuple(f for f in exact.invariant_factors(bk1) if f > 1)
    else:
        rank_k1 = 0
        factors = ()
    betti = n_k - rank_k - rank_k1
    order = 1
    for f in factors:
        order *= f
    return HomologySummary(k, betti, factors, order)
