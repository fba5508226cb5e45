import random
from fractions import Fraction

import pytest

from hypercurrent import exact
from hypercurrent.complexes import (
    Chain,
    boundary_apply,
    coboundary_apply,
    default_atoms,
    homology,
    make_complex,
    skeleton,
    validate_complex,
)
from hypercurrent.errors import InvalidSubcomplexError
from hypercurrent.library import cycle_complex, torus_complex, wedge_complex


@pytest.fixture(scope="module")
def wedge():
    return wedge_complex()


@pytest.fixture(scope="module")
def torus():
    return torus_complex()


def projective_plane():
    """One cell per dimension with df = 2e: torsion in H_1."""
    return default_atoms(
        make_complex("rp2", 2, [["v"], ["e"], ["f"]], {2: {("f", "e"): 2}})
    )


def test_validate_torus(torus):
    assert validate_complex(torus) == []


def test_validate_wedge(wedge):
    assert validate_complex(wedge) == []


def test_validate_broken_dd():
    c = make_complex(
        "broken",
        2,
        [["p", "q"], ["x"], ["F"]],
        {1: {("x", "p"): 1, ("x", "q"): -1}, 2: {("F", "x"): 1}},
    )
    report = validate_complex(c)
    assert len(report) == 2  # one nonzero entry of B1*B2 per vertex
    assert all("dd != 0" in v for v in report)


def test_validate_duplicate_ids():
    c = make_complex("dup", 1, [["v", "v"], ["e"]], {1: {}})
    assert any("duplicate" in v for v in validate_complex(c))


def test_validate_bad_atoms(wedge):
    bad = make_complex(
        "bad-atoms",
        2,
        [list(wedge.cells[0]), list(wedge.cells[1]), list(wedge.cells[2])],
        {2: {("e1", "f1"): 1, ("e1", "f2"): -1, ("e2", "f1"): 1, ("e2", "f2"): -1}},
        atoms={("e1", "f1"): (1, 1)},
    )
    report = validate_complex(bad)
    assert any("atom sum" in v for v in report)


def test_default_atoms_values(torus, wedge):
    for (alpha, face), signs in torus.atoms.items():
        assert signs in ((1,), (-1,))
        assert sum(signs) == torus.incidence(2, alpha, face)
    assert wedge.atom_signs("e1", "f1") == (1,)
    assert wedge.atom_signs("e1", "f2") == (-1,)
    assert wedge.atom_signs("e1", "v") == ()


def test_default_atoms_multiplicity():
    c = make_complex("m3", 1, [["p", "q"], ["x"]], {1: {("x", "p"): -3, ("x", "q"): 3}})
    c = default_atoms(c)
    assert c.atom_signs("x", "p") == (-1, -1, -1)
    assert c.atom_signs("x", "q") == (1, 1, 1)


def test_boundary_apply_wedge(wedge):
    out = boundary_apply(wedge, Chain(2, "integer", {"e1": 1}))
    assert out.coefficients == {"f1": 1, "f2": -1}
    cycle = boundary_apply(wedge, Chain(2, "integer", {"e1": 1, "e2": -1}))
    assert cycle.is_zero()
    cob = coboundary_apply(wedge, Chain(1, "integer", {"f1": 1}))
    assert cob.coefficients == {"e1": 1, "e2": 1}


def test_boundary_ring_preserved(torus):
    ch = Chain(2, "rational", {"A": Fraction(1, 2)})
    out = boundary_apply(torus, ch)
    assert out.ring == "rational"
    assert all(isinstance(v, Fraction) for v in out.coefficients.values())


def test_dd_zero_on_basis(torus):
    for face in torus.cells[2]:
        bb = boundary_apply(torus, boundary_apply(torus, Chain(2, "integer", {face: 1})))
        assert bb.is_zero()


def test_homology_torus(torus):
    h0, h1, h2 = (homology(torus, k) for k in range(3))
    assert (h0.betti, h0.torsion_order) == (1, 1)
    assert (h1.betti, h1.torsion_order) == (2, 1)
    assert (h2.betti, h2.torsion_order) == (1, 1)


def test_homology_wedge(wedge):
    assert homology(wedge, 1).betti == 1
    assert homology(wedge, 2).betti == 1
    assert homology(wedge, 1).torsion_order == 1


def test_homology_projective_plane():
    rp2 = projective_plane()
    assert validate_complex(rp2) == []
    h1 = homology(rp2, 1)
    assert h1.betti == 0 and h1.torsion_factors == (2,)
    assert homology(rp2, 2).betti == 0


def test_relative_homology_wedge(wedge):
    # Relative to the co-tree {f1} (with the 0-skeleton): H_1 is trivial.
    h = homology(wedge, 1, relative_to=["v", "f1"])
    assert h.betti == 0 and h.torsion_order == 1


def test_relative_homology_full_complex_is_zero(torus):
    all_cells = [cell for layer in torus.cells for cell in layer]
    for k in range(3):
        h = homology(torus, k, relative_to=all_cells)
        assert h.betti == 0 and h.torsion_order == 1


def test_invalid_subcomplex_named(torus):
    with pytest.raises(InvalidSubcomplexError, match="A"):
        homology(torus, 1, relative_to=["A"])


def test_rank_nullity_accounting(torus, wedge):
    for c in (torus, wedge, projective_plane(), cycle_complex(5)):
        for k in range(c.dimension + 1):
            rk = exact.rank(c.boundary_matrix(k)) if k >= 1 else 0
            rk1 = (
                exact.rank(c.boundary_matrix(k + 1)) if k + 1 <= c.dimension else 0
            )
            assert homology(c, k).betti == c.n_cells(k) - rk - rk1


def test_torus_b1_rank_is_three(torus):
    # |X_0| - beta_0 = 3, independently of the Smith form route.
    assert exact.rank(torus.boundary_matrix(1)) == 3


def test_skeleton(torus):
    sk = skeleton(torus, 1)
    assert sk.dimension == 1
    assert sk.cells[1] == torus.cells[1]
    assert validate_complex(sk) == []
    assert homology(sk, 1).betti == 5  # 8 edges - 4 vertices + 1


def test_smith_on_torus_boundary(torus):
    u, d, v = exact.smith_normal_form(torus.boundary_matrix(1))
    diag = [d[i][i] for i in range(4)]
    assert diag == [1, 1, 1, 0]


def test_boundary_random_linearity(torus):
    rnd = random.Random(3)
    cells = torus.cells[2]
    for _ in range(20):
        x = {c: rnd.randint(-4, 4) for c in cells}
        y = {c: rnd.randint(-4, 4) for c in cells}
        bx = boundary_apply(torus, Chain(2, "integer", x))
        by = boundary_apply(torus, Chain(2, "integer", y))
        both = boundary_apply(
            torus, Chain(2, "integer", {c: x[c] + y[c] for c in cells})
        )
        for e in torus.cells[1]:
            assert both.coefficient(e) == bx.coefficient(e) + by.coefficient(e)
