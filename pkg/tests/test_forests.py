import random
from fractions import Fraction

import numpy as np
import pytest

from hypercurrent.complexes import Chain, boundary_apply, default_atoms, homology, make_complex
from hypercurrent.dynamics import boundary_basis
from hypercurrent.errors import MinimalTieError, NotABoundaryError, NotACycleError
from hypercurrent.forests import (
    boltzmann,
    build_catalog,
    enumerate_spanning_cotrees,
    enumerate_spanning_trees,
    kirchhoff_section,
    minimal_cotree,
    minimal_tree,
    psi_L,
    sigma_T,
)
from hypercurrent.library import cycle_complex, torus_complex, wedge_complex


@pytest.fixture(scope="module")
def wedge():
    return wedge_complex()


@pytest.fixture(scope="module")
def torus():
    return torus_complex()


@pytest.fixture(scope="module")
def torus_catalog(torus):
    return build_catalog(torus)


def projective_plane():
    return default_atoms(
        make_complex("rp2", 2, [["v"], ["e"], ["f"]], {2: {("f", "e"): 2}})
    )


# --- enumeration ----------------------------------------------------------


def test_wedge_trees_bruteforce_oracle(wedge):
    # Oracle: check all four subsets of the d-cells through the homology API.
    trees = enumerate_spanning_trees(wedge)
    assert [t.cells for t in trees] == [("e1",), ("e2",)]
    assert all(t.theta == 1 for t in trees)
    from itertools import chain, combinations

    expected = []
    lower = [cell for layer in wedge.cells[:2] for cell in layer]
    for r in range(3):
        for combo in combinations(wedge.cells[2], r):
            sub = lower + list(combo)
            if (
                homology(wedge, 2, relative_to=None).betti is not None
            ):  # keep flake quiet
                pass
            # H_d(T) = 0 and beta_{d-1}(T) = beta_{d-1}(X), via restricted matrices
            sub_c = make_complex(
                "sub",
                2,
                [list(wedge.cells[0]), list(wedge.cells[1]), list(combo)],
                {
                    1: {},
                    2: {
                        (cell, face): wedge.incidence(2, cell, face)
                        for cell in combo
                        for face in wedge.cells[1]
                        if wedge.incidence(2, cell, face)
                    },
                },
            )
            if (
                homology(sub_c, 2).betti == 0
                and homology(sub_c, 2).torsion_order == 1
                and homology(sub_c, 1).betti == homology(wedge, 1).betti
            ):
                expected.append(tuple(combo))
    assert expected == [t.cells for t in trees]


def test_wedge_cotrees(wedge):
    cotrees = enumerate_spanning_cotrees(wedge)
    assert [l.cells for l in cotrees] == [("f1",), ("f2",)]
    assert all(l.a == 1 for l in cotrees)


def test_torus_counts(torus, torus_catalog):
    assert len(torus_catalog.trees) == 4
    assert len(torus_catalog.cotrees) == 32
    assert all(t.theta == 1 for t in torus_catalog.trees)
    assert all(l.a == 1 for l in torus_catalog.cotrees)
    assert torus_catalog.delta == 1
    # Each tree omits exactly one face.
    omitted = sorted(
        tuple(sorted(set(torus.cells[2]) - set(t.cells))) for t in torus_catalog.trees
    )
    assert omitted == [("A",), ("B",), ("C",), ("D",)]


def test_torus_skeleton_counts(torus):
    from hypercurrent.complexes import skeleton

    sk = skeleton(torus, 1)
    assert len(enumerate_spanning_trees(sk)) == 32
    assert len(enumerate_spanning_cotrees(sk)) == 4
    assert all(l.a == 1 and len(l.cells) == 1 for l in enumerate_spanning_cotrees(sk))


def test_projective_plane_orders():
    rp2 = projective_plane()
    cat = build_catalog(rp2)
    assert [(t.cells, t.theta) for t in cat.trees] == [(("f",), 2)]
    assert [(l.cells, l.a) for l in cat.cotrees] == [((), 2)]
    assert cat.delta == 4
    # a_L agrees with the relative homology torsion (independent route).
    h = homology(rp2, 1, relative_to=["v"])
    assert h.torsion_order == 2


def test_cotree_order_matches_relative_homology(torus, torus_catalog):
    for cot in torus_catalog.cotrees[:5]:
        h = homology(torus, 1, relative_to=list(torus.cells[0]) + list(cot.cells))
        assert h.betti == 0
        assert h.torsion_order == cot.a


# --- exact sections -------------------------------------------------------


def test_sigma_wedge(wedge):
    tree = enumerate_spanning_trees(wedge)[0]
    b = Chain(1, "rational", {"f1": Fraction(1), "f2": Fraction(-1)})
    out = sigma_T(wedge, tree, b)
    assert out.coefficients == {"e1": Fraction(1)}
    zero = sigma_T(wedge, tree, Chain(1, "rational", {}))
    assert zero.is_zero()


def test_sigma_torus_omitted_face(torus, torus_catalog):
    # T omitting D; b = boundary of D.  Since A+B+C+D is a cycle, the unique
    # tree chain bounding dD is -(A+B+C).
    tree = next(t for t in torus_catalog.trees if "D" not in t.cells)
    b = boundary_apply(torus, Chain(2, "rational", {"D": Fraction(1)}))
    out = sigma_T(torus, tree, b)
    assert out.coefficients == {
        "A": Fraction(-1),
        "B": Fraction(-1),
        "C": Fraction(-1),
    }


def test_sigma_section_property(torus, torus_catalog):
    # d(sigma_T(b)) = b exactly for a spanning set of boundaries.
    rnd = random.Random(11)
    for tree in torus_catalog.trees:
        for _ in range(5):
            x = Chain(
                2, "rational", {c: Fraction(rnd.randint(-3, 3)) for c in torus.cells[2]}
            )
            b = boundary_apply(torus, x)
            out = sigma_T(torus, tree, b)
            back = boundary_apply(torus, out)
            for e in torus.cells[1]:
                assert back.coefficient(e) == b.coefficient(e)
            assert set(out.coefficients) <= set(tree.cells)


def test_sigma_rejects_non_boundary(wedge):
    tree = enumerate_spanning_trees(wedge)[0]
    with pytest.raises(NotABoundaryError):
        sigma_T(wedge, tree, Chain(1, "rational", {"f1": Fraction(1)}))


def test_sigma_denominator_divides_theta():
    rp2 = projective_plane()
    cat = build_catalog(rp2)
    b = Chain(1, "rational", {"e": Fraction(2)})  # boundary of f
    half = sigma_T(rp2, cat.trees[0], Chain(1, "rational", {"e": Fraction(1)}))
    assert half.coefficients == {"f": Fraction(1, 2)}
    assert sigma_T(rp2, cat.trees[0], b).coefficients == {"f": Fraction(1)}


def test_psi_wedge(wedge):
    cotrees = enumerate_spanning_cotrees(wedge)
    l1 = next(l for l in cotrees if l.cells == ("f1",))
    l2 = next(l for l in cotrees if l.cells == ("f2",))
    x = Chain(1, "rational", {"f1": Fraction(1)})
    assert psi_L(wedge, l1, x).coefficients == {"f1": Fraction(1)}
    assert psi_L(wedge, l2, x).coefficients == {"f2": Fraction(1)}
    assert psi_L(wedge, l2, Chain(1, "rational", {})).is_zero()


def test_psi_class_preservation(torus, torus_catalog):
    # psi_L(x) - x must be a rational boundary, and psi_L(x) a cycle on L.
    zb = boundary_basis(torus)
    z0 = Chain(1, "integer", {"a1": 1, "a2": -1})
    xv = np.array([z0.coefficient(e) for e in torus.cells[1]], dtype=float)
    for cot in torus_catalog.cotrees[:8]:
        y = psi_L(torus, cot, z0)
        assert set(y.coefficients) <= set(cot.cells)
        assert boundary_apply(torus, y).is_zero()
        yv = np.array([float(y.coefficient(e)) for e in torus.cells[1]])
        resid = (yv - xv) - zb @ np.linalg.lstsq(zb, yv - xv, rcond=None)[0]
        assert np.abs(resid).max() < 1e-9


def test_psi_rejects_non_cycle(torus, torus_catalog):
    with pytest.raises(NotACycleError):
        psi_L(torus, torus_catalog.cotrees[0], Chain(1, "integer", {"a1": 1}))


# --- weighted operators ---------------------------------------------------


def kirchhoff_oracle(c, w_values, beta, bvec):
    """Independent route: minimize the W-norm of x subject to dx = b."""
    bd = c.boundary_array(c.dimension)
    dw = np.exp(beta * np.array([w_values[a] for a in c.cells[c.dimension]]))
    m = bd @ np.diag(1.0 / dw) @ bd.T
    y = np.linalg.lstsq(m, bvec, rcond=None)[0]
    return (1.0 / dw) * (bd.T @ y)


def boltzmann_oracle(c, e_values, beta, z0vec):
    """Independent route: project z0 onto the E-orthocomplement of boundaries."""
    zb = boundary_basis(c)
    de = np.exp(beta * np.array([e_values[f] for f in c.cells[c.dimension - 1]]))
    gram = zb.T @ (de[:, None] * zb)
    rhs = zb.T @ (de * z0vec)
    return z0vec - zb @ np.linalg.solve(gram, rhs)


def test_kirchhoff_equal_weights_wedge(wedge):
    cat = build_catalog(wedge)
    b = Chain(1, "real", {"f1": 1.0, "f2": -1.0})
    out = kirchhoff_section(wedge, cat, {"e1": 0.0, "e2": 0.0}, 3.7, b)
    assert abs(out.coefficient("e1") - 0.5) < 1e-12
    assert abs(out.coefficient("e2") - 0.5) < 1e-12
    zero = kirchhoff_section(wedge, cat, {"e1": 0.0, "e2": 0.0}, 1.0, Chain(1, "real", {}))
    assert zero.is_zero()


def test_kirchhoff_large_beta_localizes(wedge):
    cat = build_catalog(wedge)
    b = Chain(1, "real", {"f1": 1.0, "f2": -1.0})
    out = kirchhoff_section(wedge, cat, {"e1": -1.0, "e2": 1.0}, 10.0, b)
    assert abs(out.coefficient("e1") - 1.0) < 1e-8
    assert abs(out.coefficient("e2")) < 1e-8


def test_kirchhoff_matches_projection_oracle(torus, torus_catalog):
    rnd = random.Random(23)
    cells2 = torus.cells[2]
    for trial in range(20):
        w = {a: rnd.uniform(-1, 1) for a in cells2}
        beta = rnd.choice([0.7, 1.3])
        x = {a: rnd.uniform(-2, 2) for a in cells2}
        bvec = boundary_apply(torus, Chain(2, "real", x))
        b = np.array([bvec.coefficient(e) for e in torus.cells[1]])
        out = kirchhoff_section(torus, torus_catalog, w, beta, bvec)
        ov = np.array([out.coefficient(a) for a in cells2])
        expected = kirchhoff_oracle(torus, w, beta, b)
        assert np.abs(ov - expected).max() < 1e-9


def test_kirchhoff_w_orthogonality(torus, torus_catalog):
    # <A(b), z>_W = 0 for z in a cycle basis of C_d.
    rnd = random.Random(5)
    bd = torus.boundary_array(2)
    from hypercurrent.exact import nullspace

    cyc = nullspace(torus.boundary_matrix(2))
    for _ in range(10):
        w = {a: rnd.uniform(-1, 1) for a in torus.cells[2]}
        beta = 1.1
        dw = np.exp(beta * np.array([w[a] for a in torus.cells[2]]))
        x = {a: rnd.uniform(-2, 2) for a in torus.cells[2]}
        bvec = boundary_apply(torus, Chain(2, "real", x))
        out = kirchhoff_section(torus, torus_catalog, w, beta, bvec)
        ov = np.array([out.coefficient(a) for a in torus.cells[2]])
        for z in cyc:
            zv = np.array([float(v) for v in z])
            assert abs(np.sum(ov * dw * zv)) < 1e-10
        # and d(A(b)) = b
        back = bd @ ov
        bv = np.array([bvec.coefficient(e) for e in torus.cells[1]])
        assert np.abs(back - bv).max() < 1e-10


def test_kirchhoff_rejects_non_boundary(torus, torus_catalog):
    with pytest.raises(NotABoundaryError):
        kirchhoff_section(
            torus, torus_catalog, {a: 0.0 for a in torus.cells[2]}, 1.0,
            Chain(1, "real", {"a1": 1.0}),
        )


def test_boltzmann_equal_weights_wedge(wedge):
    cat = build_catalog(wedge)
    out = boltzmann(wedge, cat, {"f1": 0.0, "f2": 0.0}, 2.0, Chain(1, "integer", {"f1": 1}))
    assert abs(out.coefficient("f1") - 0.5) < 1e-12
    assert abs(out.coefficient("f2") - 0.5) < 1e-12
    assert boltzmann(wedge, cat, {"f1": 0.0, "f2": 0.0}, 2.0, Chain(1, "integer", {})).is_zero()


def test_boltzmann_large_beta_localizes(wedge):
    cat = build_catalog(wedge)
    out = boltzmann(wedge, cat, {"f1": -1.0, "f2": 1.0}, 20.0, Chain(1, "integer", {"f1": 1}))
    assert abs(out.coefficient("f1") - 1.0) < 1e-8
    assert abs(out.coefficient("f2")) < 1e-8


def test_boltzmann_matches_projection_oracle(torus, torus_catalog):
    rnd = random.Random(31)
    z0 = Chain(1, "integer", {"a1": 1, "a2": -1})
    z0v = np.array([z0.coefficient(e) for e in torus.cells[1]], dtype=float)
    for _ in range(20):
        e = {f: rnd.uniform(-1, 1) for f in torus.cells[1]}
        beta = rnd.choice([0.7, 1.3])
        out = boltzmann(torus, torus_catalog, e, beta, z0)
        ov = np.array([out.coefficient(f) for f in torus.cells[1]])
        expected = boltzmann_oracle(torus, e, beta, z0v)
        assert np.abs(ov - expected).max() < 1e-9


def test_boltzmann_harmonicity(torus, torus_catalog):
    # <rho_B, d(alpha)>_E = 0 for every d-cell.
    rnd = random.Random(17)
    bd = torus.boundary_array(2)
    z0 = Chain(1, "integer", {"a1": 1, "a2": -1})
    for _ in range(10):
        e = {f: rnd.uniform(-1, 1) for f in torus.cells[1]}
        beta = 1.7
        out = boltzmann(torus, torus_catalog, e, beta, z0)
        ov = np.array([out.coefficient(f) for f in torus.cells[1]])
        de = np.exp(beta * np.array([e[f] for f in torus.cells[1]]))
        assert np.abs(bd.T @ (de * ov)).max() < 1e-10


def test_low_temperature_convergence(torus, torus_catalog, wedge):
    # A -> tree section and rho_B -> cotree representative, monotonically in beta.
    rnd = random.Random(41)
    w = {a: rnd.uniform(-1, 1) for a in torus.cells[2]}
    e = {f: rnd.uniform(-1, 1) for f in torus.cells[1]}
    tmu = minimal_tree(torus_catalog, w)
    lmu = minimal_cotree(torus_catalog, e)
    x = Chain(2, "rational", {a: Fraction(rnd.randint(-2, 2)) for a in torus.cells[2]})
    b = boundary_apply(torus, x)
    target_a = sigma_T(torus, tmu, b)
    z0 = Chain(1, "integer", {"a1": 1, "a2": -1})
    target_b = psi_L(torus, lmu, z0)

    err_a, err_b = [], []
    for beta in (5.0, 10.0, 20.0, 40.0):
        out = kirchhoff_section(
            torus, torus_catalog, w, beta,
            Chain(1, "real", {k: float(v) for k, v in b.coefficients.items()}),
        )
        err_a.append(
            max(
                abs(out.coefficient(a) - float(target_a.coefficient(a)))
                for a in torus.cells[2]
            )
        )
        rho = boltzmann(torus, torus_catalog, e, beta, z0)
        err_b.append(
            max(
                abs(rho.coefficient(f) - float(target_b.coefficient(f)))
                for f in torus.cells[1]
            )
        )
    assert all(x > y for x, y in zip(err_a, err_a[1:]))
    assert all(x > y for x, y in zip(err_b, err_b[1:]))
    # Entrywise localization: the rate is exp(-beta * gap), so push beta
    # until the distance is negligible.
    rho = boltzmann(torus, torus_catalog, e, 200.0, z0)
    final = max(
        abs(rho.coefficient(f) - float(target_b.coefficient(f)))
        for f in torus.cells[1]
    )
    assert err_a[-1] < 1e-6 and final < 1e-9


def test_minimal_tree_and_cotree(wedge, torus, torus_catalog):
    cat = build_catalog(wedge)
    assert minimal_tree(cat, {"e1": -0.5, "e2": 0.5}).cells == ("e1",)
    assert minimal_cotree(cat, {"f1": -1.0, "f2": 1.0}).cells == ("f1",)
    # Torus: the minimal tree omits the maximal-weight face.
    w = {"A": 0.4, "B": 0.1, "C": 0.9, "D": 0.2}
    assert set(torus.cells[2]) - set(minimal_tree(torus_catalog, w).cells) == {"C"}
    with pytest.raises(MinimalTieError):
        minimal_tree(cat, {"e1": 0.0, "e2": 0.0})
    with pytest.raises(MinimalTieError):
        minimal_cotree(cat, {"f1": 1.0, "f2": 1.0})


def test_delta_all_ones_examples(wedge, torus_catalog):
    assert build_catalog(wedge).delta == 1
    assert torus_catalog.delta == 1
    assert build_catalog(cycle_complex(4)).delta == 1
