"""Built-in example complexes and driving protocols.

Three families ship with the package:

- ``wedge-spheres-d2``: one vertex, two (d-1)-cells f1, f2 and two d-cells
  e1, e2 attached so that the boundary of each d-cell is f1 - f2.  Comes
  with the four-parameter pumping protocol (amplitude ``a`` on the d-cell
  weights, peak ``c`` on the (d-1)-cell weights).
- ``torus``: the 4-vertex / 8-edge / 4-face torus with fixed orientations.
- ``cycle-graph-N``: the N-cycle graph (dimension 1), with a two-phase pump
  protocol that transports the minimal vertex half way around and back.
"""

from __future__ import annotations

import re

from .complexes import Chain, CWComplex, default_atoms, make_complex
from .errors import UnknownExampleError
from .protocols import ConstantDriver, DrivingProtocol, SinDriver

EXAMPLE_NAMES = ("wedge-spheres-d2", "torus", "cycle-graph-N (e.g. cycle-graph-4)")


def wedge_complex() -> CWComplex:
    c = make_complex(
        "wedge-spheres-d2",
        2,
        [["v"], ["f1", "f2"], ["e1", "e2"]],
        {
            2: {("e1", "f1"): 1, ("e1", "f2"): -1, ("e2", "f1"): 1, ("e2", "f2"): -1},
        },
    )
    return default_atoms(c)


def wedge_protocol(a: float = 1.0, c: float = 1.5, tau_d: float = 200.0, beta: float = 6.0) -> DrivingProtocol:
    """The pumping protocol: W1 = -a sin(2 pi t), E1 runs from -1 up to c and back."""
    e1 = SinDriver(offset=(c - 1.0) / 2.0, amplitude=(c + 1.0) / 2.0, phase=-0.25)
    w1 = SinDriver(offset=0.0, amplitude=-a, phase=0.0)
    return DrivingProtocol(
        tau_d=tau_d,
        beta=beta,
        e_drivers={"f1": e1, "f2": e1.negated()},
        w_drivers={"e1": w1, "e2": w1.negated()},
    )


def torus_complex() -> CWComplex:
    """The torus of the standard 4/8/4 cell structure with fixed orientations.

    Vertices v00, v10, v01, v11; vertical edges a1, a2 (both v00 -> v01) and
    b1, b2 (both v11 -> v10); horizontal edges c1, c2 (v00 -> v10) and
    d1, d2 (v01 -> v11).  Faces A, B, C, D are the four squares, oriented
    counterclockwise.
    """
    edges = {
        "a1": ("v00", "v01"),
        "a2": ("v00", "v01"),
        "b1": ("v11", "v10"),
        "b2": ("v11", "v10"),
        "c1": ("v00", "v10"),
        "c2": ("v00", "v10"),
        "d1": ("v01", "v11"),
        "d2": ("v01", "v11"),
    }
    b1 = {}
    for name, (src, dst) in edges.items():
        b1[(name, dst)] = 1
        b1[(name, src)] = -1
    faces = {
        "A": {"d1": 1, "b2": 1, "c1": -1, "a2": 1},
        "B": {"d2": -1, "a2": -1, "c2": 1, "b2": -1},
        "C": {"c1": 1, "b1": -1, "d1": -1, "a1": -1},
        "D": {"c2": -1, "a1": 1, "d2": 1, "b1": 1},
    }
    b2 = {(face, edge): coeff for face, edges_ in faces.items() for edge, coeff in edges_.items()}
    c = make_complex(
        "torus",
        2,
        [["v00", "v10", "v01", "v11"],
         ["a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2"],
         ["A", "B", "C", "D"]],
        {1: b1, 2: b2},
    )
    return default_atoms(c)


def torus_protocol(tau_d: float = 200.0, beta: float = 2.0) -> DrivingProtocol:
    """A good protocol for the torus: distinct constant face weights (so W is
    one-to-one for all t) with gentle oscillations on the edge weights."""
    cplx = torus_complex()
    e_drivers = {}
    for i, edge in enumerate(cplx.cells[1]):
        e_drivers[edge] = SinDriver(
            offset=0.11 * (i + 1), amplitude=0.05, phase=i / 8.0
        )
    w_drivers = {
        face: ConstantDriver(0.15 * (i + 1)) for i, face in enumerate(cplx.cells[2])
    }
    return DrivingProtocol(tau_d=tau_d, beta=beta, e_drivers=e_drivers, w_drivers=w_drivers)


def cycle_complex(n: int) -> CWComplex:
    if n < 3:
        raise UnknownExampleError("cycle graphs need at least 3 vertices")
    verts = [f"v{i}" for i in range(n)]
    edges = [f"a{i}" for i in range(n)]
    b1 = {}
    for i in range(n):
        b1[(f"a{i}", f"v{(i + 1) % n}")] = 1
        b1[(f"a{i}", f"v{i}")] = -1
    c = make_complex(f"cycle-graph-{n}", 1, [verts, edges], {1: b1})
    return default_atoms(c)


def cycle_pump_protocol(n: int, tau_d: float = 200.0, beta: float = 6.0) -> DrivingProtocol:
    """Two-phase pump on the N-cycle: the deep vertex moves v0 -> v_{n/2} while
    the high barrier sits on edge a_{n-1}, then returns while it sits on the
    opposite edge, transporting one full unit of current around the cycle."""
    half = n // 2
    e_drivers = {}
    w_drivers = {}
    for i in range(n):
        if i == 0:
            e_drivers[f"v{i}"] = SinDriver(offset=0.0, amplitude=-1.0, phase=0.25)
        elif i == half:
            e_drivers[f"v{i}"] = SinDriver(offset=0.0, amplitude=1.0, phase=0.25)
        else:
            e_drivers[f"v{i}"] = ConstantDriver(0.3 + 0.37 * i / n)
    for i in range(n):
        if i == n - 1:
            w_drivers[f"a{i}"] = SinDriver(offset=0.0, amplitude=2.0, phase=0.0)
        elif i == half - 1:
            w_drivers[f"a{i}"] = SinDriver(offset=0.0, amplitude=-2.0, phase=0.0)
        else:
            w_drivers[f"a{i}"] = ConstantDriver(-2.2 - 0.3 * i / n)
    return DrivingProtocol(tau_d=tau_d, beta=beta, e_drivers=e_drivers, w_drivers=w_drivers)


def default_initial_cycle(c: CWComplex) -> Chain:
    """A canonical nonzero integer (d-1)-cycle generating a homology class."""
    if c.name.startswith("wedge-spheres"):
        return Chain(1, "integer", {"f1": 1})
    if c.name.startswith("torus"):
        return Chain(1, "integer", {"a1": 1, "a2": -1})
    if c.name.startswith("cycle-graph"):
        return Chain(0, "integer", {"v0": 1})
    raise UnknownExampleError(f"no default initial cycle for {c.name!r}")


def example(name: str) -> tuple[CWComplex, DrivingProtocol | None]:
    """Return a built-in complex and its default protocol (None if it has none)."""
    if name == "wedge-spheres-d2":
        return wedge_complex(), wedge_protocol()
    if name == "torus":
        return torus_complex(), torus_protocol()
    m = re.fullmatch(r"cycle-graph-(\d+)", name)
    if m:
        n = int(m.group(1))
        return cycle_complex(n), cycle_pump_protocol(n)
    raise UnknownExampleError(
        f"unknown example {name!r}; available: {', '.join(EXAMPLE_NAMES)}"
    )
