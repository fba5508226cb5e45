"""Expectation dynamics of the driven cycle process.

The dynamical operator on (d-1)-chains is the biased Laplacian
H = B_d e^{-beta W} B_d^T e^{beta E}; the expectation of the process solves
q' = -tau_D H(t) q.  Everything here is dense float linear algebra at desk
scale.

Two propagation engines coexist:

- ``evolve`` / ``monodromy``: explicit adaptive Dormand-Prince 5(4), with a
  hard step budget.  Appropriate while tau_D * ||H|| is moderate; fails
  loudly (StiffnessError) otherwise.
- ``periodic_solution``: slice-wise exact propagators of the frozen linear
  system (exponential midpoint rule), restricted to the boundary subspace.
  Unconditionally stable, so the adiabatic / low-temperature regimes
  (tau_D * ||H|| up to ~1e47) are reachable.  The periodic initial value is
  the contraction fixed point xi(0) = (I - U(1,0))^{-1} F, the discrete
  counterpart of the time-ordered-exponential construction.

The current density is evaluated as J = tau_D D*(rho - rho^B); this equals
tau_D D* rho exactly (the harmonic part is annihilated analytically) and
avoids the catastrophic cancellation the naive form suffers at large beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from . import exact
from .complexes import (
    CWComplex,
    Chain,
    chain_from_vector,
    chain_to_vector,
    require_cycle,
)
from .errors import (
    AdiabaticThresholdError,
    MinimalTieError,
    NumericalError,
    StiffnessError,
)
from .forests import (
    BoltzmannFamily,
    ForestCatalog,
    KirchhoffOperator,
    build_catalog,
    minimal_cotree,
    minimal_tree,
    psi_L,
    sigma_T,
)
from .protocols import DrivingProtocol, SegmentDecomposition, WeightSystem, evaluate, evaluate_derivative, segment


@dataclass(frozen=True)
class BiasedOperators:
    """Dense matrices of the biased coboundary and the dynamical operator."""

    e_values: np.ndarray
    w_values: np.ndarray
    beta: float
    dstar: np.ndarray
    h: np.ndarray


class _ProtocolTable:
    """Protocol drivers aligned with the complex's cell order."""

    def __init__(self, c: CWComplex, p: DrivingProtocol):
        d = c.dimension
        try:
            self.e_drivers = [p.e_drivers[cell] for cell in c.cells[d - 1]]
            self.w_drivers = [p.w_drivers[cell] for cell in c.cells[d]]
        except KeyError as exc:
            raise NumericalError(f"protocol missing driver for cell {exc.args[0]!r}") from None
        self.tau_d = p.tau_d
        self.beta = p.beta
        self.bd = c.boundary_array(d)

    def e_at(self, t: float) -> np.ndarray:
        return np.array([drv.value_at(t) for drv in self.e_drivers])

    def w_at(self, t: float) -> np.ndarray:
        return np.array([drv.value_at(t) for drv in self.w_drivers])

    def e_dot_at(self, t: float) -> np.ndarray:
        return np.array([drv.derivative_at(t) for drv in self.e_drivers])

    def dstar_at(self, t: float) -> np.ndarray:
        e = np.exp(self.beta * self.e_at(t))
        w = np.exp(-self.beta * self.w_at(t))
        return (self.bd.T * e[None, :]) * w[:, None]

    def h_at(self, t: float) -> np.ndarray:
        return self.bd @ self.dstar_at(t)


def _weight_vectors(c: CWComplex, ws: WeightSystem) -> tuple[np.ndarray, np.ndarray]:
    d = c.dimension
    try:
        e = np.array([ws.E[cell] for cell in c.cells[d - 1]], dtype=float)
        w = np.array([ws.W[cell] for cell in c.cells[d]], dtype=float)
    except KeyError as exc:
        raise NumericalError(f"weight system missing cell {exc.args[0]!r}") from None
    return e, w


def build_operators(c: CWComplex, ws: WeightSystem, beta: float) -> BiasedOperators:
    """Assemble D* = e^{-beta W} d* e^{beta E} and H = d D* as dense matrices."""
    e, w = _weight_vectors(c, ws)
    bd = c.boundary_array(c.dimension)
    dstar = (bd.T * np.exp(beta * e)[None, :]) * np.exp(-beta * w)[:, None]
    return BiasedOperators(e, w, beta, dstar, bd @ dstar)


def boundary_basis(c: CWComplex) -> np.ndarray:
    """Integer basis of B_{d-1}: the leftmost independent columns of B_d."""
    bd = c.boundary_matrix(c.dimension)
    cols = exact.independent_columns(bd)
    n = c.n_cells(c.dimension - 1)
    return np.array([[bd[i][j] for j in cols] for i in range(n)], dtype=float)


def _pseudo_inverse_exact(zb: np.ndarray) -> np.ndarray:
    """(Z^T Z)^{-1} Z^T for an integer full-column-rank basis, exactly."""
    z = [[int(v) for v in row] for row in zb]
    zt = [list(col) for col in zip(*z)]
    gram = exact.mat_mul(zt, z)
    n = len(gram)
    aug = [[Fraction(gram[i][j]) for j in range(n)] + [Fraction(i == j) for j in range(n)] for i in range(n)]
    red, pivots = exact.row_reduce(aug)
    assert pivots == list(range(n)), "boundary basis must be independent"
    inv = [row[n:] for row in red]
    pseudo = exact.mat_mul(inv, zt)
    return np.array([[float(v) for v in row] for row in pseudo])


# ---------------------------------------------------------------------------
# Explicit adaptive Dormand-Prince 5(4)
# ---------------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_ERR = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)


def _dopri5(f, t0: float, t1: float, y0: np.ndarray, rtol: float, atol: float, max_steps: int):
    """Adaptive DP5(4) from t0 to t1; raises StiffnessError past the budget."""
    t = t0
    y = np.array(y0, dtype=float)
    span = t1 - t0
    if span <= 0:
        return y
    f0 = f(t, y)
    scale = atol + rtol * np.abs(y).max()
    h = min(span, 1e-2 * span, (scale / (np.abs(f0).max() + 1e-300)) ** 0.2)
    h = max(h, 1e-14 * span)
    steps = 0
    while t < t1:
        if steps > max_steps:
            raise StiffnessError(
                "step budget exceeded: the system is too stiff for explicit "
                "integration; raise the tolerances or reduce tau_D * beta"
            )
        steps += 1
        h = min(h, t1 - t)
        ks = [f0]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(_DP_A[i], ks))
            ks.append(f(t + _DP_C[i] * h, yi))
        y5 = y + h * sum(b * k for b, k in zip(_DP_B5, ks))
        err_vec = h * sum(e * k for e, k in zip(_DP_ERR, ks))
        tol = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = np.sqrt(np.mean((err_vec / tol) ** 2)) if y.size else 0.0
        if err <= 1.0:
            t += h
            y = y5
            f0 = ks[6]  # FSAL: stage 7 is f at (t + h, y5)
        factor = 0.9 * (err + 1e-16) ** -0.2
        h *= min(5.0, max(0.2, factor))
        if h < 1e-15 * span:
            raise StiffnessError(
                "step size underflow: the system is too stiff for explicit "
                "integration; raise the tolerances or reduce tau_D * beta"
            )
    return y


def evolve(
    c: CWComplex,
    p: DrivingProtocol,
    z_init: Chain,
    t0: float,
    t1: float,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    max_steps: int = 10**7,
) -> Chain:
    """Integrate the dynamical equation from t0 to t1 (explicit adaptive RK)."""
    if t1 < t0:
        raise NumericalError("evolve requires t0 <= t1")
    table = _ProtocolTable(c, p)
    y0 = np.array(
        [float(v) for v in chain_to_vector(z_init, c.cells[c.dimension - 1])]
    )

    def rhs(t, y):
        return -table.tau_d * (table.h_at(t) @ y)

    y = _dopri5(rhs, t0, t1, y0, rtol, atol, max_steps)
    return chain_from_vector(c.dimension - 1, "real", c.cells[c.dimension - 1], y)


def monodromy(
    c: CWComplex,
    p: DrivingProtocol,
    t0: float,
    t1: float,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    max_steps: int = 10**7,
) -> np.ndarray:
    """U(t1, t0) on C_{d-1}: all basis chains evolved simultaneously."""
    table = _ProtocolTable(c, p)
    n = c.n_cells(c.dimension - 1)

    def rhs(t, y):
        return -table.tau_d * (table.h_at(t) @ y)

    return _dopri5(rhs, t0, t1, np.eye(n), rtol, atol, max_steps)


def spectral_gap(c: CWComplex, p: DrivingProtocol, samples: int = 64) -> float:
    """min over t of the smallest eigenvalue of H(t) on boundaries, E(t)-metric."""
    zb = boundary_basis(c)
    if zb.shape[1] == 0:
        raise NumericalError("no boundary subspace: the spectral gap is undefined")
    table = _ProtocolTable(c, p)
    lam = math.inf
    for i in range(samples):
        t = i / samples
        e = table.e_at(t)
        w = table.w_at(t)
        half_e = np.exp(0.5 * p.beta * e)
        s = (table.bd * half_e[:, None]) * np.exp(-0.5 * p.beta * w)[None, :]
        m = s @ s.T
        q, _ = np.linalg.qr(half_e[:, None] * zb)
        lam = min(lam, float(np.linalg.eigvalsh(q.T @ m @ q)[0]))
    if lam <= 0:
        raise NumericalError(f"nonpositive spectral gap {lam:.3g}")
    return lam


# ---------------------------------------------------------------------------
# Periodic solution via slice-wise exact propagators
# ---------------------------------------------------------------------------


@dataclass
class PeriodicSolutionSamples:
    """The 1-periodic expectation on a uniform grid, plus diagnostics."""

    times: np.ndarray
    rho: np.ndarray
    rho_b: np.ndarray
    xi_coords: np.ndarray
    basis: np.ndarray
    residual: float
    gap: float
    tau_threshold: float
    threshold_ok: bool
    condition: float
    complex: CWComplex
    protocol: DrivingProtocol

    def at(self, t: float) -> np.ndarray:
        j = self._grid_index(t)
        return self.rho[j]

    def _grid_index(self, t: float) -> int:
        n = len(self.times) - 1
        j = round(t * n)
        if not math.isclose(self.times[min(j, n)], t, abs_tol=1e-12):
            raise NumericalError(f"t={t} is not on the solution grid")
        return min(j, n)


def _slice_maps(a: np.ndarray, h: float):
    """Propagator and forcing maps of one frozen slice (ETD2 coefficients).

    Returns (P, Phi0, Phi1) with P = exp(-h a),
    Phi0 = int_0^h exp(-(h-s) a) ds and Phi1 = int_0^h exp(-(h-s) a) s ds,
    so a linearly interpolated forcing g contributes
    Phi0 g(t_j) + (Phi1/h)(g(t_{j+1}) - g(t_j)).  Stiffly accurate: as
    h*a -> inf the step relaxes onto -a^{-1} g(t_{j+1}) at the node.
    """
    k = a.shape[0]
    if k == 1:
        x = float(a[0, 0])
        z = h * x
        if z < 1e-4:
            p = math.exp(-z)
            phi0 = h * (1 - z / 2 + z * z / 6 - z**3 / 24)
            phi1 = h * h * (0.5 - z / 6 + z * z / 24 - z**3 / 120)
        else:
            p = math.exp(-z) if z < 700 else 0.0
            phi0 = (1.0 - p) / x
            phi1 = h * h * (p - 1.0 + z) / (z * z)
        return np.array([[p]]), np.array([[phi0]]), np.array([[phi1]])
    aug = np.zeros((3 * k, 3 * k))
    aug[:k, :k] = -h * a
    aug[:k, k : 2 * k] = h * np.eye(k)
    aug[k : 2 * k, 2 * k :] = h * np.eye(k)
    full = expm(aug)
    return full[:k, :k], full[:k, k : 2 * k], full[:k, 2 * k :]


def _periodic_pass(
    table: _ProtocolTable,
    family: BoltzmannFamily,
    zb: np.ndarray,
    pinv: np.ndarray,
    n_slices: int,
):
    """One fixed-grid periodic solve; returns (times, xi coords, condition)."""
    tau = table.tau_d
    beta = table.beta
    k = zb.shape[1]
    cells = family.complex.cells[family.complex.dimension - 1]
    times = np.linspace(0.0, 1.0, n_slices + 1)
    h = 1.0 / n_slices

    props = []
    if k:
        g_nodes = np.empty((n_slices + 1, k))
        for j, t in enumerate(times):
            e_vals = dict(zip(cells, table.e_at(t)))
            e_dots = dict(zip(cells, table.e_dot_at(t)))
            g_nodes[j] = pinv @ family.rho_dot(e_vals, e_dots, beta)
        big = np.eye(k)
        force = np.zeros(k)
        for j in range(n_slices):
            tm = times[j] + 0.5 * h
            a = tau * (pinv @ (table.h_at(tm) @ zb))
            pmat, phi0, phi1 = _slice_maps(a, h)
            kick = phi0 @ g_nodes[j] + (phi1 / h) @ (g_nodes[j + 1] - g_nodes[j])
            props.append((pmat, kick))
            big = pmat @ big
            force = pmat @ force - kick
        lhs = np.eye(k) - big
        cond = float(np.linalg.cond(lhs))
        if not np.isfinite(cond) or cond > 1e12:
            raise AdiabaticThresholdError(
                "I - U(1,0) is numerically singular: tau_D is below the "
                "adiabatic threshold tau_0"
            )
        xi0 = np.linalg.solve(lhs, force)
        xi = np.empty((n_slices + 1, k))
        xi[0] = xi0
        for j, (pmat, kick) in enumerate(props):
            xi[j + 1] = pmat @ xi[j] - kick
    else:
        xi = np.zeros((n_slices + 1, 0))
        cond = 1.0
    return times, xi, cond


def _forcing_grid_floor(table: _ProtocolTable, grid_k: int, max_grid_k: int) -> int:
    """Grid exponent large enough to resolve the Boltzmann switching spikes.

    The co-tree weight softmax varies on the scale 1/(beta * |dE/dt| sums);
    require at least ~8 samples per spike width.
    """
    s_max = max(
        float(np.abs(table.e_dot_at(i / 64)).sum()) for i in range(64)
    )
    need = 8.0 * table.beta * max(s_max, 1.0)
    k = max(grid_k, int(math.ceil(math.log2(need))))
    return min(k, max_grid_k - 1)


def periodic_solution(
    c: CWComplex,
    p: DrivingProtocol,
    z0: Chain,
    grid_k: int = 10,
    max_grid_k: int = 17,
    ptol: float = 1e-6,
    catalog: ForestCatalog | None = None,
) -> PeriodicSolutionSamples:
    """The unique 1-periodic solution of the dynamical equation in [z0].

    Splits rho = rho^B + xi with xi in the boundary subspace, freezes the
    operator on dyadic slices (exponential midpoint rule) and solves the
    periodicity condition for xi(0).  The grid doubles until two passes
    agree within ptol.
    """
    require_cycle(c, z0)
    catalog = catalog or build_catalog(c)
    family = BoltzmannFamily(c, catalog, z0)
    table = _ProtocolTable(c, p)
    zb = boundary_basis(c)
    pinv = _pseudo_inverse_exact(zb) if zb.shape[1] else np.zeros((0, zb.shape[0]))

    n = 2 ** _forcing_grid_floor(table, grid_k, max_grid_k)
    times, xi, cond = _periodic_pass(table, family, zb, pinv, n)
    while True:
        times2, xi2, cond = _periodic_pass(table, family, zb, pinv, 2 * n)
        diff = float(np.abs(xi2[::2] - xi).max()) if xi.size else 0.0
        scale = 1.0 + (float(np.abs(xi2).max()) if xi2.size else 0.0)
        times, xi = times2, xi2
        n *= 2
        if diff <= ptol * scale or n >= 2**max_grid_k:
            if diff > ptol * scale:
                raise NumericalError(
                    f"periodic solve did not converge (last change {diff:.3g})"
                )
            break

    cells = c.cells[c.dimension - 1]
    rho_b = np.array(
        [family.rho(dict(zip(cells, table.e_at(t))), p.beta) for t in times]
    )
    rho = rho_b + xi @ zb.T
    residual = float(np.linalg.norm(rho[-1] - rho[0]))
    gap = spectral_gap(c, p) if zb.shape[1] else math.inf
    tau0 = 4.0 / gap if math.isfinite(gap) else 0.0
    return PeriodicSolutionSamples(
        times=times,
        rho=rho,
        rho_b=rho_b,
        xi_coords=xi,
        basis=zb,
        residual=residual,
        gap=gap,
        tau_threshold=tau0,
        threshold_ok=p.tau_d > tau0,
        condition=cond,
        complex=c,
        protocol=p,
    )


def current_density(
    c: CWComplex, p: DrivingProtocol, sol: PeriodicSolutionSamples, t: float
) -> Chain:
    """J(t) = tau_D D*(t) rho(t), evaluated on the boundary part of rho."""
    table = _ProtocolTable(c, p)
    j = sol._grid_index(t)
    vec = table.tau_d * (table.dstar_at(t) @ (sol.basis @ sol.xi_coords[j]))
    return chain_from_vector(c.dimension, "real", c.cells[c.dimension], vec)


def _current_table(sol: PeriodicSolutionSamples) -> np.ndarray:
    table = _ProtocolTable(sol.complex, sol.protocol)
    out = np.empty((len(sol.times), sol.complex.n_cells(sol.complex.dimension)))
    for i, t in enumerate(sol.times):
        out[i] = table.tau_d * (table.dstar_at(t) @ (sol.basis @ sol.xi_coords[i]))
    return out


def _simpson(values: np.ndarray, h: float) -> np.ndarray:
    n = len(values) - 1
    if n % 2:
        raise ValueError("Simpson quadrature needs an even slice count")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return (h / 3.0) * (w @ values)


@dataclass
class AverageCurrentResult:
    q: Chain
    boundary_residual: float
    times: np.ndarray
    density: np.ndarray
    solution: PeriodicSolutionSamples


def average_current(
    c: CWComplex,
    p: DrivingProtocol,
    z0: Chain,
    grid_k: int = 10,
    ptol: float = 1e-6,
    catalog: ForestCatalog | None = None,
) -> AverageCurrentResult:
    """Q = integral of J over one period (composite Simpson, Richardson-checked)."""
    sol = periodic_solution(c, p, z0, grid_k=grid_k, ptol=ptol, catalog=catalog)
    dens = _current_table(sol)
    h = sol.times[1] - sol.times[0]
    q = _simpson(dens, h)
    coarse = _simpson(dens[::2], 2 * h)
    if np.abs(q - coarse).max() > 1e-4 * (1.0 + np.abs(q).max()):
        raise NumericalError("quadrature not converged: raise grid_k")
    bd = c.boundary_array(c.dimension)
    residual = float(np.linalg.norm(bd @ q))
    chain = chain_from_vector(c.dimension, "real", c.cells[c.dimension], q)
    return AverageCurrentResult(chain, residual, sol.times, dens, sol)


def adiabatic_current(
    c: CWComplex,
    p: DrivingProtocol,
    z0: Chain,
    grid_k: int = 11,
    catalog: ForestCatalog | None = None,
) -> Chain:
    """Q^B: the tau_D -> infinity limit, integral of -A(rho_B') over a period."""
    require_cycle(c, z0)
    catalog = catalog or build_catalog(c)
    family = BoltzmannFamily(c, catalog, z0)
    kirchhoff = KirchhoffOperator(c, catalog)
    table = _ProtocolTable(c, p)
    cells = c.cells[c.dimension - 1]
    w_cells = c.cells[c.dimension]
    n = 2 ** _forcing_grid_floor(table, grid_k, 18)
    times = np.linspace(0.0, 1.0, n + 1)
    vals = np.empty((n + 1, c.n_cells(c.dimension)))
    for i, t in enumerate(times):
        e_vals = dict(zip(cells, table.e_at(t)))
        e_dots = dict(zip(cells, table.e_dot_at(t)))
        w_vals = dict(zip(w_cells, table.w_at(t)))
        rdot = family.rho_dot(e_vals, e_dots, p.beta)
        vals[i] = -(kirchhoff.matrix(w_vals, p.beta) @ rdot)
    q = _simpson(vals, times[1] - times[0])
    return chain_from_vector(c.dimension, "real", w_cells, q)


# ---------------------------------------------------------------------------
# Quantization
# ---------------------------------------------------------------------------


@dataclass
class SegmentLedgerEntry:
    t_start: float
    t_end: float
    type: str
    tree: tuple[str, ...] | None
    cotree_start: tuple[str, ...] | None
    cotree_end: tuple[str, ...] | None
    contribution: dict[str, Fraction]


@dataclass
class QuantizationResult:
    total: Chain
    delta: int
    segments: list[SegmentLedgerEntry]
    decomposition: SegmentDecomposition
    adiabatic: Chain
    numeric_distance: float


def _chain_sub(a: Chain, b: Chain) -> Chain:
    keys = set(a.coefficients) | set(b.coefficients)
    coeffs = {
        k: Fraction(a.coefficient(k)) - Fraction(b.coefficient(k)) for k in keys
    }
    return Chain(a.dimension, "rational", {k: v for k, v in coeffs.items() if v != 0})


def _split_v_segment(c, p, catalog, t0: float, t1: float, samples: int = 129):
    """Split a type-V segment wherever the minimal tree changes.

    Tree-sum ties can occur inside a W-injective stretch; each split point
    must have E injective so the minimal co-tree is well-defined there.
    """
    from .protocols import _tie  # same notion of exact tie as segmentation

    ts = np.linspace(t0, t1, samples)
    trees = [minimal_tree(catalog, evaluate(p, float(t)).W) for t in ts]
    pieces = []
    start = 0
    i = 1
    while i < samples:
        if trees[i].cells == trees[start].cells:
            i += 1
            continue
        cut = next(
            (
                j
                for j in (i, i - 1, i + 1, i - 2, i + 2)
                if start < j < samples - 1 and not _tie(evaluate(p, float(ts[j])).E)
            ),
            None,
        )
        if cut is None:
            raise MinimalTieError(
                f"minimal tree changes near t={ts[i]:.6g} where E is not "
                "one-to-one; cannot split the segment"
            )
        pieces.append((float(ts[start]), float(ts[cut]), trees[start]))
        start = cut
        i = cut + 1
    pieces.append((float(ts[start]), t1, trees[start]))
    return pieces


def quantized_current(
    c: CWComplex,
    p: DrivingProtocol,
    catalog: ForestCatalog | None = None,
    z0: Chain | None = None,
) -> QuantizationResult:
    """The exact low-temperature adiabatic current and its segment ledger.

    Type-U segments contribute nothing; a type-V segment [u, v] with minimal
    tree T contributes the exact rational chain sigma_T(psi_{L(u)} -
    psi_{L(v)})[z0], the beta -> infinity limit of the current integral under
    the J = tau_D D* rho convention.  Denominators divide delta.
    """
    if z0 is None:
        raise NumericalError("quantized_current requires an initial cycle z0")
    require_cycle(c, z0)
    catalog = catalog or build_catalog(c)
    dec = segment(p)
    z0_rat = Chain(z0.dimension, "rational", {k: Fraction(v) for k, v in z0.coefficients.items()})

    entries: list[SegmentLedgerEntry] = []
    total: dict[str, Fraction] = {}
    for t0, t1, kind in dec.segments():
        if kind == "U":
            entries.append(SegmentLedgerEntry(t0, t1, "U", None, None, None, {}))
            continue
        for u, v, tree in _split_v_segment(c, p, catalog, t0, t1):
            lu = minimal_cotree(catalog, evaluate(p, u).E)
            lv = minimal_cotree(catalog, evaluate(p, v).E)
            diff = _chain_sub(psi_L(c, lu, z0_rat), psi_L(c, lv, z0_rat))
            contrib = sigma_T(c, tree, diff)
            entries.append(
                SegmentLedgerEntry(
                    u, v, "V", tree.cells, lu.cells, lv.cells, dict(contrib.coefficients)
                )
            )
            for cell, val in contrib.coefficients.items():
                total[cell] = total.get(cell, Fraction(0)) + val

    total = {k: v for k, v in total.items() if v != 0}
    for val in total.values():
        if catalog.delta % val.denominator != 0:
            raise NumericalError(
                f"ledger denominator {val.denominator} does not divide delta={catalog.delta}"
            )
    total_chain = Chain(c.dimension, "rational", total)

    adiabatic = adiabatic_current(c, p, z0, catalog=catalog)
    dist = 0.0
    for cell in c.cells[c.dimension]:
        dist += abs(float(total_chain.coefficient(cell)) - adiabatic.coefficient(cell))
    return QuantizationResult(
        total=total_chain,
        delta=catalog.delta,
        segments=entries,
        decomposition=dec,
        adiabatic=adiabatic,
        numeric_distance=dist,
    )


def delta_invariant(catalog: ForestCatalog) -> int:
    return catalog.delta
