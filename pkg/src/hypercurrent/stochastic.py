"""The cycle-jump process: state graph exploration and trajectory sampling.

States are integer (d-1)-cycles homologous to the initial cycle z0; a
directed edge is a 4-tuple (alpha, f, atom, z) with <z,f> != 0 and
<da,f> != 0, and target z' = z - sign(atom) <z,f> da.  Every jump adds an
integer multiple of a boundary column, so homology to z0 is preserved
exactly by construction; each constructed state is verified to be a cycle
in exact integer arithmetic.

Trajectories are sampled by Ogata thinning: per residence window the total
exit rate is bounded by a grid maximum times a safety factor, proposal
times are exponential at the bound, and proposals are accepted with the
ratio of the true rate to the bound.  The bound is verified at every
proposal; a violation inflates it and warns, so the sampler is never
silently biased.
"""

from __future__ import annotations

import math
import warnings
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .complexes import CWComplex, Chain, chain_to_vector
from .errors import NotACycleError
from .protocols import DrivingProtocol

WINDOWS_PER_PERIOD = 64
BOUND_GRID_PER_WINDOW = 8
BOUND_SAFETY = 1.05


@dataclass(frozen=True)
class StateNode:
    """An integer cycle state; norm is the l1 coefficient norm."""

    cycle: Chain
    norm: int

    @property
    def key(self):
        return tuple(sorted(self.cycle.coefficients.items()))


def _make_state(c: CWComplex, vec: Sequence[int]) -> StateNode:
    d = c.dimension
    bd = c.boundary[d - 2] if d >= 2 else None
    if bd is not None:
        for i in range(c.n_cells(d - 2)):
            if sum(bd[i][j] * vec[j] for j in range(len(vec))) != 0:
                raise NotACycleError("state chain is not a cycle")
    coeffs = {cell: int(v) for cell, v in zip(c.cells[d - 1], vec) if v}
    chain = Chain(d - 1, "integer", coeffs)
    return StateNode(chain, int(sum(abs(v) for v in vec)))


@dataclass(frozen=True)
class TransitionEdge:
    alpha: str
    f: str
    atom_index: int
    source: StateNode
    target: StateNode


@dataclass
class Trajectory:
    states: list[StateNode]
    edges: list[TransitionEdge]
    jump_times: list[float]
    seed: int
    stream: int = 0
    t_end: float = 1.0
    truncated: bool = False

    def state_at(self, t: float) -> StateNode:
        return self.states[bisect_right(self.jump_times, t)]


def _state_vector(c: CWComplex, node: StateNode) -> list[int]:
    return [int(v) for v in chain_to_vector(node.cycle, c.cells[c.dimension - 1])]


def neighbors(c: CWComplex, z: StateNode) -> list[TransitionEdge]:
    """All admissible transitions out of z, one edge per atom, in (f, alpha,
    atom) order."""
    d = c.dimension
    vec = _state_vector(c, z)
    bd = c.boundary[d - 1]
    out = []
    for j, face in enumerate(c.cells[d - 1]):
        zf = vec[j]
        if zf == 0:
            continue
        for a, alpha in enumerate(c.cells[d]):
            if bd[j][a] == 0:
                continue
            col = [bd[i][a] for i in range(len(vec))]
            for atom_index, sign in enumerate(c.atom_signs(alpha, face)):
                tvec = [v - sign * zf * col[i] for i, v in enumerate(vec)]
                target = _make_state(c, tvec)
                out.append(TransitionEdge(alpha, face, atom_index, z, target))
    return out


@dataclass
class ExploredGraph:
    nodes: list[StateNode]
    edges: list[TransitionEdge]
    truncated: bool = False

    def node_keys(self):
        return {n.key for n in self.nodes}


def explore(
    c: CWComplex, z0: Chain, max_states: int = 1000, max_norm: float = 50
) -> ExploredGraph:
    """Breadth-first closure of the transition relation from z0."""
    root = _make_state(c, [int(v) for v in chain_to_vector(z0, c.cells[c.dimension - 1])])
    seen = {root.key: root}
    order = [root]
    edges: list[TransitionEdge] = []
    queue = [root]
    truncated = False
    while queue:
        node = queue.pop(0)
        for edge in neighbors(c, node):
            if edge.target.norm > max_norm:
                truncated = True
                continue
            edges.append(edge)
            key = edge.target.key
            if key not in seen:
                if len(seen) >= max_states:
                    truncated = True
                    continue
                seen[key] = edge.target
                order.append(edge.target)
                queue.append(edge.target)
    return ExploredGraph(order, edges, truncated)


class _RateOracle:
    """Tabulated per-pair rates and per-window bounds for thinning.

    Rates depend only on the (alpha, f) pair; a state enters through the
    multiset of admissible pairs.  The bound for a window is the tabulated
    maximum of the state's total rate over the window grid times a safety
    factor.
    """

    def __init__(self, c: CWComplex, p: DrivingProtocol):
        self.tau_d = p.tau_d
        self.beta = p.beta
        d = c.dimension
        self.pairs = []
        self.pair_index = {}
        for face in c.cells[d - 1]:
            for alpha in c.cells[d]:
                if c.incidence(d, alpha, face) != 0:
                    self.pair_index[(alpha, face)] = len(self.pairs)
                    self.pairs.append((alpha, face))
        self._e = {cell: p.e_drivers[cell] for cell in c.cells[d - 1]}
        self._w = {cell: p.w_drivers[cell] for cell in c.cells[d]}
        n_grid = WINDOWS_PER_PERIOD * BOUND_GRID_PER_WINDOW
        ts = np.arange(n_grid + 1) / n_grid
        self.grid = np.array([[self._rate(pair, t) for t in ts] for pair in self.pairs])
        self.n_grid = n_grid

    def _rate(self, pair, t: float) -> float:
        alpha, face = pair
        return math.exp(
            self.beta * (self._e[face].value_at(t) - self._w[alpha].value_at(t))
        )

    def rate_of(self, pair, t: float) -> float:
        return self.tau_d * self._rate(pair, t % 1.0)

    def window_bound(self, mult: np.ndarray, window: int) -> float:
        lo = (window % WINDOWS_PER_PERIOD) * BOUND_GRID_PER_WINDOW
        hi = lo + BOUND_GRID_PER_WINDOW
        totals = mult @ self.grid[:, lo : hi + 1]
        return self.tau_d * float(totals.max()) * BOUND_SAFETY


def _edge_profile(oracle: _RateOracle, edges: list[TransitionEdge]):
    mult = np.zeros(len(oracle.pairs))
    for e in edges:
        mult[oracle.pair_index[(e.alpha, e.f)]] += 1.0
    return mult


def simulate(
    c: CWComplex,
    p: DrivingProtocol,
    z0: Chain,
    t_end: float,
    seed: int,
    max_norm: float = 50,
    stream: int = 0,
    _oracle: _RateOracle | None = None,
) -> Trajectory:
    """Sample one trajectory of the process on [0, t_end] by Ogata thinning.

    Deterministic given (seed, stream); the RNG is counter-based (Philox)
    keyed by exactly that pair, so ensembles are reproducible in any order.
    If a jump would exceed max_norm the trajectory stops and is flagged
    truncated.
    """
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))
    )
    oracle = _oracle or _RateOracle(c, p)
    root = _make_state(c, [int(v) for v in chain_to_vector(z0, c.cells[c.dimension - 1])])
    traj = Trajectory([root], [], [], seed, stream, t_end, False)
    state = root
    edges = neighbors(c, state)
    mult = _edge_profile(oracle, edges)
    t = 0.0
    eps = 1e-12
    safety_extra = 1.0
    while t < t_end and edges:
        window = int(t * WINDOWS_PER_PERIOD + eps)
        w_end = min((window + 1) / WINDOWS_PER_PERIOD, t_end)
        bound = oracle.window_bound(mult, window) * safety_extra
        if bound <= 0.0:
            t = w_end
            continue
        s = t
        while True:
            s += rng.exponential(1.0 / bound)
            if s >= w_end:
                t = w_end
                break
            total = sum(oracle.rate_of((e.alpha, e.f), s) for e in edges)
            if total > bound:
                warnings.warn(
                    "thinning bound violated; inflating the safety factor",
                    stacklevel=2,
                )
                safety_extra *= 1.5
                bound *= 1.5
            if rng.uniform() * bound <= total:
                pick = rng.uniform() * total
                acc = 0.0
                chosen = edges[-1]
                for e in edges:
                    acc += oracle.rate_of((e.alpha, e.f), s)
                    if pick <= acc:
                        chosen = e
                        break
                traj.states.append(chosen.target)
                traj.edges.append(chosen)
                traj.jump_times.append(s)
                t = s
                state = chosen.target
                if state.norm > max_norm:
                    traj.truncated = True
                    return traj
                edges = neighbors(c, state)
                mult = _edge_profile(oracle, edges)
                break
    return traj


def simulate_ensemble(
    c: CWComplex,
    p: DrivingProtocol,
    z0: Chain,
    t_end: float,
    n_traj: int,
    seed: int,
    max_norm: float = 50,
) -> list[Trajectory]:
    """n_traj independent trajectories with per-index RNG streams."""
    oracle = _RateOracle(c, p)
    return [
        simulate(c, p, z0, t_end, seed, max_norm, stream=i, _oracle=oracle)
        for i in range(n_traj)
    ]


@dataclass
class EnsembleMoments:
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_used: int
    n_excluded: int

    @property
    def exclusion_fraction(self) -> float:
        total = self.n_used + self.n_excluded
        return self.n_excluded / total if total else 0.0


def empirical_expectation(
    c: CWComplex, trajectories: Sequence[Trajectory], t_grid: Sequence[float]
) -> EnsembleMoments:
    """Coefficientwise sample mean and standard error of the state cycle.

    Truncated trajectories are excluded and counted.
    """
    cells = c.cells[c.dimension - 1]
    times = np.asarray(t_grid, dtype=float)
    used = [tr for tr in trajectories if not tr.truncated]
    n = len(used)
    total = np.zeros((len(times), len(cells)))
    total_sq = np.zeros_like(total)
    for tr in used:
        for i, t in enumerate(times):
            vec = np.array(_state_vector(c, tr.state_at(t)), dtype=float)
            total[i] += vec
            total_sq[i] += vec * vec
    if n == 0:
        return EnsembleMoments(times, total, np.zeros_like(total), 0, len(trajectories))
    mean = total / n
    var = (total_sq - n * mean * mean) / max(n - 1, 1)
    stderr = np.sqrt(np.maximum(var, 0.0) / n)
    return EnsembleMoments(times, mean, stderr, n, len(trajectories) - n)
