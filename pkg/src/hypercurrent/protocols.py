"""Weight systems and smooth 1-periodic driving protocols.

A weight system assigns a real label to every (d-1)-cell (the E side) and
every d-cell (the W side).  A driving protocol is a 1-periodic family of
weight systems together with the driving time tau_D and inverse temperature
beta.  Per-cell drivers are either closed-form sinusoids (exactly periodic,
exactly differentiable) or periodic cubic Hermite splines through uniform
samples.

Parameter points are *good* when E or W is one-to-one; segmentation splits
the period into type-U pieces (E injective throughout) and type-V pieces
(W injective throughout, E injective at the endpoints).  Because the tie
locus is measure zero, ties are detected through ordering changes between
consecutive samples rather than pointwise equality at samples.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Mapping

from .errors import BadParameterError, ProtocolError

NEAR_TIE_GAP = 1e-12
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ConstantDriver:
    value: float

    def value_at(self, t: float) -> float:
        return self.value

    def derivative_at(self, t: float) -> float:
        return 0.0

    def negated(self) -> "ConstantDriver":
        return ConstantDriver(-self.value)

    def to_json(self) -> dict:
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class SinDriver:
    """offset + amplitude * sin(2 pi (t + phase)); exactly 1-periodic."""

    offset: float
    amplitude: float
    phase: float = 0.0

    def value_at(self, t: float) -> float:
        return self.offset + self.amplitude * math.sin(TWO_PI * (t % 1.0 + self.phase))

    def derivative_at(self, t: float) -> float:
        return self.amplitude * TWO_PI * math.cos(TWO_PI * (t % 1.0 + self.phase))

    def negated(self) -> "SinDriver":
        return SinDriver(-self.offset, -self.amplitude, self.phase)

    def to_json(self) -> dict:
        return {
            "kind": "builtin-sin",
            "offset": self.offset,
            "amplitude": self.amplitude,
            "phase": self.phase,
        }


@dataclass(frozen=True)
class SplineDriver:
    """Periodic cubic Hermite spline through uniformly spaced samples.

    samples[i] is the value at t = i/m (m = len(samples)); the curve wraps
    around so values and slopes match at the seam.  Slopes come from
    centered differences, which keeps the interpolant C^1 and periodic.
    """

    samples: tuple[float, ...]

    def __post_init__(self):
        if len(self.samples) < 3:
            raise ProtocolError("spline drivers need at least 3 samples")

    def _slopes(self) -> tuple[float, ...]:
        m = len(self.samples)
        return tuple(
            (self.samples[(i + 1) % m] - self.samples[(i - 1) % m]) * m / 2.0
            for i in range(m)
        )

    def _locate(self, t: float):
        m = len(self.samples)
        u = (t % 1.0) * m
        j = min(int(u), m - 1)
        return j, u - j

    def value_at(self, t: float) -> float:
        m = len(self.samples)
        j, x = self._locate(t)
        s = self._slopes()
        y0, y1 = self.samples[j], self.samples[(j + 1) % m]
        s0, s1 = s[j] / m, s[(j + 1) % m] / m
        h00 = (1 + 2 * x) * (1 - x) ** 2
        h10 = x * (1 - x) ** 2
        h01 = x * x * (3 - 2 * x)
        h11 = x * x * (x - 1)
        return h00 * y0 + h10 * s0 + h01 * y1 + h11 * s1

    def derivative_at(self, t: float) -> float:
        m = len(self.samples)
        j, x = self._locate(t)
        s = self._slopes()
        y0, y1 = self.samples[j], self.samples[(j + 1) % m]
        s0, s1 = s[j] / m, s[(j + 1) % m] / m
        dh00 = 6 * x * x - 6 * x
        dh10 = 3 * x * x - 4 * x + 1
        dh01 = -6 * x * x + 6 * x
        dh11 = 3 * x * x - 2 * x
        return (dh00 * y0 + dh10 * s0 + dh01 * y1 + dh11 * s1) * m

    def negated(self) -> "SplineDriver":
        return SplineDriver(tuple(-v for v in self.samples))

    def to_json(self) -> dict:
        return {"kind": "spline", "samples": list(self.samples)}


Driver = ConstantDriver | SinDriver | SplineDriver


@dataclass(frozen=True)
class WeightSystem:
    """Static labels: E on the (d-1)-cells, W on the d-cells."""

    E: Mapping[str, float]
    W: Mapping[str, float]


@dataclass(frozen=True)
class DrivingProtocol:
    tau_d: float
    beta: float
    e_drivers: Mapping[str, Driver]
    w_drivers: Mapping[str, Driver]

    def __post_init__(self):
        if self.tau_d <= 0:
            raise ProtocolError("tau_D must be positive")
        if self.beta <= 0:
            raise ProtocolError("beta must be positive")

    def with_overrides(self, tau_d: float | None = None, beta: float | None = None):
        out = self
        if tau_d is not None:
            out = replace(out, tau_d=tau_d)
        if beta is not None:
            out = replace(out, beta=beta)
        return out


def constant_protocol(
    e_values: Mapping[str, float],
    w_values: Mapping[str, float],
    tau_d: float,
    beta: float,
) -> DrivingProtocol:
    return DrivingProtocol(
        tau_d=tau_d,
        beta=beta,
        e_drivers={c: ConstantDriver(v) for c, v in e_values.items()},
        w_drivers={c: ConstantDriver(v) for c, v in w_values.items()},
    )


def evaluate(p: DrivingProtocol, t: float) -> WeightSystem:
    return WeightSystem(
        E={c: d.value_at(t) for c, d in p.e_drivers.items()},
        W={c: d.value_at(t) for c, d in p.w_drivers.items()},
    )


def evaluate_derivative(p: DrivingProtocol, t: float) -> WeightSystem:
    """Componentwise time derivatives, packaged like a weight system."""
    return WeightSystem(
        E={c: d.derivative_at(t) for c, d in p.e_drivers.items()},
        W={c: d.derivative_at(t) for c, d in p.w_drivers.items()},
    )


def _injective(values: Mapping[str, float], warn_label: str | None = None) -> bool:
    vals = sorted(values.values())
    for lo, hi in zip(vals, vals[1:]):
        if lo == hi:
            return False
        if warn_label and hi - lo < NEAR_TIE_GAP:
            warnings.warn(
                f"{warn_label} values nearly tie (gap {hi - lo:.3g}); "
                "goodness is borderline",
                stacklevel=3,
            )
    return True


def classify_point(ws: WeightSystem) -> set[str]:
    """Subset of {'U', 'V'}: U iff E is injective, V iff W is injective."""
    out = set()
    if _injective(ws.E, "E"):
        out.add("U")
    if _injective(ws.W, "W"):
        out.add("V")
    return out


@dataclass(frozen=True)
class SegmentDecomposition:
    """Breakpoints 0 = t_0 <= ... <= t_n = 1 with a U/V tag per segment."""

    breakpoints: tuple[float, ...]
    types: tuple[str, ...]

    def __post_init__(self):
        if len(self.breakpoints) != len(self.types) + 1:
            raise ValueError("breakpoints/types length mismatch")

    def segments(self):
        return list(zip(self.breakpoints, self.breakpoints[1:], self.types))


def _ranking(values: Mapping[str, float]) -> tuple[str, ...]:
    return tuple(sorted(values, key=lambda c: (values[c], c)))


def _tie(values: Mapping[str, float]) -> bool:
    vals = list(values.values())
    return len(set(vals)) < len(vals)


def _zones(resolution: int, p: DrivingProtocol):
    """Sample the period and locate intervals that force a segment type.

    Returns (need, samples) where need[i] in {None, 'U', 'V'} marks the gap
    (t_i, t_{i+1}):  'V' where the E-ordering changes (E fails injectivity
    inside), 'U' where the W-ordering changes.  Raises on bad points and on
    gaps where both orderings change (unresolvable at this resolution).
    """
    ts = [i / resolution for i in range(resolution + 1)]
    systems = [evaluate(p, t) for t in ts]
    e_tie = [_tie(ws.E) for ws in systems]
    w_tie = [_tie(ws.W) for ws in systems]
    for t, et, wt in zip(ts, e_tie, w_tie):
        if et and wt:
            raise BadParameterError(
                f"bad parameter point at t={t}: neither E nor W is one-to-one"
            )
    rank_e = [_ranking(ws.E) for ws in systems]
    rank_w = [_ranking(ws.W) for ws in systems]

    need: list[str | None] = [None] * resolution
    conflict: list[int] = []
    for i in range(resolution):
        v_gap = rank_e[i] != rank_e[i + 1] or e_tie[i] or e_tie[i + 1]
        u_gap = rank_w[i] != rank_w[i + 1] or w_tie[i] or w_tie[i + 1]
        if v_gap and u_gap:
            conflict.append(i)
        elif v_gap:
            need[i] = "V"
        elif u_gap:
            need[i] = "U"
    return need, ts, conflict


def segment(p: DrivingProtocol, resolution: int | None = None) -> SegmentDecomposition:
    """Decompose the period into type-U / type-V segments.

    The sample grid doubles from 2^6 to 2^14 until the type sequence is
    stable (or runs once at the given resolution).  Contiguous same-type
    pieces are amalgamated; each breakpoint is placed at a sample where both
    orderings are locally constant.
    """
    if resolution is not None:
        return _segment_at(p, resolution)
    prev = None
    for k in range(6, 15):
        try:
            dec = _segment_at(p, 2**k)
        except _Unresolved:
            prev = None
            continue
        if prev is not None and prev.types == dec.types:
            return dec
        prev = dec
    if prev is not None:
        return prev
    raise BadParameterError(
        "segmentation did not stabilize: a sample gap keeps requiring both "
        "an E-injective and a W-injective cover"
    )


class _Unresolved(Exception):
    pass


def _segment_at(p: DrivingProtocol, resolution: int) -> SegmentDecomposition:
    need, ts, conflict = _zones(resolution, p)
    if conflict:
        if resolution >= 2**14:
            t_bad = (ts[conflict[0]] + ts[conflict[0] + 1]) / 2
            raise BadParameterError(
                f"bad parameter region near t={t_bad:.6g}: both orderings change"
            )
        raise _Unresolved

    # Collapse marked gaps into zones [start, end) of equal type.
    zones: list[tuple[int, int, str]] = []
    for i, kind in enumerate(need):
        if kind is None:
            continue
        if zones and zones[-1][2] == kind and zones[-1][1] == i:
            zones[-1] = (zones[-1][0], i + 1, kind)
        else:
            zones.append((i, i + 1, kind))

    if not zones:
        ws = evaluate(p, 0.0)
        kind = "U" if _injective(ws.E) else "V"
        return SegmentDecomposition((0.0, 1.0), (kind,))

    # Merge consecutive same-type zones, then place one breakpoint between
    # each pair of different-type neighbours, at a quiet sample in the gap.
    merged: list[tuple[int, int, str]] = []
    for z in zones:
        if merged and merged[-1][2] == z[2]:
            merged[-1] = (merged[-1][0], z[1], z[2])
        else:
            merged.append(z)

    breakpoints = [0.0]
    types = []
    for (_, e0, k0), (s1, _, _) in zip(merged, merged[1:]):
        cut = (e0 + s1) // 2
        cut = _shift_to_quiet(p, ts, cut, e0, s1)
        breakpoints.append(ts[cut])
        types.append(k0)
    breakpoints.append(1.0)
    types.append(merged[-1][2])
    return SegmentDecomposition(tuple(breakpoints), tuple(types))


def _shift_to_quiet(p: DrivingProtocol, ts, cut: int, lo: int, hi: int) -> int:
    """Move a cut index to a sample where E and W are both injective."""
    order = sorted(range(lo, hi + 1), key=lambda i: (abs(i - cut), i))
    for i in order:
        ws = evaluate(p, ts[i])
        if not _tie(ws.E) and not _tie(ws.W):
            return i
    raise BadParameterError(
        f"no good breakpoint available between t={ts[lo]} and t={ts[hi]}"
    )
