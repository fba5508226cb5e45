"""Command-line entry point.

    hypercurrent <subcommand> [--example NAME | --complex FILE]
                 [--protocol FILE] [--tau-d R] [--beta R] [--seed N]
                 [--out DIR] ...

Subcommands: example, validate, homology, forests, boltzmann, expect,
simulate, current, quantize.  Exit code 0 on success, 1 on data/validation
failure, 2 on numerical-regime failure (adiabatic threshold, weight tie,
stiffness budget).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__, io
from .complexes import Chain, homology, skeleton, validate_complex
from .dynamics import (
    adiabatic_current,
    average_current,
    periodic_solution,
    quantized_current,
)
from .errors import DataError, NumericalError
from .forests import build_catalog, minimal_cotree, minimal_tree
from .library import default_initial_cycle, example
from .protocols import evaluate
from .stochastic import empirical_expectation, simulate_ensemble


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypercurrent",
        description="Markov CW chains: forests, expectation dynamics, currents",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, protocol=False, z0=False, seedy=False):
        p.add_argument("--example", help="built-in complex name")
        p.add_argument("--complex", dest="complex_file", help="complex JSON file")
        p.add_argument("--skeleton", type=int, default=None, help="truncate to the k-skeleton")
        p.add_argument("--out", help="output directory for result files")
        if protocol:
            p.add_argument("--protocol", help="protocol JSON file")
            p.add_argument("--tau-d", type=float, default=None, help="driving time override")
            p.add_argument("--beta", type=float, default=None, help="inverse temperature override")
        if z0:
            p.add_argument("--z0", help="initial cycle, e.g. 'f1:1,f2:-1'")
        if seedy:
            p.add_argument("--seed", type=int, default=0)
        return p

    p = sub.add_parser("example", help="emit a built-in complex (and protocol)")
    p.add_argument("name")
    p.add_argument("--dump", action="store_true", help="print canonical complex JSON")
    p.add_argument("--out", help="output directory")

    add_common(sub.add_parser("validate", help="check the chain-complex axioms"))
    hp = add_common(sub.add_parser("homology", help="integral homology summary"))
    hp.add_argument("-k", type=int, default=None, help="single dimension")
    hp.add_argument("--relative", help="comma-separated subcomplex cell ids")

    fp = add_common(sub.add_parser("forests", help="spanning trees and co-trees"))
    fp.add_argument("--weights", help="static weights JSON file")
    fp.add_argument("--weights-beta", type=float, default=1.0)

    add_common(sub.add_parser("boltzmann", help="harmonic cycle over one period"), protocol=True, z0=True)
    ep = add_common(sub.add_parser("expect", help="periodic expectation samples"), protocol=True, z0=True)
    ep.add_argument("--grid-k", type=int, default=10)

    sp = add_common(sub.add_parser("simulate", help="trajectory ensemble moments"), protocol=True, z0=True, seedy=True)
    sp.add_argument("--n-traj", type=int, default=1000)
    sp.add_argument("--t-end", type=float, default=1.0)
    sp.add_argument("--max-norm", type=float, default=50.0)
    sp.add_argument("--grid", type=int, default=17, help="number of report times")

    cp = add_common(sub.add_parser("current", help="average current over one period"), protocol=True, z0=True)
    cp.add_argument("--grid-k", type=int, default=10)

    add_common(sub.add_parser("quantize", help="exact low-temperature adiabatic current"), protocol=True, z0=True)
    return parser


def _resolve_complex(args):
    if getattr(args, "example", None) and getattr(args, "complex_file", None):
        raise DataError("give either --example or --complex, not both")
    protocol = None
    if getattr(args, "example", None):
        c, protocol = example(args.example)
    elif getattr(args, "complex_file", None):
        c = io.load_complex(args.complex_file)
    else:
        raise DataError("no complex given; use --example NAME or --complex FILE")
    if getattr(args, "skeleton", None) is not None:
        c = skeleton(c, args.skeleton)
        protocol = None
    return c, protocol


def _resolve_protocol(args, c, builtin):
    p = builtin
    if getattr(args, "protocol", None):
        p = io.load_protocol(args.protocol, c)
    if p is None:
        raise DataError("no protocol available; use --protocol FILE")
    return p.with_overrides(getattr(args, "tau_d", None), getattr(args, "beta", None))


def _resolve_z0(args, c):
    if getattr(args, "z0", None):
        return io.parse_cycle(args.z0, c, c.dimension - 1)
    return default_initial_cycle(c)


class _Run:
    """Collects inputs, warnings and outputs; writes the manifest."""

    def __init__(self, args):
        self.args = args
        self.t0 = time.time()
        self.inputs: dict[str, str] = {}
        self.outdir = Path(args.out) if getattr(args, "out", None) else None
        if self.outdir:
            self.outdir.mkdir(parents=True, exist_ok=True)
        self._catcher = warnings.catch_warnings(record=True)
        self._caught = self._catcher.__enter__()
        warnings.simplefilter("always")

    def note_input(self, label: str, text: str):
        self.inputs[label] = io.sha256_of(text)

    def manifest(self) -> dict:
        caught = [str(w.message) for w in self._caught]
        self._catcher.__exit__(None, None, None)
        for msg in caught:
            print(f"warning: {msg}", file=sys.stderr)
        flags = {
            k: v
            for k, v in vars(self.args).items()
            if k not in ("command",) and v is not None
        }
        return {
            "tool": "hypercurrent",
            "version": __version__,
            "subcommand": self.args.command,
            "flags": {k: str(v) for k, v in flags.items()},
            "inputs": self.inputs,
            "elapsed_s": round(time.time() - self.t0, 6),
            "warnings": caught,
        }

    def emit(self, result: dict, csv_name: str | None = None, csv_text: str | None = None) -> int:
        manifest = self.manifest()
        man_text = io.canonical_json(manifest)
        man_sha = io.sha256_of(man_text)
        result = dict(result)
        result["manifest_sha256"] = man_sha
        if self.outdir:
            (self.outdir / "manifest.json").write_text(man_text + "\n", encoding="utf-8")
            (self.outdir / "result.json").write_text(
                json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            if csv_name and csv_text is not None:
                header = f"# manifest: {man_sha}\n"
                (self.outdir / csv_name).write_text(header + csv_text, encoding="utf-8")
        else:
            result["manifest"] = manifest
        print(json.dumps(result, indent=2, sort_keys=True))
        if csv_text is not None and not self.outdir:
            print(csv_text, end="")
        return 0


def _csv_table(times, rows, cells) -> str:
    lines = ["t," + ",".join(cells)]
    for t, row in zip(times, rows):
        lines.append(io.fmt_float(t) + "," + ",".join(io.fmt_float(v) for v in row))
    return "\n".join(lines) + "\n"


def _cmd_example(args) -> int:
    c, protocol = example(args.name)
    payload = io.complex_to_dict(c)
    if args.dump or not args.out:
        print(io.canonical_json(payload))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{c.name}.complex.json").write_text(
            io.canonical_json(payload) + "\n", encoding="utf-8"
        )
        if protocol is not None:
            (out / f"{c.name}.protocol.json").write_text(
                io.canonical_json(io.protocol_to_dict(protocol)) + "\n", encoding="utf-8"
            )
    return 0


def _cmd_validate(args) -> int:
    run = _Run(args)
    c, _ = _resolve_complex(args)
    run.note_input("complex", io.canonical_json(io.complex_to_dict(c)))
    violations = validate_complex(c)
    run.emit({"complex": c.name, "violations": violations, "valid": not violations})
    return 0 if not violations else 1


def _cmd_homology(args) -> int:
    run = _Run(args)
    c, _ = _resolve_complex(args)
    run.note_input("complex", io.canonical_json(io.complex_to_dict(c)))
    relative = args.relative.split(",") if args.relative else None
    dims = [args.k] if args.k is not None else list(range(c.dimension + 1))
    table = {}
    for k in dims:
        h = homology(c, k, relative_to=relative)
        table[str(k)] = {
            "betti": h.betti,
            "torsion_factors": list(h.torsion_factors),
            "torsion_order": h.torsion_order,
        }
    return run.emit({"complex": c.name, "relative_to": relative, "homology": table})


def _cmd_forests(args) -> int:
    run = _Run(args)
    c, _ = _resolve_complex(args)
    run.note_input("complex", io.canonical_json(io.complex_to_dict(c)))
    catalog = build_catalog(c)
    result = {
        "complex": c.name,
        "dimension": c.dimension,
        "trees": [{"cells": list(t.cells), "theta": t.theta} for t in catalog.trees],
        "cotrees": [{"cells": list(l.cells), "a": l.a} for l in catalog.cotrees],
        "n_trees": len(catalog.trees),
        "n_cotrees": len(catalog.cotrees),
        "delta": catalog.delta,
    }
    if args.weights:
        ws = io.load_weights(args.weights, c)
        beta = args.weights_beta
        for entry, tree in zip(result["trees"], catalog.trees):
            s = sum(ws.W[cell] for cell in tree.cells)
            entry["w_log"] = 2 * np.log(tree.theta) - beta * s
        for entry, cot in zip(result["cotrees"], catalog.cotrees):
            s = sum(ws.E[cell] for cell in cot.cells)
            entry["b_log"] = 2 * np.log(cot.a) - beta * s
        result["minimal_tree"] = list(minimal_tree(catalog, ws.W).cells)
        result["minimal_cotree"] = list(minimal_cotree(catalog, ws.E).cells)
    return run.emit(result)


def _cmd_boltzmann(args) -> int:
    run = _Run(args)
    c, builtin = _resolve_complex(args)
    p = _resolve_protocol(args, c, builtin)
    z0 = _resolve_z0(args, c)
    run.note_input("complex", io.canonical_json(io.complex_to_dict(c)))
    run.note_input("protocol", io.canonical_json(io.protocol_to_dict(p)))
    from .forests import BoltzmannFamily

    catalog = build_catalog(c)
    fam = BoltzmannFamily(c, catalog, z0)
    cells = c.cells[c.dimension - 1]
    times = np.linspace(0.0, 1.0, 257)
    rows = []
    residual = 0.0
    bd = c.boundary_array(c.dimension)
    for t in times:
        ws = evaluate(p, float(t))
        rho = fam.rho(ws.E, p.beta)
        rows.append(rho)
        e = np.exp(p.beta * np.array([ws.E[x] for x in cells]))
        residual = max(residual, float(np.abs(bd.T @ (e * rho)).max()))
    csv = _csv_table(times, rows, cells)
    return run.emit(
        {"complex": c.name, "beta": p.beta, "max_harmonic_residual": residual},
        "boltzmann.csv",
        csv,
    )


def _cmd_expect(args) -> int:
    run = _Run(args)
    c, builtin = _resolve_complex(args)
    p = _resolve_protocol(args, c, builtin)
    z0 = _resolve_z0(args, c)
    run.note_input("complex", io.canonical_json(io.complex_to_dict(c)))
    run.note_input("protocol", io.canonical_json(io.protocol_to_dict(p)))
    sol = periodic_solution(c, p, z0, grid_k=args.grid_k)
    cells = c.cells[c.dimension - 1]
    csv = _csv_table(sol.times, sol.rho, cells)
    return run.emit(
        {
            "complex": c.name,
            "tau_d": p.tau_d,
            "beta": p.beta,
            "periodicity_residual": sol.residual,
            "spectral_gap": sol.gap,
            "tau_threshold": sol.tau_threshold,
            "threshold_ok": sol.threshold_ok,
            "condition": sol.condition,
        },
        "expect.csv",
        csv,
    )


def _cmd_simulate(args) -> int:
    run = _Run(args)
    c, builtin = _resolve_complex(args)
    p = _resolve_protocol(args, c, builtin)
    z0 = _resolve_z0(args, c)
    proto_text = io.canonical_json(io.protocol_to_dict(p))
    run.note_input("complex", io.canonical_json(io.complex_to_dict(c)))
    run.note_input("protocol", proto_text)
    trajectories = simulate_ensemble(
        c, p, z0, args.t_end, args.n_traj, args.seed, args.max_norm
    )
    grid = np.linspace(0.0, args.t_end, args.grid)
    moments = empirical_expectation(c, trajectories, grid)
    cells = c.cells[c.dimension - 1]
    header = ["t"] + [f"mean_{x}" for x in cells] + [f"se_{x}" for x in cells]
    lines = [",".join(header)]
    for t, mu, se in zip(moments.times, moments.mean, moments.stderr):
        lines.append(
            ",".join(
                [io.fmt_float(t)]
                + [io.fmt_float(v) for v in mu]
                + [io.fmt_float(v) for v in se]
            )
        )
    csv = "\n".join(lines) + "\n"
    return run.emit(
        {
            "complex": c.name,
            "n_traj": args.n_traj,
            "seed": args.seed,
            "streams": list(range(args.n_traj)),
            "protocol_sha256": io.sha256_of(proto_text),
            "n_excluded": moments.n_excluded,
            "exclusion_fraction": moments.exclusion_fraction,
        },
        "simulate.csv",
        csv,
    )


def _cmd_current(args) -> int:
    run = _Run(args)
    c, builtin = _resolve_complex(args)
    p = _resolve_protocol(args, c, builtin)
    z0 = _resolve_z0(args, c)
    run.note_input("complex", io.canonical_json(io.complex_to_dict(c)))
    run.note_input("protocol", io.canonical_json(io.protocol_to_dict(p)))
    res = average_current(c, p, z0, grid_k=args.grid_k)
    cells = c.cells[c.dimension]
    csv = _csv_table(res.times, res.density, cells)
    return run.emit(
        {
            "complex": c.name,
            "tau_d": p.tau_d,
            "beta": p.beta,
            "Q": {cell: res.q.coefficient(cell) for cell in cells},
            "boundary_residual": res.boundary_residual,
            "periodicity_residual": res.solution.residual,
        },
        "current.csv",
        csv,
    )


def _cmd_quantize(args) -> int:
    run = _Run(args)
    c, builtin = _resolve_complex(args)
    p = _resolve_protocol(args, c, builtin)
    z0 = _resolve_z0(args, c)
    run.note_input("complex", io.canonical_json(io.complex_to_dict(c)))
    run.note_input("protocol", io.canonical_json(io.protocol_to_dict(p)))
    res = quantized_current(c, p, z0=z0)
    segments = []
    for s in res.segments:
        entry = {
            "t_start": s.t_start,
            "t_end": s.t_end,
            "type": s.type,
            "contribution": io.chain_to_jsonable(
                Chain(c.dimension, "rational", s.contribution)
            ),
        }
        if s.type == "V":
            entry["minimal_tree"] = list(s.tree)
            entry["minimal_cotree_start"] = list(s.cotree_start)
            entry["minimal_cotree_end"] = list(s.cotree_end)
        segments.append(entry)
    return run.emit(
        {
            "complex": c.name,
            "beta": p.beta,
            "delta": res.delta,
            "total": io.chain_to_jsonable(res.total),
            "segments": segments,
            "numeric_distance": res.numeric_distance,
        }
    )


_HANDLERS = {
    "example": _cmd_example,
    "validate": _cmd_validate,
    "homology": _cmd_homology,
    "forests": _cmd_forests,
    "boltzmann": _cmd_boltzmann,
    "expect": _cmd_expect,
    "simulate": _cmd_simulate,
    "current": _cmd_current,
    "quantize": _cmd_quantize,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = _HANDLERS[args.command]
    try:
        return handler(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
