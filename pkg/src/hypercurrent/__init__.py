"""Driven Markov chains of cellular cycles in finite CW complexes.

The package is organized in layers:

- ``complexes``: finite CW complexes, chains, exact homology (Smith form).
- ``forests``: spanning trees / co-trees, torsion orders, tree sections,
  the weighted section operator and the harmonic cycle representative.
- ``protocols``: weight systems, smooth 1-periodic driving, segmentation
  into injective-E / injective-W pieces.
- ``dynamics``: the biased Laplacian, expectation dynamics, periodic
  solutions, current density, average current and its quantization.
- ``stochastic``: the cycle-jump process itself, trajectory sampling and
  empirical expectations.
- ``library``: the built-in example complexes and protocols.
"""

from .complexes import (
    Chain,
    CWComplex,
    HomologySummary,
    boundary_apply,
    coboundary_apply,
    default_atoms,
    homology,
    skeleton,
    validate_complex,
)
from .exact import smith_normal_form
from .forests import (
    ForestCatalog,
    SpanningCoTree,
    SpanningTree,
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
from .protocols import (
    DrivingProtocol,
    SegmentDecomposition,
    WeightSystem,
    classify_point,
    constant_protocol,
    evaluate,
    evaluate_derivative,
    segment,
)
from .dynamics import (
    BiasedOperators,
    PeriodicSolutionSamples,
    QuantizationResult,
    adiabatic_current,
    average_current,
    build_operators,
    current_density,
    delta_invariant,
    evolve,
    monodromy,
    periodic_solution,
    quantized_current,
    spectral_gap,
)
from .stochastic import (
    StateNode,
    Trajectory,
    TransitionEdge,
    empirical_expectation,
    explore,
    neighbors,
    simulate,
)
from .library import example

__version__ = "0.1.0"
