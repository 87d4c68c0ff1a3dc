"""Separability of 3-manifold subgroups via the spirality character.

Exact decisions on decorated torus-decomposition graphs: LERFness of the
ambient group by the adjacency criterion, separability of an infinite-index
subgroup by triviality of the generalized spirality character, and the
constructive counterpart: assembly and verification of finite semi-cover
certificates.
"""

from . import errors, io_json, jsj, lattice, oracle, phi, semicover
from .jsj import JsjGraph, LerfVerdict, is_lerf, lerf_prime_decomposition
from .lattice import (
    Gluing,
    Lattice,
    ScaledSlope,
    Slope,
    apply_gluing,
    compat_constants,
    contains,
    hnf,
    index,
    scaled,
    slope,
    span2,
)
from .phi import (
    AspiralityVerdict,
    GraphCover,
    PhiGraph,
    SeparabilityVerdict,
    Step,
    check_mixed_definition,
    cycle_basis,
    is_aspiral,
    lift_phi,
    s_delta,
    separability_verdict,
    spirality_on_cycle,
)
from .semicover import (
    ConstantSheet,
    CoverCertificate,
    SlopeChoice,
    SpiralObstruction,
    assemble,
    build_constant_sheet,
    choose_slopes,
    global_constant,
    spanning_tree_with_edge_conditions,
    verify_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "io_json",
    "jsj",
    "lattice",
    "oracle",
    "phi",
    "semicover",
    "JsjGraph",
    "LerfVerdict",
    "is_lerf",
    "lerf_prime_decomposition",
    "Gluing",
    "Lattice",
    "ScaledSlope",
    "Slope",
    "apply_gluing",
    "compat_constants",
    "contains",
    "hnf",
    "index",
    "scaled",
    "slope",
    "span2",
    "AspiralityVerdict",
    "GraphCover",
    "PhiGraph",
    "SeparabilityVerdict",
    "Step",
    "check_mixed_definition",
    "cycle_basis",
    "is_aspiral",
    "lift_phi",
    "s_delta",
    "separability_verdict",
    "spirality_on_cycle",
    "ConstantSheet",
    "CoverCertificate",
    "SlopeChoice",
    "SpiralObstruction",
    "assemble",
    "build_constant_sheet",
    "choose_slopes",
    "global_constant",
    "spanning_tree_with_edge_conditions",
    "verify_certificate",
]
