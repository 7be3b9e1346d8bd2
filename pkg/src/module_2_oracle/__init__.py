"""Module 2: Dense-matrix oracle.

Public API for the explicit G^t / L^t form of the propagation on small grids,
used to certify the fast kernel and to inspect the diffusion structure.
"""

from .dense import (
    MAX_ORACLE_PIXELS,
    TransformMatrix,
    build_G,
    folded_row_sums,
    gershgorin_radius,
    laplacian_of,
    oracle_propagate,
    oracle_trajectory,
    spectrum,
    unvectorize,
    vectorize,
)
from .equivalence import F32_TOLERANCE, F64_TOLERANCE, EquivalenceReport, compare_once, equivalence_report

__all__ = [
    "F32_TOLERANCE",
    "F64_TOLERANCE",
    "MAX_ORACLE_PIXELS",
    "EquivalenceReport",
    "TransformMatrix",
    "build_G",
    "compare_once",
    "equivalence_report",
    "folded_row_sums",
    "gershgorin_radius",
    "laplacian_of",
    "oracle_propagate",
    "oracle_trajectory",
    "spectrum",
    "unvectorize",
    "vectorize",
]
