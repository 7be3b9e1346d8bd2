# DySPN depth-completion propagation
# Shared data model, neighbourhood geometry and bundle validation for all modules.

# Re-export shared types so other files can import from `src.shared`.
from .bundle import ValidatedBundle, validate_bundle
from .errors import CheckFailure, DySPNError, FormatError, ValidationError
from .neighborhood import build_neighborhood, chebyshev_ring, deformable_offsets, dilated_ring
from .random_bundle import random_bundle
from .sampling import SamplingPlan, build_sampling_plan, sampling_plan
from .types import (
    AffinityVolume,
    AttentionStack,
    BoundaryPolicy,
    DepthGrid,
    NeighborhoodSpec,
    Precision,
    PropagationConfig,
    Ring,
    Variant,
)

__all__ = [
    "AffinityVolume",
    "AttentionStack",
    "BoundaryPolicy",
    "CheckFailure",
    "DepthGrid",
    "DySPNError",
    "FormatError",
    "NeighborhoodSpec",
    "Precision",
    "PropagationConfig",
    "Ring",
    "SamplingPlan",
    "ValidatedBundle",
    "ValidationError",
    "Variant",
    "build_neighborhood",
    "build_sampling_plan",
    "chebyshev_ring",
    "deformable_offsets",
    "dilated_ring",
    "random_bundle",
    "sampling_plan",
    "validate_bundle",
]
