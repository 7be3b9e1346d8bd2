"""Recorded forward state: per-step workspaces and the h^0..h^N trajectory."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.shared import ValidatedBundle


@dataclass(frozen=True, eq=False)
class StepWorkspace:
    """
    Everything one step computed that its backward pass needs.

    S <= S' always holds, and S >= 2*pi_0 - S' (from -|w| <= w <= |w|);
    S' >= |S| does not hold in general.
    """

    gathered: np.ndarray   # [K, H, W] neighbour values, 0 where masked
    attention: np.ndarray  # [R+1, H, W] attention actually used (pi_0 pinned when DS is off)
    s: np.ndarray          # [H, W] signed normaliser S
    s_prime: np.ndarray    # [H, W] absolute normaliser S'
    denominator: np.ndarray  # [H, W] S' + guard


@dataclass(frozen=True, eq=False)
class PropagationTape:
    """States h^0..h^N (raw, never clamped) plus the inputs that produced them."""

    states: np.ndarray
    workspaces: Tuple[StepWorkspace, ...]
    bundle: ValidatedBundle

    @property
    def steps(self) -> int:
        return len(self.workspaces)

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def state(self, t: int) -> np.ndarray:
        return self.states[t]
