"""Per-frame objective construction and candidate selection.

The per-frame weights trade current data backlog against the configured rate
weights; the selector scores each candidate binary offloading vector with the
exact resource-allocation solver and keeps the best.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .env import FrameObservation, frame_outcome
from .resource_alloc import (
    ResourceAllocation,
    solve_resource_allocation,
    solve_resource_allocation_batch,
)


@dataclass
class PerFrameWeights:
    a: np.ndarray    # rate weights Q_i + V c_i
    yw: np.ndarray   # energy penalty weights Y_i


@dataclass
class CandidateEvaluation:
    x: np.ndarray
    y: ResourceAllocation
    G: float
    index: int = 0   # position of x in the candidate list


def per_frame_weights(obs: FrameObservation, cfg: SimConfig) -> PerFrameWeights:
    return PerFrameWeights(a=obs.Q + cfg.V * cfg.c, yw=obs.Y.copy())


def evaluate_objective(x, y: ResourceAllocation, obs: FrameObservation,
                       cfg: SimConfig) -> float:
    """Objective value of a given joint action, recomputed from physics."""
    out = frame_outcome(x, y, obs.h, cfg)
    w = per_frame_weights(obs, cfg)
    return float(np.dot(w.a, out.r) - np.dot(w.yw, out.e))


def critic_select(candidates, obs: FrameObservation, cfg: SimConfig) -> CandidateEvaluation:
    """Score every candidate with the exact solver and return the argmax.

    Ties break toward the lowest candidate index; duplicate candidates are
    solved once.
    """
    if len(candidates) == 0:
        raise ValueError("candidate set must be nonempty")
    keys = [tuple(int(v) for v in x) for x in candidates]
    unique: dict[tuple, int] = {}
    for idx, key in enumerate(keys):
        unique.setdefault(key, idx)
    X = np.array(list(unique.keys()), dtype=int)
    allocs, G = solve_resource_allocation_batch(X, obs, cfg)
    indices = list(unique.values())
    best_pos = 0
    for pos in range(1, len(indices)):
        if G[pos] > G[best_pos] or (
            G[pos] == G[best_pos] and indices[pos] < indices[best_pos]
        ):
            best_pos = pos
    return CandidateEvaluation(
        x=X[best_pos].copy(), y=allocs[best_pos],
        G=float(G[best_pos]), index=indices[best_pos],
    )
