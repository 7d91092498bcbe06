"""Stable online computation offloading for multi-device edge networks.

A discrete-time simulator plus an algorithm library: a learned scheduler
(actor network proposing binary offloading decisions, scored by an exact
convex resource-allocation critic under a drift-plus-penalty objective),
a coordinate-descent benchmark, a per-frame energy-budgeted benchmark,
and independent brute-force references for verification.
"""

from .config import (
    ArrivalModel,
    SimConfig,
    default_config,
    load_config,
    rng_streams,
    save_config,
)
from .env import (
    ArrivalProcess,
    FrameObservation,
    FrameOutcome,
    frame_outcome,
    mean_channel_gain,
    sample_channel,
    update_queues,
)
from .lambertw import lambert_w0
from .resource_alloc import (
    ResourceAllocation,
    bisect_dual,
    optimal_local_frequency,
    optimal_tau_ratio,
    solve_resource_allocation,
)
from .scheduler import CandidateEvaluation, critic_select, evaluate_objective
from .policy import (
    Adam,
    Mlp,
    QuantizerSchedule,
    ReplayMemory,
    load_checkpoint,
    nop_quantize,
    normalize_input,
    save_checkpoint,
    train_step,
)
from .baselines import EnergyLedger, cd_solve, myopic_solve
from .harness import (
    RunResult,
    Trace,
    is_stable,
    queue_slope,
    read_trace_csv,
    replay_ratio,
    run_baseline,
    run_learned,
    run_learned_on_reference,
    summarize,
    sweep,
    write_summary,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalModel", "SimConfig", "default_config", "load_config",
    "rng_streams", "save_config",
    "ArrivalProcess", "FrameObservation", "FrameOutcome", "frame_outcome",
    "mean_channel_gain", "sample_channel", "update_queues",
    "lambert_w0",
    "ResourceAllocation", "bisect_dual", "optimal_local_frequency",
    "optimal_tau_ratio", "solve_resource_allocation",
    "CandidateEvaluation", "critic_select", "evaluate_objective",
    "Adam", "Mlp", "QuantizerSchedule", "ReplayMemory", "load_checkpoint",
    "nop_quantize", "normalize_input", "save_checkpoint", "train_step",
    "EnergyLedger", "cd_solve", "myopic_solve",
    "RunResult", "Trace", "is_stable", "queue_slope", "read_trace_csv",
    "replay_ratio", "run_baseline", "run_learned",
    "run_learned_on_reference", "summarize", "sweep", "write_summary",
    "write_trace_csv",
]
