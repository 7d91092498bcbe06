"""Experiment harness: episode loops, summaries, traces, and sweeps."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import EnergyLedger, cd_solve, myopic_solve
from .config import ArrivalModel, SimConfig, rng_streams
from .env import (
    ArrivalProcess,
    FrameObservation,
    frame_outcome,
    sample_channel,
    update_queues,
)
from .policy import (
    Adam,
    Mlp,
    QuantizerSchedule,
    ReplayMemory,
    nop_quantize,
    normalize_input,
    train_step,
)
from .scheduler import critic_select


@dataclass
class Trace:
    """Per-frame history of a simulation run."""

    h: np.ndarray          # (K, N) channel power gains
    A: np.ndarray          # (K, N) task arrivals, Mbit
    Q: np.ndarray          # (K, N) data queue at frame start, Mbit
    Y: np.ndarray          # (K, N) energy virtual queue at frame start
    x: np.ndarray          # (K, N) offloading decisions
    tau: np.ndarray        # (K, N) offload time shares
    f: np.ndarray          # (K, N) local CPU frequencies, Hz
    e_O: np.ndarray        # (K, N) offload transmit energy, J
    rate: np.ndarray       # (K, N) processed rate, Mbps
    energy: np.ndarray     # (K, N) energy consumed, J
    weighted_rate: np.ndarray  # (K,) sum of c_i * r_i
    objective: np.ndarray  # (K,) per-frame objective value
    M: np.ndarray          # (K,) candidate count (0 for non-learned runs)
    m_idx: np.ndarray      # (K,) chosen candidate index (0 for non-learned)
    loss: np.ndarray       # (K,) training loss (nan when no update)
    action_ms: np.ndarray  # (K,) wall time from observation to action, ms

    @property
    def frames(self) -> int:
        return self.Q.shape[0]

    @property
    def total_queue(self) -> np.ndarray:
        return self.Q.sum(axis=1)

    @property
    def total_power(self) -> np.ndarray:
        return self.energy.sum(axis=1) / 1.0  # T = 1 s frames by convention


_PER_DEVICE_FIELDS = ("h", "A", "Q", "Y", "x", "tau", "f", "e_O", "rate", "energy")
_SCALAR_FIELDS = ("weighted_rate", "objective", "M", "m_idx", "loss", "action_ms")
_INT_FIELDS = {"x", "M", "m_idx"}


def _empty_trace(K: int, N: int) -> Trace:
    kwargs = {}
    for name in _PER_DEVICE_FIELDS:
        kwargs[name] = np.zeros((K, N), dtype=int if name in _INT_FIELDS else float)
    for name in _SCALAR_FIELDS:
        kwargs[name] = np.zeros(K, dtype=int if name in _INT_FIELDS else float)
    kwargs["loss"] = np.full(K, np.nan)
    return Trace(**kwargs)


@dataclass
class RunResult:
    trace: Trace
    cfg: SimConfig
    algorithm: str
    mlp: Mlp | None = None
    extras: dict = field(default_factory=dict)


def queue_slope(total_queue: np.ndarray, tail_fraction: float = 0.3) -> float:
    """Least-squares slope of the total queue over the trailing window."""
    n = len(total_queue)
    k = max(int(np.ceil(tail_fraction * n)), 2)
    y = total_queue[-k:]
    t = np.arange(k, dtype=float)
    return float(np.polyfit(t, y, 1)[0])


def is_stable(total_queue: np.ndarray, mean_arrival: float,
              tail_fraction: float = 0.3,
              slope_tolerance: float = 0.01) -> bool:
    """Stability test: the trailing least-squares queue slope is at most
    ``slope_tolerance`` times the mean per-frame arrival volume, i.e. the
    backlog grows by less than 1% of the traffic entering the system."""
    scale = max(float(mean_arrival), 1e-9)
    return queue_slope(total_queue, tail_fraction) <= slope_tolerance * scale


def summarize(trace: Trace, window_fraction: float = 0.3) -> dict:
    """Trailing-window averages and the stability verdict for a run."""
    n = trace.frames
    k = max(int(np.ceil(window_fraction * n)), 1)
    sl = slice(n - k, n)
    out = {
        "frames": n,
        "mean_power_W": float(np.mean(trace.energy[sl].sum(axis=1))),
        "mean_device_power_W": float(np.mean(trace.energy[sl].sum(axis=1)))
        / trace.Q.shape[1],
        "mean_weighted_rate_Mbps": float(np.mean(trace.weighted_rate[sl])),
        "mean_rate_Mbps": float(np.mean(trace.rate[sl].sum(axis=1))),
        "mean_total_queue_Mbit": float(np.mean(trace.total_queue[sl])),
        "final_total_queue_Mbit": float(trace.total_queue[-1]),
        "queue_slope": queue_slope(trace.total_queue),
        "stable": bool(is_stable(trace.total_queue,
                                 float(np.mean(trace.A.sum(axis=1))))),
        "mean_action_ms": float(np.mean(trace.action_ms[sl])),
        "final_M": int(trace.M[-1]),
    }
    losses = trace.loss[~np.isnan(trace.loss)]
    out["final_loss"] = float(losses[-1]) if len(losses) else float("nan")
    return out


def run_learned(cfg: SimConfig, frames: int, seed: int = 0,
                mlp: Mlp | None = None, train: bool = True,
                collect_candidates: bool = False) -> RunResult:
    """Run the learned scheduler for ``frames`` frames.

    Each frame: observe channels and queues, generate binary offloading
    candidates from the actor network via the noisy order-preserving
    quantizer, score every candidate with the exact resource-allocation
    critic, act on the best one, and (periodically) refit the actor on the
    replayed (observation, best action) pairs.
    """
    streams = rng_streams(seed)
    gains = cfg.mean_gains()
    N = cfg.N

    if mlp is None:
        mlp = Mlp([3 * N] + list(cfg.hidden_sizes) + [N],
                  streams["dnn_init"], cfg.init_mode)
    adam = Adam(mlp, cfg)
    memory = ReplayMemory(cfg.memory_capacity, 3 * N, N)
    schedule = QuantizerSchedule(N, cfg.delta_M)
    arrivals = ArrivalProcess(cfg.arrival)

    Q = np.zeros(N)
    Y = np.zeros(N)
    trace = _empty_trace(frames, N)
    saved = [] if collect_candidates else None

    for t in range(1, frames + 1):
        h = sample_channel(streams["channel"], cfg, gains)
        obs = FrameObservation(t=t, h=h, Q=Q.copy(), Y=Y.copy())

        t0 = time.perf_counter()
        schedule.maybe_update(t)
        feats = normalize_input(obs, cfg, gains)
        xhat = mlp.forward(feats)
        candidates = nop_quantize(xhat, schedule.M, streams["quantizer"])
        best = critic_select(candidates, obs, cfg)
        elapsed_ms = (time.perf_counter() - t0) * 1e3

        schedule.record(best.index)
        memory.add(feats, best.x)
        loss = np.nan
        if train and t % cfg.delta_T == 0:
            got = train_step(mlp, adam, memory, streams["batch"], cfg)
            if got is not None:
                loss = got

        A = arrivals.step(streams["arrivals"], cfg)
        outcome = frame_outcome(best.x, best.y, h, cfg)
        Q, Y = update_queues(Q, Y, outcome, A, cfg)

        i = t - 1
        trace.h[i], trace.A[i] = h, A
        trace.Q[i], trace.Y[i] = obs.Q, obs.Y
        trace.x[i] = best.x
        trace.tau[i], trace.f[i], trace.e_O[i] = best.y.tau, best.y.f, best.y.e_O
        trace.rate[i] = outcome.r
        trace.energy[i] = outcome.e
        trace.weighted_rate[i] = outcome.weighted_rate
        trace.objective[i] = best.G
        trace.M[i] = schedule.M
        trace.m_idx[i] = best.index
        trace.loss[i] = loss
        trace.action_ms[i] = elapsed_ms
        if collect_candidates:
            saved.append(obs)

    extras = {"observations": saved} if collect_candidates else {}
    return RunResult(trace=trace, cfg=cfg, algorithm="drl", mlp=mlp,
                     extras=extras)


def run_baseline(cfg: SimConfig, frames: int, algorithm: str,
                 seed: int = 0) -> RunResult:
    """Run the coordinate-descent ("cd") or per-frame budgeted ("myopic")
    baseline under the same channel/arrival realizations as seeded runs."""
    if algorithm not in ("cd", "myopic"):
        raise ValueError(f"unknown baseline: {algorithm!r}")
    streams = rng_streams(seed)
    gains = cfg.mean_gains()
    N = cfg.N
    arrivals = ArrivalProcess(cfg.arrival)
    ledger = EnergyLedger.fresh(N) if algorithm == "myopic" else None

    Q = np.zeros(N)
    Y = np.zeros(N)
    trace = _empty_trace(frames, N)

    for t in range(1, frames + 1):
        h = sample_channel(streams["channel"], cfg, gains)
        obs = FrameObservation(t=t, h=h, Q=Q.copy(), Y=Y.copy())

        t0 = time.perf_counter()
        if algorithm == "cd":
            best = cd_solve(obs, cfg)
            x, y, G = best.x, best.y, best.G
        else:
            ledger.t = t
            x, y = myopic_solve(obs, ledger, cfg)
            G = 0.0
        elapsed_ms = (time.perf_counter() - t0) * 1e3

        A = arrivals.step(streams["arrivals"], cfg)
        outcome = frame_outcome(x, y, h, cfg)
        if algorithm == "myopic":
            ledger.record(outcome.e)
        Q, Y = update_queues(Q, Y, outcome, A, cfg)

        i = t - 1
        trace.h[i], trace.A[i] = h, A
        trace.Q[i], trace.Y[i] = obs.Q, obs.Y
        trace.x[i] = x
        trace.tau[i], trace.f[i], trace.e_O[i] = y.tau, y.f, y.e_O
        trace.rate[i] = outcome.r
        trace.energy[i] = outcome.e
        trace.weighted_rate[i] = outcome.weighted_rate
        trace.objective[i] = G
        trace.action_ms[i] = elapsed_ms

    return RunResult(trace=trace, cfg=cfg, algorithm=algorithm)


def replay_ratio(learned: RunResult, reference: RunResult) -> np.ndarray:
    """Per-frame ratio of the learned objective to the reference objective,
    both evaluated on the reference run's own state trajectory.

    Frames where the reference objective is ~0 (empty queues) count as 1.
    """
    num = learned.trace.objective
    den = reference.trace.objective
    if len(num) != len(den):
        raise ValueError("runs must have the same number of frames")
    out = np.ones(len(den))
    live = np.abs(den) > 1e-9
    out[live] = num[live] / den[live]
    return out


def observations_from_trace(trace: Trace) -> list[FrameObservation]:
    """Rebuild the per-frame solver inputs recorded in a trace."""
    return [
        FrameObservation(t=i + 1, h=trace.h[i].copy(), Q=trace.Q[i].copy(),
                         Y=trace.Y[i].copy())
        for i in range(trace.frames)
    ]


def run_learned_on_reference(cfg: SimConfig, reference: RunResult,
                             seed: int = 0) -> RunResult:
    """Train the learned scheduler while replaying the reference run's
    observations (channels and queue states), so the two per-frame
    objectives are directly comparable."""
    obs_list = reference.extras.get("observations")
    if not obs_list:
        obs_list = observations_from_trace(reference.trace)
    if not obs_list or not np.any(obs_list[0].h):
        raise ValueError("reference run carries no channel observations")
    streams = rng_streams(seed)
    gains = cfg.mean_gains()
    N = cfg.N
    frames = len(obs_list)

    mlp = Mlp([3 * N] + list(cfg.hidden_sizes) + [N],
              streams["dnn_init"], cfg.init_mode)
    adam = Adam(mlp, cfg)
    memory = ReplayMemory(cfg.memory_capacity, 3 * N, N)
    schedule = QuantizerSchedule(N, cfg.delta_M)

    trace = _empty_trace(frames, N)
    for t in range(1, frames + 1):
        obs = obs_list[t - 1]
        t0 = time.perf_counter()
        schedule.maybe_update(t)
        feats = normalize_input(obs, cfg, gains)
        xhat = mlp.forward(feats)
        candidates = nop_quantize(xhat, schedule.M, streams["quantizer"])
        best = critic_select(candidates, obs, cfg)
        elapsed_ms = (time.perf_counter() - t0) * 1e3

        schedule.record(best.index)
        memory.add(feats, best.x)
        loss = np.nan
        if t % cfg.delta_T == 0:
            got = train_step(mlp, adam, memory, streams["batch"], cfg)
            if got is not None:
                loss = got

        i = t - 1
        trace.h[i] = obs.h
        trace.Q[i], trace.Y[i] = obs.Q, obs.Y
        trace.x[i] = best.x
        trace.tau[i], trace.f[i], trace.e_O[i] = best.y.tau, best.y.f, best.y.e_O
        trace.objective[i] = best.G
        trace.M[i] = schedule.M
        trace.m_idx[i] = best.index
        trace.loss[i] = loss
        trace.action_ms[i] = elapsed_ms

    return RunResult(trace=trace, cfg=cfg, algorithm="drl-replay", mlp=mlp)


def sweep(cfg: SimConfig, frames: int, parameter: str, values,
          algorithm: str = "drl", seed: int = 0) -> list[dict]:
    """Re-run the chosen algorithm across a parameter sweep.

    ``parameter`` is one of "lambda", "gamma", "V", "N". Each entry of the
    result is the run summary plus the swept value.
    """
    rows = []
    for v in values:
        c = cfg
        if parameter == "lambda":
            model = ArrivalModel(kind=cfg.arrival.kind,
                                 lam=np.full(cfg.N, float(v)),
                                 onoff_matrix=cfg.arrival.onoff_matrix)
            c = replace(cfg, arrival=model)
        elif parameter == "gamma":
            c = replace(cfg, gamma=np.full(cfg.N, float(v)))
        elif parameter == "V":
            c = replace(cfg, V=float(v))
        elif parameter == "N":
            c = cfg.with_devices(int(v))
        else:
            raise ValueError(f"unknown sweep parameter: {parameter!r}")
        if algorithm == "drl":
            res = run_learned(c, frames, seed=seed)
        else:
            res = run_baseline(c, frames, algorithm, seed=seed)
        row = {"parameter": parameter, "value": v}
        row.update(summarize(res.trace))
        rows.append(row)
    return rows


# ----- trace / summary I/O -----

def write_trace_csv(path: str, trace: Trace) -> None:
    N = trace.Q.shape[1]
    cols = ["frame"]
    for name in _PER_DEVICE_FIELDS:
        cols += [f"{name}_{i}" for i in range(N)]
    cols += list(_SCALAR_FIELDS)
    with open(path, "w", newline="") as fp:
        w = csv.writer(fp)
        w.writerow(cols)
        for i in range(trace.frames):
            row: list = [i + 1]
            for name in _PER_DEVICE_FIELDS:
                row += list(getattr(trace, name)[i])
            row += [getattr(trace, name)[i] for name in _SCALAR_FIELDS]
            w.writerow(row)


def read_trace_csv(path: str) -> Trace:
    with open(path, newline="") as fp:
        reader = csv.reader(fp)
        header = next(reader)
        rows = [list(map(float, r)) for r in reader]
    data = np.array(rows)
    N = sum(1 for c in header if c.startswith("Q_"))
    K = data.shape[0]
    trace = _empty_trace(K, N)
    o = 1
    for name in _PER_DEVICE_FIELDS:
        block = data[:, o:o + N]
        if name in _INT_FIELDS:
            block = block.astype(int)
        getattr(trace, name)[:] = block
        o += N
    for name in _SCALAR_FIELDS:
        col = data[:, o]
        if name in _INT_FIELDS:
            col = col.astype(int)
        getattr(trace, name)[:] = col
        o += 1
    return trace


def write_summary(path: str, summary: dict) -> None:
    with open(path, "w") as fp:
        for k, v in summary.items():
            fp.write(f"{k} = {v}\n")
