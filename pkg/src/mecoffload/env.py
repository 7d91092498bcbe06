"""Random environment and physical frame execution.

Generates Rician-faded channel gains and stochastic task arrivals, evaluates
the data processed / energy consumed by a joint (binary offloading, resource
allocation) action, and advances the data and virtual energy queues.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ArrivalModel, SimConfig

_TAU_EPS = 1e-15


@dataclass
class FrameObservation:
    """Per-frame solver input: channel gains and both queue vectors."""

    t: int
    h: np.ndarray   # channel power gains (dimensionless)
    Q: np.ndarray   # data queues [Mbit]
    Y: np.ndarray   # virtual energy queues (nu-scaled)


@dataclass
class FrameOutcome:
    """Physical result of executing one frame's action."""

    D: np.ndarray            # bits processed [Mbit]
    r: np.ndarray            # computation rate [Mbps]
    e: np.ndarray            # average power [W]
    weighted_rate: float     # sum_i c_i r_i [Mbps]


def mean_channel_gain(d: float, cfg: SimConfig) -> float:
    """Distance-dependent average power gain (free-space path loss form)."""
    if d <= 0:
        raise ValueError("distance must be positive")
    return cfg.A_d * (3e8 / (4 * np.pi * cfg.f_c * d)) ** cfg.d_e


def sample_channel(rng: np.random.Generator, cfg: SimConfig,
                   mean_gains: np.ndarray | None = None) -> np.ndarray:
    """Draw i.i.d. Rician power gains with E[h_i] equal to the path-loss mean.

    The fading amplitude is sqrt(rho) + sqrt(1-rho) * g with g a standard
    complex Gaussian, so the deterministic line-of-sight component carries a
    ``rho`` fraction of the mean power and the scattered part the rest.
    """
    if mean_gains is None:
        mean_gains = cfg.mean_gains()
    rho = cfg.rician_los_fraction
    re = rng.standard_normal(cfg.N) / np.sqrt(2.0)
    im = rng.standard_normal(cfg.N) / np.sqrt(2.0)
    amp2 = (np.sqrt(rho) + np.sqrt(1.0 - rho) * re) ** 2 + (1.0 - rho) * im**2
    return mean_gains * amp2


@dataclass
class ArrivalProcess:
    """Stateful arrival sampler; the ON/OFF variant shares one chain."""

    model: ArrivalModel
    state: int = 1  # 1 = ON; iid model ignores it

    def step(self, rng: np.random.Generator, cfg: SimConfig) -> np.ndarray:
        lam = np.asarray(self.model.lam, dtype=float)
        if self.model.kind == "iid_exponential":
            return rng.exponential(lam * cfg.T)
        # two-state chain advances once per frame for the whole system
        P = np.asarray(self.model.onoff_matrix, dtype=float)
        self.state = int(rng.random() < P[self.state, 1])
        if self.state == 0:
            return np.zeros(cfg.N)
        return rng.exponential(self.model.on_state_mean() * cfg.T)


def frame_outcome(x: np.ndarray, y, h: np.ndarray, cfg: SimConfig) -> FrameOutcome:
    """Evaluate the physical rates and powers of an action.

    ``y`` is any object with ``tau``, ``f`` (Hz) and ``e_O`` attributes (a
    ``ResourceAllocation`` in practice). Local devices (x=0) process f/phi
    bits per second at cubic power cost; offloaders (x=1) get the Shannon
    rate of their time share. Pure and deterministic; ``tau=0`` offloaders
    contribute nothing.
    """
    x = np.asarray(x)
    tau = np.asarray(y.tau, dtype=float)
    f = np.asarray(y.f, dtype=float)
    e_O = np.asarray(y.e_O, dtype=float)
    if np.any(tau < -1e-12) or np.any(f < -1e-9) or np.any(e_O < -1e-15):
        raise ValueError("allocation entries must be non-negative")

    f_mhz = f / 1e6
    r = np.zeros(cfg.N)
    e = np.zeros(cfg.N)

    local = x == 0
    r[local] = f_mhz[local] / cfg.phi
    e[local] = cfg.kappa_tilde * f_mhz[local] ** 3

    off = (x == 1) & (tau > _TAU_EPS)
    if np.any(off):
        snr = e_O[off] * h[off] / (tau[off] * cfg.N0)
        r[off] = (cfg.W_mhz * tau[off] / cfg.v_u) * np.log2(1.0 + snr)
        e[off] = e_O[off]

    D = r * cfg.T
    return FrameOutcome(D=D, r=r, e=e, weighted_rate=float(np.dot(cfg.c, r)))


def update_queues(Q: np.ndarray, Y: np.ndarray, outcome: FrameOutcome,
                  A: np.ndarray, cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Advance the data and virtual energy queues by one frame."""
    if np.any(outcome.D > Q + 1e-6):
        raise ValueError("processed data exceeds queue backlog (solver bug)")
    Q_next = np.maximum(Q - outcome.D, 0.0) + A
    Y_next = np.maximum(Y + cfg.nu * (outcome.e - cfg.gamma), 0.0)
    return Q_next, Y_next
