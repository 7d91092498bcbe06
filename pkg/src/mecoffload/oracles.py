"""Independent brute-force and numerical references.

Used only by tests and verification tooling, never by the schedulers. The
continuous reference shares no code with the closed-form solver beyond the
physical rate/energy formulas it is checking.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .env import FrameObservation
from .resource_alloc import solve_resource_allocation

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class OracleReport:
    instance: str
    oracle_value: float
    algorithm_value: float

    @property
    def relative_gap(self) -> float:
        return (self.oracle_value - self.algorithm_value) / max(
            abs(self.oracle_value), 1e-12
        )


def golden_max(fn, lo: float, hi: float, iters: int = 90):
    """Scalar golden-section maximization on [lo, hi]."""
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fn(x1)
    xm = 0.5 * (a + b)
    return xm, fn(xm)


def golden_max_vec(fn, lo: np.ndarray, hi: np.ndarray, iters: int = 70) -> np.ndarray:
    """Elementwise golden-section maximum value of ``fn`` over [lo, hi]."""
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(iters):
        right = f1 < f2
        a = np.where(right, x1, a)
        b = np.where(right, b, x2)
        x1n = b - _GOLDEN * (b - a)
        x2n = a + _GOLDEN * (b - a)
        # recompute both probes; simple and branch-free
        x1, x2 = x1n, x2n
        f1, f2 = fn(x1), fn(x2)
    return np.maximum(f1, f2)


def enumerate_offloading(obs: FrameObservation, cfg: SimConfig):
    """Exact optimum over all 2^N offloading vectors (guarded to N <= 12).

    Returns the first lexicographic argmax and its value.
    """
    if cfg.N > 12:
        raise ValueError("enumeration oracle is limited to N <= 12")
    best_x, best_G = None, -np.inf
    for bits in itertools.product((0, 1), repeat=cfg.N):
        x = np.array(bits, dtype=int)
        _, G = solve_resource_allocation(x, obs, cfg)
        if G > best_G:
            best_x, best_G = x, G
    return best_x, best_G


# ----- numerical reference for the per-offloader time-share problem -----

def time_share_objective(tau, r, mu, a, Y, h, cfg: SimConfig):
    """a*r - mu*tau - Y * (tau/h) * energy-density(r/tau)."""
    tau = np.asarray(tau, dtype=float)
    dens = cfg.N0 * (np.exp2(r * cfg.v_u / (cfg.W_mhz * tau)) - 1.0)
    return a * r - mu * tau - Y * (tau / h) * dens


def numeric_optimal_tau(r, mu, a, Y, h, cfg: SimConfig, r_max: float):
    """Golden-section reference for the optimal time share at fixed rate r."""
    lo = r / r_max
    hi = max(2.0 * lo, 1.0)
    # expand until the objective starts decreasing (mu > 0 guarantees decay)
    for _ in range(200):
        if time_share_objective(hi, r, mu, a, Y, h, cfg) < time_share_objective(
            0.5 * hi, r, mu, a, Y, h, cfg
        ):
            break
        hi *= 2.0
    return golden_max(lambda t: time_share_objective(t, r, mu, a, Y, h, cfg), lo, hi)


# ----- grid + inner 1-D search reference for the fixed-x allocation -----

def _local_reference(a, Y, Q, f_max_hz, cfg: SimConfig) -> float:
    """1-D golden-section over the local CPU frequency (MHz)."""
    cap = min(cfg.phi * Q, f_max_hz / 1e6)
    if cap <= 0:
        return 0.0

    def obj(f_mhz):
        return a * f_mhz / cfg.phi - Y * cfg.kappa_tilde * f_mhz**3

    _, v = golden_max(obj, 0.0, cap)
    return max(v, 0.0)


def _offload_grid_best(taus: list[np.ndarray], a, Y, Q, h, P_max, cfg: SimConfig):
    """Best objective over a batch of time-share vectors.

    ``taus[k]`` is the array of candidate time shares for offloader k; all
    arrays have the same length (one entry per grid point). The inner energy
    search is an elementwise golden section.
    """
    npts = len(taus[0])
    total = np.zeros(npts)
    for k in range(len(taus)):
        tau_k = taus[k]
        ak, Yk, Qk, hk, Pk = a[k], Y[k], Q[k], h[k], P_max[k]

        def obj(e, tau_k=tau_k, ak=ak, Yk=Yk, Qk=Qk, hk=hk):
            with np.errstate(divide="ignore", invalid="ignore"):
                rate = (cfg.W_mhz * tau_k / cfg.v_u) * np.log1p(
                    e * hk / (np.maximum(tau_k, 1e-300) * cfg.N0)
                ) / np.log(2.0)
            rate = np.where(tau_k > 0, rate, 0.0)
            return ak * np.minimum(Qk, rate) - Yk * e

        total += golden_max_vec(obj, np.zeros(npts), Pk * tau_k)
    return float(np.max(total)), int(np.argmax(total))


def _simplex_grid(k: int, lo: np.ndarray, hi: np.ndarray, res: int):
    """Axis-aligned grid on [lo, hi]^k filtered to the unit time simplex."""
    axes = [np.linspace(lo[j], hi[j], res + 1) for j in range(k)]
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = [m.ravel() for m in mesh]
    keep = np.sum(flat, axis=0) <= 1.0 + 1e-12
    return [f[keep] for f in flat]


def convex_reference_p4(x, obs: FrameObservation, cfg: SimConfig,
                        grid_resolution: int = 200) -> float:
    """Grid-over-time-shares reference value for a fixed offloading vector.

    Offloaders are gridded on the time simplex (guarded to at most three);
    each grid point gets a per-device 1-D golden-section over transmit
    energy; local devices use a 1-D golden-section over CPU frequency.
    """
    x = np.asarray(x)
    a = obs.Q + cfg.V * cfg.c
    value = 0.0
    for j in np.where(x == 0)[0]:
        value += _local_reference(a[j], obs.Y[j], obs.Q[j], cfg.f_max[j], cfg)

    off = np.where(x == 1)[0]
    if len(off) > 3:
        raise ValueError("continuous reference is limited to 3 offloaders")
    if len(off):
        k = len(off)
        taus = _simplex_grid(k, np.zeros(k), np.ones(k), grid_resolution)
        best, _ = _offload_grid_best(
            taus, a[off], obs.Y[off], obs.Q[off], obs.h[off], cfg.P_max[off], cfg
        )
        value += best
    return value


def refined_reference_p4(x, obs: FrameObservation, cfg: SimConfig,
                         base_resolution: int = 60, levels: int = 4) -> float:
    """Multi-level zooming variant of the grid reference (tighter, same
    independence from the closed forms)."""
    x = np.asarray(x)
    a = obs.Q + cfg.V * cfg.c
    value = 0.0
    for j in np.where(x == 0)[0]:
        value += _local_reference(a[j], obs.Y[j], obs.Q[j], cfg.f_max[j], cfg)

    off = np.where(x == 1)[0]
    if len(off) > 3:
        raise ValueError("continuous reference is limited to 3 offloaders")
    if not len(off):
        return value

    k = len(off)
    lo = np.zeros(k)
    hi = np.ones(k)
    best = -np.inf
    for _ in range(levels):
        taus = _simplex_grid(k, lo, hi, base_resolution)
        v, idx = _offload_grid_best(
            taus, a[off], obs.Y[off], obs.Q[off], obs.h[off], cfg.P_max[off], cfg
        )
        best = max(best, v)
        center = np.array([taus[j][idx] for j in range(k)])
        width = (hi - lo) * (2.5 / base_resolution)
        lo = np.clip(center - width, 0.0, 1.0)
        hi = np.clip(center + width, 0.0, 1.0)
    return value + best
