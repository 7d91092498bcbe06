"""Exact optimal resource allocation for a fixed binary offloading vector.

For the local set the optimum is a per-device closed form; for the offloading
set the TDMA time-sharing constraint is dualized, the per-device optimum rate
ratio comes from a Lambert-W closed form, the dual variable is found by
bisection on the time subgradient, and a single-constraint LP (solved exactly
by greedy fractional knapsack) recovers a primal-feasible allocation.

All math in this module runs in solver units: Mbit / Mbps / MHz / watt.
CPU frequencies cross the module boundary in Hz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .env import FrameObservation
from .lambertw import lambert_w0

# floor on the rate ratio so tau = r / l stays finite when the time price is 0
_L_FLOOR = 1e-9


@dataclass
class ResourceAllocation:
    """Continuous action: time shares, CPU frequencies [Hz], offload energy
    [J per frame], offload rates [Mbps]."""

    tau: np.ndarray
    f: np.ndarray
    e_O: np.ndarray
    r_O: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "ResourceAllocation":
        return cls(np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(n))


@dataclass
class DualEvaluation:
    """Per-offloader quantities at a fixed time price mu."""

    mu: float
    l: np.ndarray        # optimal rate per unit time-share [Mbps]
    r: np.ndarray        # bang-bang rate decision [Mbit]
    w: np.ndarray        # rate reward coefficient at this mu
    tau: np.ndarray      # implied time shares r / l


def rate_energy_density(l, cfg: SimConfig):
    """Transmit power needed to sustain rate ``l`` Mbps for a unit time share."""
    return cfg.N0 * (np.exp2(np.asarray(l) * cfg.v_u / cfg.W_mhz) - 1.0)


def max_transmission_rate(h, cfg: SimConfig, P_max=None):
    """Full-power Shannon rate [Mbps]."""
    if P_max is None:
        P_max = cfg.P_max
    return (cfg.W_mhz / cfg.v_u) * np.log1p(np.asarray(P_max) * np.asarray(h) / cfg.N0) / np.log(2.0)


def optimal_local_frequency(a, Y, Q, f_max_hz, cfg: SimConfig):
    """Closed-form local CPU frequency [Hz] maximizing a*f/phi - Y*kappa*f^3.

    Capped by data causality (phi * Q) and the hardware maximum; a zero
    energy penalty saturates the caps.
    """
    a = np.asarray(a, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Q = np.asarray(Q, dtype=float)
    cap = np.minimum(cfg.phi * Q, np.asarray(f_max_hz, dtype=float) / 1e6)
    with np.errstate(divide="ignore"):
        interior = np.sqrt(a / (3.0 * cfg.phi * cfg.kappa_tilde * np.maximum(Y, 0.0)))
    interior = np.where(Y > 0, interior, np.inf)
    return np.minimum(interior, cap) * 1e6


def _psi_threshold(mu: float, Y: np.ndarray, P_max: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """Channel threshold below which full transmit power is optimal."""
    A = 1.0 + mu / (Y * P_max)
    with np.errstate(over="ignore", under="ignore"):
        z = -A * np.exp(-A)
    psi = np.full_like(A, np.inf)
    ok = z < 0  # exp(-A) underflow => threshold effectively infinite
    if np.any(ok):
        wneg = -lambert_w0(z[ok])  # in (0, 1]
        with np.errstate(over="ignore"):
            psi[ok] = (cfg.N0 / P_max[ok]) * (A[ok] / wneg - 1.0)
    return psi


def optimal_tau_ratio(mu: float, Y, h, cfg: SimConfig, P_max=None):
    """Optimal offload rate per unit time share at time price ``mu`` [Mbps].

    Weak channels (below the power threshold) or a zero energy penalty pin
    the transmitter at full power; otherwise the concave rate/energy
    trade-off has a Lambert-W interior optimum.
    """
    Y = np.atleast_1d(np.asarray(Y, dtype=float))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if P_max is None:
        P_max = cfg.P_max[: len(h)] if len(cfg.P_max) >= len(h) else np.full(len(h), cfg.P_max[0])
    P_max = np.atleast_1d(np.asarray(P_max, dtype=float))

    r_max = max_transmission_rate(h, cfg, P_max)
    l = np.array(r_max, dtype=float)

    # The unconstrained stationary rate exceeds the full-power rate exactly
    # when the channel is below the power threshold, so evaluating the
    # interior formula and clipping at r_max covers both regimes.
    pen = Y > 0
    if np.any(pen):
        arg = (mu * h[pen] / (Y[pen] * cfg.N0) - 1.0) / np.e
        wval = lambert_w0(np.maximum(arg, -1.0 / np.e))
        l_int = (cfg.W_mhz / (np.log(2.0) * cfg.v_u)) * (wval + 1.0)
        l[pen] = np.clip(l_int, _L_FLOOR, r_max[pen])
    return np.maximum(l, _L_FLOOR)


def dual_rate_decision(mu: float, a, Y, h, Q, l, cfg: SimConfig):
    """Bang-bang offload rate at time price mu: full backlog if the rate
    reward coefficient is positive, else zero. Returns (r, w)."""
    a = np.asarray(a, dtype=float)
    Y = np.asarray(Y, dtype=float)
    h = np.asarray(h, dtype=float)
    Q = np.asarray(Q, dtype=float)
    l = np.asarray(l, dtype=float)
    w = a - mu / l - Y * rate_energy_density(l, cfg) / (l * h)
    r = np.where(w > 0, Q, 0.0)
    return r, w


def _dual_eval(mu: float, a, Y, h, Q, P_max, cfg: SimConfig) -> DualEvaluation:
    l = optimal_tau_ratio(mu, Y, h, cfg, P_max)
    r, w = dual_rate_decision(mu, a, Y, h, Q, l, cfg)
    tau = r / l
    return DualEvaluation(mu=mu, l=l, r=r, w=w, tau=tau)


def bisect_dual(a, Y, h, Q, P_max, cfg: SimConfig) -> float:
    """Time-price bisection on the subgradient 1 - sum(tau*(mu))."""
    if _dual_eval(0.0, a, Y, h, Q, P_max, cfg).tau.sum() <= 1.0:
        return 0.0
    ub = cfg.mu_ub_init
    for _ in range(200):
        if _dual_eval(ub, a, Y, h, Q, P_max, cfg).tau.sum() <= 1.0:
            break
        ub *= 2.0
    lb = 0.0
    mu = ub
    # relative stop: the recovered rates are only as accurate as l(mu)
    for _ in range(200):
        if ub - lb <= cfg.sigma0 * max(ub, 1.0):
            break
        mu = 0.5 * (ub + lb)
        if _dual_eval(mu, a, Y, h, Q, P_max, cfg).tau.sum() > 1.0:
            lb = mu
        else:
            ub = mu
    return ub


def primal_recovery(mu: float, a, Y, h, Q, P_max, cfg: SimConfig):
    """Recover a primal-feasible offload allocation at the optimal dual.

    With the rate ratios frozen at l(mu*), the remaining problem is an LP
    with a single time-packing constraint and box bounds, solved exactly by
    greedy fractional knapsack in decreasing reward-per-unit-time order
    (index order on ties). Returns (r_O, tau, e_O).
    """
    a = np.asarray(a, dtype=float)
    Y = np.asarray(Y, dtype=float)
    h = np.asarray(h, dtype=float)
    Q = np.asarray(Q, dtype=float)
    l = optimal_tau_ratio(mu, Y, h, cfg, P_max)
    w = a - Y * rate_energy_density(l, cfg) / (l * h)

    r = np.zeros(len(h))
    tau = np.zeros(len(h))
    remaining = 1.0
    order = np.argsort(-(w * l), kind="stable")
    for j in order:
        if w[j] <= 0 or remaining <= 0:
            continue
        t_j = min(Q[j] / l[j], remaining)
        tau[j] = t_j
        r[j] = t_j * l[j]
        remaining -= t_j
    e = np.where(tau > 0, tau * rate_energy_density(l, cfg) / h, 0.0)
    return r, tau, e


def solve_resource_allocation_batch(X, obs: FrameObservation, cfg: SimConfig):
    """Solve the fixed-x allocation for every row of ``X`` at once.

    Same math as :func:`solve_resource_allocation` with the dual bisection
    running on all rows in parallel; much faster when scoring many candidate
    offloading vectors against one observation. Returns ``(allocs, G)`` with
    ``allocs`` a list of :class:`ResourceAllocation` and ``G`` an array.
    """
    from scipy import special

    X = np.atleast_2d(np.asarray(X, dtype=int))
    M, N = X.shape
    a = obs.Q + cfg.V * cfg.c
    Y, h, Q = obs.Y, obs.h, obs.Q
    ln2 = np.log(2.0)

    # local closed form is per device; rows only select which devices use it
    f_hz = optimal_local_frequency(a, Y, Q, cfg.f_max, cfg)
    f_mhz = f_hz / 1e6
    v_local = a * f_mhz / cfg.phi - Y * cfg.kappa_tilde * f_mhz**3

    off = X == 1
    coef = cfg.W_mhz / (ln2 * cfg.v_u)
    k2 = cfg.v_u * ln2 / cfg.W_mhz          # g(l) = N0 * expm1(k2 * l)
    r_max = max_transmission_rate(h, cfg)
    pen = Y > 0
    harg = np.where(pen, h / np.where(pen, Y, 1.0) / cfg.N0, 0.0)

    def dual_state(mu):
        """l, bang-bang weights, and per-row time sums at row prices mu."""
        arg = np.maximum((mu[:, None] * harg[None, :] - 1.0) / np.e, -1.0 / np.e)
        wv = special.lambertw(arg).real
        wv = np.where(arg <= -1.0 / np.e, -1.0, wv)  # scipy NaNs at the branch point
        l_int = coef * (wv + 1.0)
        l = np.where(pen[None, :],
                     np.clip(l_int, _L_FLOOR, r_max[None, :]), r_max[None, :])
        dens = cfg.N0 * np.expm1(k2 * l)
        w = a[None, :] - mu[:, None] / l - Y[None, :] * dens / (l * h[None, :])
        tau_sum = np.where(off & (w > 0), Q[None, :] / l, 0.0).sum(axis=1)
        return l, w, dens, tau_sum

    _, _, _, ts0 = dual_state(np.zeros(M))
    need = ts0 > 1.0
    ub = np.where(need, cfg.mu_ub_init, 0.0)
    for _ in range(200):
        _, _, _, ts = dual_state(ub)
        bad = need & (ts > 1.0)
        if not bad.any():
            break
        ub[bad] *= 2.0
    lo = np.zeros(M)
    for _ in range(200):
        if np.all(ub - lo <= cfg.sigma0 * np.maximum(ub, 1.0)):
            break
        mid = 0.5 * (lo + ub)
        _, _, _, ts = dual_state(mid)
        gt = need & (ts > 1.0)
        lo = np.where(gt, mid, lo)
        ub = np.where(need & ~gt, mid, ub)

    l_fin, _, dens_fin, _ = dual_state(ub)
    w_rec = a[None, :] - Y[None, :] * dens_fin / (l_fin * h[None, :])

    allocs = []
    G = np.zeros(M)
    for m in range(M):
        alloc = ResourceAllocation.zeros(N)
        loc = ~off[m]
        alloc.f[loc] = f_hz[loc]
        g = float(v_local[loc].sum())
        idx = np.where(off[m])[0]
        if len(idx):
            lm, wm = l_fin[m, idx], w_rec[m, idx]
            remaining = 1.0
            order = np.argsort(-(wm * lm), kind="stable")
            for j in order:
                if wm[j] <= 0 or remaining <= 0:
                    continue
                t_j = min(Q[idx[j]] / lm[j], remaining)
                i = idx[j]
                alloc.tau[i] = t_j
                alloc.r_O[i] = t_j * lm[j]
                alloc.e_O[i] = t_j * dens_fin[m, idx[j]] / h[i]
                remaining -= t_j
            g += float(np.sum(a[idx] * alloc.r_O[idx] - Y[idx] * alloc.e_O[idx]))
        allocs.append(alloc)
        G[m] = g
    return allocs, G


def solve_resource_allocation(
    x, obs: FrameObservation, cfg: SimConfig
) -> tuple[ResourceAllocation, float]:
    """Optimal continuous allocation and objective value for a fixed binary
    offloading vector.

    The objective is sum_i a_i r_i - sum_i Y_i e_i with a_i = Q_i + V c_i.
    Always returns a feasible allocation (all-zero is feasible).
    """
    x = np.asarray(x)
    a = obs.Q + cfg.V * cfg.c
    alloc = ResourceAllocation.zeros(cfg.N)
    G = 0.0

    local = np.where(x == 0)[0]
    if len(local):
        f = optimal_local_frequency(
            a[local], obs.Y[local], obs.Q[local], cfg.f_max[local], cfg
        )
        alloc.f[local] = f
        f_mhz = f / 1e6
        G += float(
            np.sum(a[local] * f_mhz / cfg.phi - obs.Y[local] * cfg.kappa_tilde * f_mhz**3)
        )

    off = np.where(x == 1)[0]
    if len(off):
        ao, Yo, ho, Qo, Po = a[off], obs.Y[off], obs.h[off], obs.Q[off], cfg.P_max[off]
        mu = bisect_dual(ao, Yo, ho, Qo, Po, cfg)
        r, tau, e = primal_recovery(mu, ao, Yo, ho, Qo, Po, cfg)
        alloc.r_O[off] = r
        alloc.tau[off] = tau
        alloc.e_O[off] = e
        G += float(np.sum(ao * r - Yo * e))

    return alloc, G
