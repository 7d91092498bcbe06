"""Benchmark schedulers.

* Coordinate descent: bit-flip local search on the same per-frame objective
  as the learned policy, scored by the exact resource-allocation solver.
* Myopic: per-frame weighted-rate maximizer that ignores queue backlogs and
  instead enforces a hard cumulative energy budget per device.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import lambertw as _scipy_lambertw

from .config import SimConfig
from .env import FrameObservation
from .lambertw import lambert_w0
from .resource_alloc import (
    ResourceAllocation,
    max_transmission_rate,
    solve_resource_allocation,
    solve_resource_allocation_batch,
)
from .scheduler import CandidateEvaluation

_LN2 = np.log(2.0)


@dataclass
class EnergyLedger:
    """Cumulative consumed energy per device; budgets the myopic scheduler."""

    cumulative: np.ndarray
    t: int = 1

    @classmethod
    def fresh(cls, n: int) -> "EnergyLedger":
        return cls(cumulative=np.zeros(n), t=1)

    def budgets(self, gamma: np.ndarray) -> np.ndarray:
        return np.maximum(self.t * gamma - self.cumulative, 0.0)

    def record(self, e: np.ndarray) -> None:
        self.cumulative = self.cumulative + e
        self.t += 1


def _coordinate_descent(score, n: int, starts) -> tuple[np.ndarray, float]:
    """Best strictly-improving single-bit flips until a local optimum,
    restarted from each start point; returns the best (x, value)."""
    cache: dict[tuple, float] = {}

    def cached(x: np.ndarray) -> float:
        key = tuple(int(v) for v in x)
        if key not in cache:
            cache[key] = score(x)
        return cache[key]

    best_x, best_v = None, -np.inf
    for start in starts:
        x = np.array(start, dtype=int)
        v = cached(x)
        improved = True
        while improved:
            improved = False
            flip_v, flip_i = v, -1
            for i in range(n):
                x[i] ^= 1
                cand = cached(x)
                x[i] ^= 1
                if cand > flip_v:
                    flip_v, flip_i = cand, i
            if flip_i >= 0:
                x[flip_i] ^= 1
                v = flip_v
                improved = True
        if v > best_v:
            best_x, best_v = x.copy(), v
    return best_x, best_v


def cd_solve(obs: FrameObservation, cfg: SimConfig) -> CandidateEvaluation:
    """Coordinate-descent local optimum of the per-frame objective, started
    from all-local and all-offload.

    Each descent round scores all single-bit flips in one batched solve.
    """
    n = cfg.N
    cache: dict[tuple, tuple[ResourceAllocation, float]] = {}

    def evaluate(rows: np.ndarray) -> None:
        todo = [r for r in rows if tuple(r) not in cache]
        if todo:
            allocs, G = solve_resource_allocation_batch(np.array(todo), obs, cfg)
            for r, y, g in zip(todo, allocs, G):
                cache[tuple(r)] = (y, float(g))

    best_key, best_v = None, -np.inf
    for start in (np.zeros(n, dtype=int), np.ones(n, dtype=int)):
        x = start.copy()
        evaluate(x[None, :])
        v = cache[tuple(x)][1]
        while True:
            flips = np.tile(x, (n, 1))
            flips[np.arange(n), np.arange(n)] ^= 1
            evaluate(flips)
            vals = np.array([cache[tuple(r)][1] for r in flips])
            i = int(np.argmax(vals))
            if vals[i] <= v:
                break
            x[i] ^= 1
            v = float(vals[i])
        if v > best_v:
            best_key, best_v = tuple(x), v

    y, G = cache[best_key]
    return CandidateEvaluation(x=np.array(best_key, dtype=int), y=y, G=G)


# ----- myopic continuous subproblem -----

def _offload_tau_given_mu(mu: float, b, Q, h, cw, cfg: SimConfig, P_max):
    """Per-device optimal time share at time price mu for the myopic
    objective c * min(Q, rate) - mu * tau with energy capped at budget b.

    Transmit energy is min(P_max * tau, b): full power until the budget
    binds, then constant energy spread over the time share. The resulting
    rate is concave in tau, so the optimum is the interior stationary point
    (Lambert-W closed form) clipped by the rate-cap and frame-length bounds.
    Returns (tau, r, e).
    """
    b = np.asarray(b, dtype=float)
    Q = np.asarray(Q, dtype=float)
    h = np.asarray(h, dtype=float)
    cw = np.asarray(cw, dtype=float)
    P_max = np.asarray(P_max, dtype=float)
    n = len(b)

    r_max = max_transmission_rate(h, cfg, P_max)
    tau_b = b / P_max                      # time share where the budget binds
    beta = b * h / cfg.N0
    wm = cfg.W_mhz

    active = (b > 1e-15) & (Q > 1e-12)
    tau = np.zeros(n)

    # time share at which the rate reaches the backlog Q (inf if unreachable)
    tau_q = np.full(n, np.inf)
    m = active & (Q <= tau_b * r_max)
    tau_q[m] = Q[m] / r_max[m]
    m2 = active & ~m
    if np.any(m2):
        # budget-limited piece: solve (wm/v_u) tau log2(1 + beta/tau) = Q
        rho = Q[m2] * cfg.v_u * _LN2 / (wm * beta[m2])
        reachable = rho < 1.0
        s = np.full(rho.shape, np.inf)
        if np.any(reachable):
            arg = -rho[reachable] * np.exp(-rho[reachable])
            wv = np.real(_scipy_lambertw(arg, k=-1))
            s[reachable] = -wv / rho[reachable] - 1.0
        tq = beta[m2] / s
        tmp = tau_q[m2]
        tmp[reachable] = tq[reachable]
        tau_q[m2] = tmp

    # unconstrained maximizer of c * rate(tau) - mu * tau
    if mu <= 0:
        tau_u = np.full(n, np.inf)
    else:
        tau_u = np.zeros(n)
        pos = active & (cw * r_max > mu)
        if np.any(pos):
            theta = mu * cfg.v_u * _LN2 / (wm * cw[pos])
            v = -lambert_w0(-np.exp(-(theta + 1.0)))
            s_star = 1.0 / v - 1.0
            with np.errstate(divide="ignore"):
                tau_int = beta[pos] / s_star
            tau_u[pos] = np.where(tau_int <= tau_b[pos], tau_b[pos], tau_int)

    tau[active] = np.minimum.reduce(
        [tau_u[active], tau_q[active], np.ones(active.sum())]
    )

    r, e = _realize_tau(tau, b, Q, h, cfg, P_max)
    return tau, r, e


def _realize_tau(tau, b, Q, h, cfg: SimConfig, P_max):
    """Rate and energy produced by given time shares under the budget cap."""
    b = np.asarray(b, dtype=float)
    Q = np.asarray(Q, dtype=float)
    tau = np.asarray(tau, dtype=float)
    r_max = max_transmission_rate(h, cfg, P_max)
    tau_b = b / np.asarray(P_max, dtype=float)
    beta = b * np.asarray(h, dtype=float) / cfg.N0
    r = np.zeros(len(tau))
    on = tau > 1e-15
    full_power = on & (tau <= tau_b)
    r[full_power] = tau[full_power] * r_max[full_power]
    budgeted = on & ~full_power
    r[budgeted] = (cfg.W_mhz * tau[budgeted] / cfg.v_u) * np.log1p(
        beta[budgeted] / tau[budgeted]
    ) / _LN2
    r = np.minimum(r, Q)
    e = np.where(on, np.minimum(np.asarray(P_max, dtype=float) * tau, b), 0.0)
    return r, e


def _myopic_offload(off_idx, obs, budgets, cfg: SimConfig):
    """Time-dual bisection for the myopic offloading set."""
    b = budgets[off_idx]
    Q = obs.Q[off_idx]
    h = obs.h[off_idx]
    cw = cfg.c[off_idx]
    P = cfg.P_max[off_idx]

    def at(mu):
        return _offload_tau_given_mu(mu, b, Q, h, cw, cfg, P)

    tau, r, e = at(0.0)
    if tau.sum() <= 1.0:
        return tau, r, e

    lo, hi = 0.0, float(np.max(cw * max_transmission_rate(h, cfg, P))) + 1.0
    for _ in range(100):
        if hi - lo <= 1e-13 * hi:
            break
        mid = 0.5 * (lo + hi)
        tau, _, _ = at(mid)
        if tau.sum() > 1.0:
            lo = mid
        else:
            hi = mid

    # The per-device value is linear in tau on the full-power segment, so
    # tau(mu) can jump at the crossing price; start from the feasible
    # endpoint and hand the leftover time to the jumping devices (all of
    # which have marginal value ~mu*), capped at their lower-price shares.
    tau_hi, _, _ = at(hi)
    tau_lo, _, _ = at(lo)
    tau = tau_hi.copy()
    slack = 1.0 - tau.sum()
    if slack > 0:
        room = np.maximum(tau_lo - tau_hi, 0.0)
        for j in np.argsort(-room):
            give = min(room[j], slack)
            tau[j] += give
            slack -= give
            if slack <= 1e-15:
                break
    r, e = _realize_tau(tau, b, Q, h, cfg, P)
    return tau, r, e


def _myopic_value(x, obs, budgets, cfg: SimConfig):
    """Weighted-rate value and allocation of one binary vector under the
    cumulative energy budgets."""
    alloc = ResourceAllocation.zeros(cfg.N)
    value = 0.0

    local = np.where(np.asarray(x) == 0)[0]
    if len(local):
        f_mhz = np.minimum.reduce(
            [
                cfg.phi * obs.Q[local],
                cfg.f_max[local] / 1e6,
                np.cbrt(budgets[local] / cfg.kappa_tilde),
            ]
        )
        alloc.f[local] = f_mhz * 1e6
        value += float(np.dot(cfg.c[local], f_mhz / cfg.phi))

    off = np.where(np.asarray(x) == 1)[0]
    if len(off):
        tau, r, e = _myopic_offload(off, obs, budgets, cfg)
        alloc.tau[off] = tau
        alloc.r_O[off] = r
        alloc.e_O[off] = e
        value += float(np.dot(cfg.c[off], r))
    return value, alloc


def myopic_solve(obs: FrameObservation, ledger: EnergyLedger,
                 cfg: SimConfig) -> tuple[np.ndarray, ResourceAllocation]:
    """Maximize the per-frame weighted rate under the running energy budget.

    Binary part by coordinate descent from all-local; the caller records the
    realized energy into the ledger after executing the frame.
    """
    budgets = ledger.budgets(cfg.gamma)
    allocs: dict[tuple, ResourceAllocation] = {}

    def score(x: np.ndarray) -> float:
        v, alloc = _myopic_value(x, obs, budgets, cfg)
        allocs[tuple(int(b) for b in x)] = alloc
        return v

    x, _ = _coordinate_descent(score, cfg.N, [np.zeros(cfg.N, dtype=int)])
    return x, allocs[tuple(int(b) for b in x)]
