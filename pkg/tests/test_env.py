import numpy as np
import pytest

from mecoffload import (
    ArrivalModel,
    ArrivalProcess,
    ResourceAllocation,
    default_config,
    frame_outcome,
    mean_channel_gain,
    sample_channel,
    update_queues,
)
from mecoffload.env import FrameOutcome


def test_mean_channel_gain_value(cfg):
    # free-space path-loss form at 120 m, A_d=3, f_c=915 MHz, cubic exponent
    g = mean_channel_gain(120.0, cfg)
    assert g == pytest.approx(3.083e-11, rel=2e-3)


def test_mean_channel_gain_cubic_scaling(cfg):
    assert mean_channel_gain(240.0, cfg) == pytest.approx(
        mean_channel_gain(120.0, cfg) / 8.0, rel=1e-12
    )


def test_mean_channel_gain_rejects_nonpositive(cfg):
    with pytest.raises(ValueError):
        mean_channel_gain(0.0, cfg)


def test_sample_channel_monte_carlo_mean(cfg):
    rng = np.random.default_rng(0)
    gains = cfg.mean_gains()
    total = np.zeros(cfg.N)
    reps = 10000
    for _ in range(reps):
        total += sample_channel(rng, cfg, gains)
    assert np.allclose(total / reps, gains, rtol=0.05)


def test_sample_channel_positive_and_degenerate():
    cfg = default_config(rician_los_fraction=1.0)
    rng = np.random.default_rng(1)
    gains = cfg.mean_gains()
    h = sample_channel(rng, cfg, gains)
    assert np.allclose(h, gains)  # pure line of sight is deterministic
    cfg2 = default_config()
    draws = np.array([sample_channel(rng, cfg2, gains) for _ in range(200)])
    assert np.all(draws > 0)


def test_arrivals_iid_mean(cfg):
    rng = np.random.default_rng(2)
    proc = ArrivalProcess(cfg.arrival)
    total = np.zeros(cfg.N)
    reps = 20000
    for _ in range(reps):
        total += proc.step(rng, cfg)
    assert np.allclose(total / reps, 3.0, rtol=0.05)


def test_arrivals_onoff_long_run_mean(cfg):
    rng = np.random.default_rng(3)
    model = ArrivalModel(kind="markov_onoff", lam=np.full(cfg.N, 3.0))
    proc = ArrivalProcess(model)
    total = np.zeros(cfg.N)
    zeros = 0
    reps = 40000
    for _ in range(reps):
        A = proc.step(rng, cfg)
        zeros += int(not A.any())
        total += A
    assert np.allclose(total / reps, 3.0, rtol=0.05)
    # matrix [[0.1,0.9],[0.9,0.1]] mixes fast: about half the frames are OFF
    assert 0.45 < zeros / reps < 0.55


def test_frame_outcome_local_closed_form(cfg):
    y = ResourceAllocation.zeros(cfg.N)
    y.f[0] = 100e6
    out = frame_outcome(np.zeros(cfg.N, dtype=int), y, cfg.mean_gains(), cfg)
    assert out.r[0] == pytest.approx(1.0)      # 100 MHz / 100 cycles-per-bit
    assert out.e[0] == pytest.approx(0.01)     # kappa * f^3
    assert out.D[0] == pytest.approx(out.r[0] * cfg.T)


def test_frame_outcome_offload_rate(cfg):
    x = np.zeros(cfg.N, dtype=int)
    x[0] = 1
    y = ResourceAllocation.zeros(cfg.N)
    y.tau[0] = 1.0
    y.e_O[0] = 0.1  # full power for the whole frame
    h = np.full(cfg.N, 3.083e-11)
    out = frame_outcome(x, y, h, cfg)
    assert out.r[0] == pytest.approx(15.6, rel=0.01)
    assert out.e[0] == pytest.approx(0.1)


def test_frame_outcome_zero_time_share(cfg):
    x = np.ones(cfg.N, dtype=int)
    y = ResourceAllocation.zeros(cfg.N)
    out = frame_outcome(x, y, cfg.mean_gains(), cfg)
    assert np.all(out.r == 0) and np.all(out.e == 0)


def test_frame_outcome_rejects_negative_entries(cfg):
    y = ResourceAllocation.zeros(cfg.N)
    y.tau[0] = -0.5
    with pytest.raises(ValueError):
        frame_outcome(np.ones(cfg.N, dtype=int), y, cfg.mean_gains(), cfg)


def test_frame_outcome_deterministic(cfg):
    rng = np.random.default_rng(5)
    x = rng.integers(0, 2, cfg.N)
    y = ResourceAllocation.zeros(cfg.N)
    y.tau[x == 1] = 0.05
    y.e_O[x == 1] = 0.001
    y.f[x == 0] = 1e8
    h = sample_channel(rng, cfg, cfg.mean_gains())
    o1 = frame_outcome(x, y, h, cfg)
    o2 = frame_outcome(x, y, h, cfg)
    assert np.array_equal(o1.r, o2.r) and np.array_equal(o1.e, o2.e)


def _outcome(cfg, D, e):
    return FrameOutcome(D=D, r=D / cfg.T, e=e, weighted_rate=float(np.dot(cfg.c, D)))


def test_update_queues_arithmetic(cfg):
    N = cfg.N
    Q = np.full(N, 5.0)
    Y = np.zeros(N)
    out = _outcome(cfg, np.full(N, 2.0), np.full(N, 0.1))
    Q2, Y2 = update_queues(Q, Y, out, np.full(N, 3.0), cfg)
    assert np.allclose(Q2, 6.0)
    assert np.allclose(Y2, 20.0)  # 1000 * (0.1 - 0.08)


def test_update_queues_clamps_energy_queue(cfg):
    N = cfg.N
    out = _outcome(cfg, np.zeros(N), np.full(N, 0.06))
    _, Y2 = update_queues(np.zeros(N), np.full(N, 10.0), out, np.zeros(N), cfg)
    assert np.allclose(Y2, 0.0)


def test_update_queues_rejects_causality_violation(cfg):
    N = cfg.N
    out = _outcome(cfg, np.full(N, 2.0), np.zeros(N))
    with pytest.raises(ValueError):
        update_queues(np.ones(N), np.zeros(N), out, np.zeros(N), cfg)
