import itertools

import numpy as np
import pytest

from mecoffload import (
    FrameObservation,
    critic_select,
    evaluate_objective,
    solve_resource_allocation,
)
from mecoffload.oracles import enumerate_offloading
from mecoffload.scheduler import per_frame_weights

from conftest import random_observation


def test_per_frame_weights(cfg):
    obs = FrameObservation(t=1, h=cfg.mean_gains(), Q=np.zeros(cfg.N),
                           Y=np.zeros(cfg.N))
    w = per_frame_weights(obs, cfg)
    assert np.allclose(w.a, cfg.V * cfg.c)     # empty queues: a = V c
    assert w.a[0] == pytest.approx(30.0)       # 20 * 1.5
    assert np.all(w.yw == 0)
    obs2 = FrameObservation(t=1, h=cfg.mean_gains(), Q=np.full(cfg.N, 10.0),
                            Y=np.full(cfg.N, 2.0))
    w2 = per_frame_weights(obs2, cfg)
    assert w2.a[1] == pytest.approx(10.0 + 20.0)  # Q + V c with c=1
    assert np.all(w2.yw == 2.0)


def test_evaluate_objective_null_action(cfg3):
    rng = np.random.default_rng(0)
    obs = random_observation(rng, cfg3)
    from mecoffload import ResourceAllocation

    assert evaluate_objective(np.zeros(3, dtype=int),
                              ResourceAllocation.zeros(3), obs, cfg3) == 0.0


def test_evaluate_objective_matches_solver_value(cfg3):
    rng = np.random.default_rng(1)
    for _ in range(10):
        obs = random_observation(rng, cfg3)
        x = rng.integers(0, 2, 3)
        y, G = solve_resource_allocation(x, obs, cfg3)
        assert evaluate_objective(x, y, obs, cfg3) == pytest.approx(G, rel=1e-9)


def test_critic_select_singleton(cfg3):
    rng = np.random.default_rng(2)
    obs = random_observation(rng, cfg3)
    x = np.array([1, 0, 1])
    best = critic_select([x], obs, cfg3)
    assert np.array_equal(best.x, x)
    _, G = solve_resource_allocation(x, obs, cfg3)
    assert best.G == pytest.approx(G)
    assert best.index == 0


def test_critic_select_equals_enumeration(cfg3):
    rng = np.random.default_rng(3)
    for _ in range(5):
        obs = random_observation(rng, cfg3)
        cands = [np.array(b) for b in itertools.product((0, 1), repeat=3)]
        best = critic_select(cands, obs, cfg3)
        x_star, G_star = enumerate_offloading(obs, cfg3)
        assert best.G == pytest.approx(G_star, rel=1e-9)


def test_critic_select_tie_breaks_to_lowest_index(cfg3):
    rng = np.random.default_rng(4)
    obs = random_observation(rng, cfg3)
    x = np.array([0, 1, 0])
    best = critic_select([x, x.copy(), x.copy()], obs, cfg3)
    assert best.index == 0


def test_critic_select_monotone_in_candidates(cfg3):
    rng = np.random.default_rng(5)
    obs = random_observation(rng, cfg3)
    cands = [np.array(b) for b in itertools.product((0, 1), repeat=3)]
    g_prev = -np.inf
    for k in range(1, len(cands) + 1):
        g = critic_select(cands[:k], obs, cfg3).G
        assert g >= g_prev - 1e-12
        g_prev = g


def test_critic_select_rejects_empty(cfg3):
    rng = np.random.default_rng(6)
    obs = random_observation(rng, cfg3)
    with pytest.raises(ValueError):
        critic_select([], obs, cfg3)


def test_objective_relabeling_symmetry(cfg3):
    """Permuting devices together with their parameters preserves G."""
    from dataclasses import replace

    rng = np.random.default_rng(7)
    obs = random_observation(rng, cfg3)
    x = np.array([1, 0, 1])
    _, G = solve_resource_allocation(x, obs, cfg3)
    perm = np.array([2, 0, 1])
    cfgp = replace(cfg3, f_max=cfg3.f_max[perm], P_max=cfg3.P_max[perm],
                   gamma=cfg3.gamma[perm], c=cfg3.c[perm], d=cfg3.d[perm])
    obsp = FrameObservation(t=1, h=obs.h[perm], Q=obs.Q[perm], Y=obs.Y[perm])
    _, Gp = solve_resource_allocation(x[perm], obsp, cfgp)
    assert Gp == pytest.approx(G, rel=1e-9)
