import numpy as np
import pytest

from mecoffload import FrameObservation, default_config, sample_channel


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def cfg3():
    return default_config().with_devices(3)


def random_observation(rng, cfg, gains=None, q_mean=10.0, y_mean=1.0):
    """A random but physically plausible solver input."""
    if gains is None:
        gains = cfg.mean_gains()
    return FrameObservation(
        t=1,
        h=sample_channel(rng, cfg, gains),
        Q=rng.exponential(q_mean, cfg.N),
        Y=rng.exponential(y_mean, cfg.N),
    )


def check_allocation_feasible(x, y, obs, cfg, tol=1e-9):
    """Assert every allocation constraint with the given slack."""
    x = np.asarray(x)
    off = x == 1
    loc = ~off
    assert np.all(y.tau >= -tol) and np.all(y.f >= -tol)
    assert np.all(y.e_O >= -tol) and np.all(y.r_O >= -tol)
    assert y.tau[off].sum() <= 1.0 + tol
    assert np.all(y.tau[loc] == 0) and np.all(y.e_O[loc] == 0)
    assert np.all(y.r_O[loc] == 0)
    assert np.all(y.f[off] == 0)
    assert np.all(y.f <= np.minimum(cfg.phi * obs.Q * 1e6, cfg.f_max) + tol * 1e6)
    assert np.all(y.e_O <= cfg.P_max * y.tau + tol)
    assert np.all(y.r_O <= obs.Q + tol)
