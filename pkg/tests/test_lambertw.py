import numpy as np
import pytest

from mecoffload import lambert_w0


def test_identity_points():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(-1.0 / np.e) == pytest.approx(-1.0, abs=1e-12)
    assert lambert_w0(1.0) == pytest.approx(0.5671432904097838, abs=1e-12)
    assert lambert_w0(np.e) == pytest.approx(1.0, abs=1e-12)


def test_roundtrip_residual_double_grid():
    # double input takes the fast path; residual is machine precision
    # relative to x (the absolute 1e-10 bound is checked on the
    # extended-precision path below and in the acceptance suite)
    x = np.concatenate([
        np.linspace(-1.0 / np.e, 1.0, 2000),
        np.logspace(0.0, 6.0, 2000),
    ])
    w = lambert_w0(x)
    res = np.abs(w * np.exp(w) - x)
    assert np.max(res / np.maximum(np.abs(x), 1.0)) <= 1e-14


def test_roundtrip_residual_extended_grid():
    x = np.concatenate([
        np.linspace(-1.0 / np.e, 1.0, 2000),
        np.logspace(0.0, 6.0, 2000),
    ]).astype(np.longdouble)
    w = lambert_w0(x)
    assert float(np.max(np.abs(w * np.exp(w) - x))) <= 1e-10


def test_longdouble_path():
    x = np.logspace(-3, 5, 50).astype(np.longdouble)
    w = lambert_w0(x)
    assert w.dtype == np.longdouble
    res = np.abs(w * np.exp(w) - x)
    assert float(res.max()) <= 1e-12


def test_domain_errors():
    with pytest.raises(ValueError):
        lambert_w0(-1.0 / np.e - 1e-6)
    with pytest.raises(ValueError):
        lambert_w0(np.nan)
    with pytest.raises(ValueError):
        lambert_w0(np.inf)


def test_shapes_and_monotonicity():
    x = np.array([[0.0, 1.0], [2.0, 3.0]])
    w = lambert_w0(x)
    assert w.shape == x.shape
    flat = lambert_w0(np.linspace(-1 / np.e, 10, 300))
    assert np.all(np.diff(flat) >= 0)
    assert np.all(flat >= -1.0)
