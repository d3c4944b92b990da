import pytest
from hypothesis import given, strategies as st

from memestream.window import (
    WindowConfig, WindowModel, advance, damped_weight, expiry_cutoff, in_window, step_end,
    window_interval,
)


def test_reference_window():
    cfg = WindowConfig(delta_t=60, ell=6)
    assert window_interval(360, cfg) == (0, 360)


def test_single_step_window():
    cfg = WindowConfig(delta_t=3600, ell=1)
    assert window_interval(7200, cfg) == (3600, 7200)


def test_landmark_ignores_ell():
    cfg = WindowConfig(ell=2, model=WindowModel.LANDMARK)
    assert window_interval(99999, cfg) == (0, 99999)
    assert expiry_cutoff(99999, cfg) is None
    assert in_window(1, 99999, cfg)


@pytest.mark.parametrize("t,T,lam,w", [(5, 5, 1, 1.0), (4, 5, 1, 0.5), (4, 5, 2, 0.25)])
def test_damped(t, T, lam, w):
    assert damped_weight(t, T, lam) == w


def test_damped_contract():
    with pytest.raises(ValueError):
        damped_weight(6, 5, 1)
    with pytest.raises(ValueError):
        damped_weight(4, 5, 0)


def test_advance():
    cfg = WindowConfig(delta_t=3600)
    assert advance(0, cfg) == 3600
    assert advance(advance(10, cfg), cfg) == 10 + 7200
    assert advance(0, WindowConfig(delta_t=1800)) == 1800


@pytest.mark.parametrize("kw", [dict(delta_t=0), dict(ell=0), dict(model=WindowModel.DAMPED, lam=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        WindowConfig(**kw)


@given(st.integers(-10**6, 10**9), st.integers(1, 10**5), st.integers(-10**4, 10**4))
def test_step_end_contains_t(t, dt, origin):
    cfg = WindowConfig(delta_t=dt)
    T = step_end(t, cfg, origin)
    assert T - dt < t <= T
    assert (T - origin) % dt == 0


@given(st.integers(0, 10**7), st.integers(0, 10**7), st.integers(1, 10**4), st.integers(1, 20))
def test_sliding_membership(t, T, dt, ell):
    cfg = WindowConfig(delta_t=dt, ell=ell)
    assert in_window(t, T, cfg) == (T - ell * dt < t <= T)
    assert (t <= expiry_cutoff(T, cfg)) == (t <= T - ell * dt)


@given(st.integers(900, 1000), st.integers(900, 1000), st.floats(0.01, 5))
def test_damped_monotone(a, b, lam):
    T = 1000
    lo, hi = sorted((a, b))
    assert 0 < damped_weight(lo, T, lam) <= damped_weight(hi, T, lam) <= 1
