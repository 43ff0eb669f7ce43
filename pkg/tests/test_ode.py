import numpy as np
import pytest

from casimir_wn.errors import IntegrationFailure
from casimir_wn.ode import DormandPrince


def test_harmonic_oscillator_global_error():
    # y' = -i w y has the exact solution exp(-i w t)
    w = 2 * np.pi
    t = np.linspace(0, 20, 401)
    res = DormandPrince(lambda t, y: -1j * w * y, rtol=1e-10, atol=1e-12).solve(0.0, [1.0], t)
    assert np.abs(res.y[:, 0] - np.exp(-1j * w * t)).max() < 1e-8
    assert res.y[0, 0] == 1.0


def test_dense_output_between_steps():
    t = np.linspace(0, 1, 1001)
    res = DormandPrince(lambda t, y: y, rtol=1e-9, atol=1e-12).solve(0.0, [1.0], t)
    assert len(res.steps) < len(t)
    assert np.abs(res.y[:, 0] - np.exp(t)).max() < 1e-8


def test_blow_up_raises_integration_failure():
    # y' = y^2 with y(0) = 1 diverges at t = 1
    with pytest.raises(IntegrationFailure) as info:
        DormandPrince(lambda t, y: y * y, rtol=1e-8, atol=1e-10).solve(0.0, [1.0], [0.0, 2.0])
    assert info.value.t_last == pytest.approx(1.0, abs=1e-6)


class Flaky(Exception):
    pass


def test_retry_on_halves_step():
    calls = {"n": 0}

    def f(t, y):
        calls["n"] += 1
        if calls["n"] in (3, 4):
            raise Flaky
        return -y

    res = DormandPrince(f, retry_on=(Flaky,)).solve(0.0, [1.0], [0.0, 1.0])
    assert res.n_rejected >= 1
    assert abs(res.y[-1, 0] - np.exp(-1.0)) < 1e-9


def test_retry_limit():
    def f(t, y):
        if t > 0.5:
            raise Flaky
        return -y

    with pytest.raises((Flaky, IntegrationFailure)):
        DormandPrince(f, retry_on=(Flaky,), max_retries=5).solve(0.0, [1.0], [0.0, 1.0])


def test_bad_tolerances():
    with pytest.raises(ValueError):
        DormandPrince(lambda t, y: y, rtol=0.0)
