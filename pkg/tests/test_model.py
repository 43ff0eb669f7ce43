import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimir_wn.errors import InvalidArgument
from casimir_wn.model import (CavityParams, coupling_mu, f_vector, mode_frequency,
                              modulation_rate, trajectory)

BASE = CavityParams()


def test_trajectory():
    assert trajectory(BASE, 0.0) == 1.0
    assert trajectory(BASE, 0.25) == pytest.approx(math.exp(1 / 12))
    assert trajectory(CavityParams(q0=0.0), 3.7) == 1.0


def test_modulation_rate():
    assert modulation_rate(BASE, 0.0) == pytest.approx(math.pi / 6)
    assert modulation_rate(BASE, 0.25) == pytest.approx(0.0, abs=1e-15)
    assert modulation_rate(CavityParams(q0=0.0), 1.3) == 0.0


def test_modulation_rate_matches_finite_difference():
    h = 1e-6
    for t in np.linspace(0, 20, 201):
        fd = (math.log(trajectory(BASE, t + h)) - math.log(trajectory(BASE, t - h))) / (2 * h)
        assert abs(fd - modulation_rate(BASE, t)) < 1e-8


def test_mode_frequency():
    assert mode_frequency(BASE, 1, 0.0) == pytest.approx(math.pi)
    assert mode_frequency(BASE, 2, 0.0) == pytest.approx(2 * math.pi)
    assert mode_frequency(CavityParams(L=2.0, q0=0.0), 1, 5.0) == pytest.approx(math.pi / 2)
    with pytest.raises(InvalidArgument):
        mode_frequency(BASE, 3, 0.0)


def test_coupling_mu():
    assert coupling_mu(1, 2) == pytest.approx(2 * math.sqrt(2) / 3)
    assert coupling_mu(2, 1) == pytest.approx(-math.sqrt(2) / 3)
    assert coupling_mu(1, 2) + coupling_mu(2, 1) == pytest.approx(math.sqrt(2) / 3)
    assert coupling_mu(1, 2) - coupling_mu(2, 1) == pytest.approx(math.sqrt(2))
    with pytest.raises(InvalidArgument):
        coupling_mu(1, 1)


def test_params_validation():
    with pytest.raises(InvalidArgument):
        CavityParams(L=0.0)
    with pytest.raises(InvalidArgument):
        CavityParams(q0=-0.1)
    with pytest.raises(InvalidArgument):
        CavityParams(omega_d=float("nan"))
    with pytest.warns(UserWarning):
        CavityParams(q0=0.25)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        CavityParams(q0=0.1)


def test_params_from_dict():
    p = CavityParams.from_dict({"q0": 0.05, "omega_d": 3.0})
    assert p.q0 == 0.05 and p.omega_d == 3.0 and p.L == 1.0
    assert CavityParams.from_dict(p.to_dict()) == p
    with pytest.raises(InvalidArgument):
        CavityParams.from_dict({"length": 1.0})


def test_f_vector_at_zero():
    f = f_vector(BASE, 0.0)
    assert f[0] == pytest.approx(1j * math.pi / 24)
    assert f[5] == pytest.approx(math.pi)
    assert f[6] == pytest.approx(2 * math.pi)


def test_f_vector_static():
    f = f_vector(CavityParams(q0=0.0), 2.2)
    assert np.count_nonzero(f) == 2
    assert f[5] == math.pi and f[6] == 2 * math.pi


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 20), st.floats(0, 0.15), st.floats(0.5, 10), st.floats(-3, 3))
def test_f_vector_relations(t, q0, wd, phi):
    p = CavityParams(q0=q0, omega_d=wd, phi=phi)
    f = f_vector(p, t)
    assert f[7] == -f[0] and f[8] == -f[1] and f[9] == -f[2] and f[4] == -f[3]
    assert f[10] == 0
    assert f[0] == f[1] and f[0].real == 0
    assert f[5].imag == 0 and f[5].real > 0 and f[6] == pytest.approx(2 * f[5])
    assert f[5].real * trajectory(p, t) == pytest.approx(math.pi)
