import math

import numpy as np
import pytest

from pyspl.groundstate import DiskModeState, RectGroundState, SectorGroundState, hadamard_integral
from pyspl.numerics import DomainError, bessel_zero, gauss_legendre


def _rect_norm(state, x0, x1, y0, y1, m=24):
    t, w = gauss_legendre(m)
    x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * t
    y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * t
    X, Y = np.meshgrid(x, y, indexing="ij")
    values = state(np.stack([X.ravel(), Y.ravel()], axis=1))
    weights = np.outer(w, w).ravel() * 0.25 * (x1 - x0) * (y1 - y0)
    return float(np.dot(weights, values ** 2))


def test_rect_state():
    state = RectGroundState(0.0, math.pi, 0.0, math.pi)
    assert state.value == pytest.approx(2.0)
    assert _rect_norm(state, 0.0, math.pi, 0.0, math.pi) == pytest.approx(1.0, abs=1e-12)
    p = np.array([[0.3, 0.7]])
    h = 1e-6
    fd = (state(p + [[h, 0.0]]) - state(p - [[h, 0.0]])) / (2 * h)
    assert state.gradient(p)[0, 0] == pytest.approx(fd[0], abs=1e-8)


def test_rect_dilation_derivative():
    # X = x dilates about the origin; lambda' = -2 lambda
    state = RectGroundState(0.0, 1.5 * math.pi, 0.0, math.pi)
    assert hadamard_integral(state, lambda p: np.array(p)) == pytest.approx(-2 * state.value, rel=1e-10)


def test_disk_mode_state():
    state = DiskModeState(0, 1)
    assert state.value == pytest.approx(bessel_zero(0, 1) ** 2)
    assert hadamard_integral(state, lambda p: np.array(p)) == pytest.approx(-2 * state.value, rel=1e-10)
    translate = hadamard_integral(state, lambda p: np.tile([1.0, 0.0], (len(p), 1)))
    assert abs(translate) < 1e-10
    with pytest.raises(DomainError):
        DiskModeState(0, 1, kind="sin")


def test_disk_mode_orthogonal_kinds():
    cos_mode = DiskModeState(2, 1, kind="cos")
    sin_mode = DiskModeState(2, 1, kind="sin")
    assert cos_mode.value == pytest.approx(sin_mode.value)
    p = np.array([[0.5 * math.cos(math.pi / 4), 0.5 * math.sin(math.pi / 4)]])
    assert abs(cos_mode(p)[0]) < 1e-14


def test_sector_state():
    state = SectorGroundState(0.0, math.pi / 3)
    assert state.value == pytest.approx(40.7065, abs=1e-3)
    inside = np.array([[0.5 * math.cos(0.5), 0.5 * math.sin(0.5)]])
    outside = np.array([[0.5 * math.cos(2.0), 0.5 * math.sin(2.0)]])
    assert state(inside)[0] > 0
    assert state(outside)[0] == 0.0
    assert hadamard_integral(state, lambda p: np.array(p)) == pytest.approx(-2 * state.value, rel=1e-8)
    with pytest.raises(DomainError):
        SectorGroundState(0.0, 7.0)
