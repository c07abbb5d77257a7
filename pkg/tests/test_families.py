import math

import numpy as np
import pytest

from pyspl.families import FAMILIES, DiskCosine, DiskDilation, DiskTranslation, RectWidth, SquareShear, disk_mesh
from pyspl.groundstate import DiskModeState, RectGroundState
from pyspl.numerics import DomainError, bessel_zero

POINTS = np.array([[0.3, -0.2], [0.0, 0.9], [-0.5, 0.5]])


def test_registry():
    assert set(FAMILIES) == {"rect-width", "disk-dilation", "disk-translation", "disk-cosine", "square-shear"}
    for name, cls in FAMILIES.items():
        assert cls().name == name


@pytest.mark.parametrize("cls", [RectWidth, DiskDilation, DiskTranslation, DiskCosine, SquareShear])
def test_jacobian_matches_velocity(cls):
    family = cls()
    h = 1e-6
    J = family.velocity_jacobian(POINTS)
    for axis in range(2):
        step = np.zeros(2)
        step[axis] = h
        fd = (family.velocity(POINTS + step) - family.velocity(POINTS - step)) / (2 * h)
        assert np.allclose(J[:, :, axis], fd, atol=1e-8)


def test_velocity_derivative():
    # dilation: X' = -(DV) V = -x
    assert np.allclose(DiskDilation().velocity_derivative(POINTS), -POINTS)
    assert np.allclose(DiskCosine().velocity_derivative(POINTS), 0.0)
    assert np.allclose(DiskTranslation().velocity_derivative(POINTS), 0.0)


def test_reference_states():
    assert isinstance(RectWidth(2.0).reference_state(), RectGroundState)
    assert isinstance(DiskCosine().reference_state(), DiskModeState)
    assert SquareShear().reference_state() is None


def test_rect_width_solve():
    family = RectWidth(1.5)
    assert family.solve(0.0, n=12).value == pytest.approx(1 / 2.25 + 1, rel=1e-10)
    assert family.solve(0.5, n=12).value == pytest.approx(1 / 4 + 1, rel=1e-10)
    with pytest.raises(DomainError):
        RectWidth(0.0)


def test_disk_solve():
    value = DiskDilation().solve(0.0, n=12).value
    assert value == pytest.approx(bessel_zero(0, 1) ** 2, rel=1e-9)
    moved = DiskTranslation().solve(0.3, n=12).value
    assert moved == pytest.approx(value, rel=1e-9)


def test_disk_mesh():
    mesh = disk_mesh(8)
    assert len(mesh.cells) == 8
    outer = [c for c in mesh.cells if c.u1 == pytest.approx(1.0)]
    assert len(outer) == 4


def test_square_shear_solve():
    sample = SquareShear().solve(0.0, n=12)
    assert sample.value == pytest.approx(8.0, abs=1e-8)
    assert sample.vector is None


def test_mapping_identity_at_zero():
    jac = DiskCosine().mapping(0.0)
    F = jac(np.array([0.2, 0.4]), np.array([0.1, -0.3]))
    assert np.allclose(F, np.eye(2)[None, :, :])
    assert math.isclose(np.linalg.det(RectWidth(2.0).mapping(1.0)(np.array([1.0]), np.array([1.0])))[0], 1.5)
