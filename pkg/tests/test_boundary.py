import math

import numpy as np
import pytest

from pyspl.boundary import BoundaryField, DeformationField, arc_bump_field, smooth_bump
from pyspl.families import SquareShear
from pyspl.numerics import DomainError
from pyspl.partition import orient_interfaces


def test_smooth_bump():
    t = np.array([-2.0, -1.0, 0.0, 0.5, 1.0])
    values = smooth_bump(t)
    assert values[2] == pytest.approx(1.0)
    assert values[0] == values[1] == values[4] == 0.0
    assert 0 < values[3] < 1
    assert smooth_bump(np.array([2.0]), 1.0, 3.0)[0] == pytest.approx(1.0)


def test_constant_field_integral(square_cross):
    f = BoundaryField.from_function(square_cross, lambda pts, arc: np.ones(len(pts)))
    assert f.integral() == pytest.approx(2 * math.pi, abs=1e-12)
    assert f.l2_inner(f) == pytest.approx(2 * math.pi, abs=1e-12)
    assert f.sup() == 1.0


def test_zero_corners(square_cross):
    f = BoundaryField.from_function(square_cross, lambda pts, arc: np.ones(len(pts)), zero_corners=True)
    center = square_cross.interior_corners()[0].id
    assert f.corner_values[center] == 0.0
    # the end at the outer boundary keeps its value
    for arc in square_cross.interfaces:
        values = f.samples[arc.id]
        assert 0.0 in (values[0], values[-1])
        assert f.evaluate(arc.id, 0.0)[0] == pytest.approx(1.0)


def test_field_arithmetic(rect_cross):
    f = BoundaryField.from_function(rect_cross, lambda pts, arc: pts[:, 0])
    g = BoundaryField.from_function(rect_cross, lambda pts, arc: pts[:, 1])
    assert (f + g).integral() == pytest.approx(f.integral() + g.integral())
    assert (f - f).sup() == 0.0
    assert (2.0 * f).integral() == pytest.approx(2 * f.integral())
    assert (f * g).integral() == pytest.approx(f.l2_inner(g))


def test_interpolation_off_nodes(rect_cross):
    f = BoundaryField.from_function(rect_cross, lambda pts, arc: np.sin(pts[:, 0]) + pts[:, 1])
    plain = BoundaryField(f.partition, f.samples, f.corner_values)
    arc = rect_cross.interfaces[0]
    t = np.array([-0.7, 0.1, 0.55])
    assert np.allclose(plain.evaluate(arc.id, t), f.evaluate(arc.id, t), atol=1e-12)


def test_rejects_short_or_bad_samples(square_cross):
    with pytest.raises(DomainError):
        BoundaryField(square_cross, {0: np.zeros(4)})
    with pytest.raises(DomainError):
        BoundaryField(square_cross, {0: np.full(33, np.nan)})


def test_to_rows(square_cross):
    f = BoundaryField.zeros(square_cross, 9)
    rows = f.to_rows()
    assert len(rows) == 4 * 9
    assert len(rows[0]) == 5


def test_normal_trace_follows_frame(square_cross):
    frame = orient_interfaces(square_cross)
    X = DeformationField.constant((1.0, 1.0))
    a = X.normal_trace(square_cross, frame)
    b = X.normal_trace(square_cross, frame.flipped())
    assert (a + b).sup() == pytest.approx(0.0, abs=1e-15)


def test_tangency():
    shear = SquareShear()
    assert DeformationField(shear.velocity).is_tangent(shear.partition)
    assert not DeformationField.constant((1.0, 0.0)).is_tangent(shear.partition)


def test_arc_bump(rect_cross):
    arc = rect_cross.interfaces[0]
    X = arc_bump_field(arc)
    mid = arc.point(np.array([0.0]))
    assert X(mid) @ arc.normal == pytest.approx([1.0])
    ends = arc.point(np.array([-1.0, 1.0]))
    assert np.allclose(X(ends), 0.0)
    for other in rect_cross.interfaces[1:]:
        pts = other.point(np.linspace(-1, 1, 21))
        assert np.allclose(X(pts), 0.0)
    with pytest.raises(DomainError):
        arc_bump_field(arc, center=0.8, half_width=0.5)


def test_corner_vanishing(square_cross):
    arc = square_cross.interfaces[0]
    X = arc_bump_field(arc)
    assert not X.vanishes_near_corners(square_cross)
    X.corner_radius = 0.1
    assert X.vanishes_near_corners(square_cross)
