import math

import networkx as nx
import numpy as np
import pytest

from pyspl.mesh import InvalidGeometry
from pyspl.partition import (CornerKind, OrientationRule, RectTag, build_radial_partition, build_rect_partition,
                             build_stub_partition, check_bipartite, orient_interfaces)


def test_uncut_rectangle(square):
    assert square.k == 1
    assert square.interfaces == []
    assert check_bipartite(square) == {0: 0}


def test_cross_structure(square_cross):
    p = square_cross
    assert p.k == 4
    assert len(p.interfaces) == 4
    corners = p.interior_corners()
    assert len(corners) == 1
    assert corners[0].point == pytest.approx((math.pi / 2, math.pi / 2))
    assert sum(a.length for a in p.interfaces) == pytest.approx(2 * math.pi)
    assert all(isinstance(s.analytic_tag, RectTag) for s in p.subdomains)
    g = p.adjacency_graph()
    assert nx.cycle_basis(g) and len(g.edges) == 4
    assert not p.has_slits()


def test_cross_is_bipartite(square_cross):
    colors = check_bipartite(square_cross)
    assert colors is not None
    assert colors[0] == 0
    for arc in square_cross.interfaces:
        assert colors[arc.left] != colors[arc.right]


@pytest.mark.parametrize("k", range(2, 9))
def test_radial_bipartite_iff_even(k):
    p = build_radial_partition(k)
    assert p.k == k
    colors = check_bipartite(p)
    assert (colors is not None) == (k % 2 == 0)
    if colors is not None:
        # sectors alternate around the origin, starting from sector 0
        assert colors == {i: i % 2 for i in range(k)}


def test_radial_origin_corner():
    assert build_radial_partition(3).interior_corners()[0].point == (0.0, 0.0)
    assert build_radial_partition(2).interior_corners() == []


def test_frame_antisymmetry(rect_cross):
    frame = orient_interfaces(rect_cross)
    for arc in rect_cross.interfaces:
        assert frame.chi(arc, arc.left) == -frame.chi(arc, arc.right)
        assert np.allclose(frame.flipped().normal(arc), -frame.normal(arc))


def test_coloring_frame_points_out_of_color_zero(square_cross):
    colors = check_bipartite(square_cross)
    frame = orient_interfaces(square_cross)
    for arc in square_cross.interfaces:
        zero_side = arc.left if colors[arc.left] == 0 else arc.right
        assert frame.chi(arc, zero_side) == 1


def test_disk_sequential_rule(radial6):
    frame = orient_interfaces(radial6, OrientationRule.DISK_SEQUENTIAL)
    assert frame.signs == (1, -1, 1, -1, 1, -1)
    with pytest.raises(InvalidGeometry):
        orient_interfaces(build_rect_partition(1.0, []), OrientationRule.DISK_SEQUENTIAL)


def test_non_bipartite_falls_back_to_reference():
    frame = orient_interfaces(build_radial_partition(5))
    assert frame.signs == (1,) * 5


@pytest.mark.parametrize("cut", [
    ((0.0, 0.0), (1.0, 1.0)),
    ((1.0, 0.0), (1.0, 0.0)),
    ((1.0, 0.0), (1.0, 4.0)),
])
def test_invalid_cuts(cut):
    with pytest.raises(InvalidGeometry):
        build_rect_partition(1.0, [cut])


def test_invalid_aspect_ratio():
    with pytest.raises(InvalidGeometry):
        build_rect_partition(0.0, [])


def test_staggered_cross(staggered_cross):
    p = staggered_cross
    assert p.k == 4
    assert len(p.interior_corners()) == 2
    assert nx.is_connected(p.adjacency_graph())


def test_stub_partition():
    p = build_stub_partition(3, 0.3)
    assert p.k == 1
    assert p.has_slits()
    tips = [c for c in p.corners if c.kind == CornerKind.TIP]
    assert len(tips) == 3
    assert check_bipartite(p) is None
    with pytest.raises(InvalidGeometry):
        build_stub_partition(3, 1.2)


def test_arc_geometry(rect_cross):
    for arc in rect_cross.interfaces:
        assert np.allclose(arc.point(np.array([-1.0, 1.0])), [arc.start, arc.end])
        assert abs(np.dot(arc.normal, arc.direction)) < 1e-14
        mid = arc.point(np.array([0.0]))
        assert arc.param(mid) == pytest.approx([0.0], abs=1e-12)
