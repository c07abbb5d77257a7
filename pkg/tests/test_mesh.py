import math

import numpy as np
import pytest

from pyspl.block import make_block
from pyspl.mesh import CellKind, InvalidGeometry, Side, SideCondition, geometric_breaks, tensor_mesh


def test_rect_mesh_glues():
    mesh = tensor_mesh(CellKind.RECT, [0.0, 1.0, 2.0], [0.0, 1.0, 2.0], 6, 6)
    assert len(mesh.cells) == 4
    assert len(mesh.glues) == 4
    assert not any(g.cut for g in mesh.glues)
    assert mesh.condition(0, Side.U0) == SideCondition.DIRICHLET


def test_cut_predicate_marks_glues():
    mesh = tensor_mesh(CellKind.RECT, [0.0, 1.0, 2.0], [0.0, 1.0], 6, 6, cut=lambda e: e.axis == "u")
    assert [g.cut for g in mesh.glues] == [True]


def test_polar_mesh_closed_and_collapsed():
    mesh = tensor_mesh(CellKind.POLAR, [0.0, 1.0], np.linspace(0, 2 * math.pi, 5), 6, 6, closed_v=True)
    assert len(mesh.glues) == 4
    assert all(mesh.condition(c, Side.U0) == SideCondition.COLLAPSED for c in range(4))


def test_mesh_validation():
    with pytest.raises(InvalidGeometry):
        tensor_mesh(CellKind.RECT, [0.0, 0.0], [0.0, 1.0], 6, 6)
    with pytest.raises(InvalidGeometry):
        tensor_mesh(CellKind.RECT, [0.0, 1.0, 2.0], [0.0, 1.0], [6], 6)
    with pytest.raises(InvalidGeometry):
        tensor_mesh(CellKind.POLAR, [-0.5, 1.0], [0.0, 1.0], 6, 6)


def test_geometric_breaks():
    breaks = geometric_breaks(0.0, 1.0, 0.4, 0.5, 2)
    assert breaks == pytest.approx([0.0, 0.2, 0.3, 0.4, 0.5, 0.6, 1.0])


def test_rect_block_operators():
    mesh = tensor_mesh(CellKind.RECT, [0.0, 2.0], [1.0, 2.0], 7, 5)
    K, M = make_block(mesh.cells[0]).operators()
    ones = np.ones(K.shape[0])
    assert ones @ M @ ones == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(K @ ones, 0.0, atol=1e-10)
    assert np.allclose(K, K.T)


def test_polar_block_area():
    mesh = tensor_mesh(CellKind.POLAR, [0.5, 1.0], [0.0, math.pi / 2], 8, 8)
    _, M = make_block(mesh.cells[0]).operators()
    ones = np.ones(M.shape[0])
    assert ones @ M @ ones == pytest.approx(math.pi / 4 * 0.75, abs=1e-12)
