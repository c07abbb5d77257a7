import math

import numpy as np
import pytest

from pyspl.mesh import InvalidGeometry
from pyspl.numerics import bessel_zero
from pyspl.partition import CornerKind, build_radial_partition, build_stub_partition, check_bipartite, orient_interfaces
from pyspl.plap import (assemble_plap, sector_mixed_solve, sector_neumann_reference, solve_eigs,
                        spectral_positions, subdomain_ground_states, tip_coefficient)

SQUARE_SPECTRUM = [2.0, 5.0, 5.0, 8.0]


def test_square_spectrum(square):
    eigen = solve_eigs(assemble_plap(square, n=20), 4)
    assert eigen.values == pytest.approx(SQUARE_SPECTRUM, abs=1e-8)
    assert eigen.positions == [1, 2, 2, 4]
    assert eigen.multiplicities == [1, 2, 2, 1]
    assert np.all(eigen.residuals < 1e-8)


def test_cross_spectrum_equals_uncut(square_cross):
    # bipartite: the partition Laplacian is the Dirichlet Laplacian up to a gauge
    eigen = solve_eigs(assemble_plap(square_cross, orient_interfaces(square_cross), n=12), 4)
    assert eigen.values == pytest.approx(SQUARE_SPECTRUM, abs=1e-6)
    assert eigen.position_of(8.0) == 4


def test_gauge_does_not_change_spectrum(square_cross):
    colors = check_bipartite(square_cross)
    gauge = {s: 1 - 2 * c for s, c in colors.items()}
    plain = solve_eigs(assemble_plap(square_cross, n=12), 4)
    flipped = solve_eigs(assemble_plap(square_cross, n=12, gauge=gauge), 4)
    assert flipped.values == pytest.approx(plain.values, abs=1e-9)


def test_cross_eigenfunction_signs(square_cross):
    eigen = solve_eigs(assemble_plap(square_cross, n=12), 4)
    op = eigen.operator
    pts = np.array([[x, y] for x in (0.7, 2.4) for y in (0.7, 2.4)])
    # anti-continuity turns the checkerboard 8-mode into one sign and the ground mode into a checkerboard
    top = op.evaluate(eigen.vectors[:, 3], pts)
    ground = op.evaluate(eigen.vectors[:, 0], pts)
    assert len(set(np.sign(top))) == 1
    assert sorted(np.sign(ground)) == [-1, -1, 1, 1]


def test_odd_radial_spectrum():
    p = build_radial_partition(3, r_breaks=(0.0, 0.1, 0.4, 1.0))
    eigen = solve_eigs(assemble_plap(p, n=14), 4)
    assert eigen.values[0] == pytest.approx(math.pi ** 2, rel=1e-2)
    assert eigen.values[1] == pytest.approx(eigen.values[0], rel=1e-5)
    target = bessel_zero(1.5, 1) ** 2
    assert eigen.values[2] == pytest.approx(target, rel=1e-3)
    assert eigen.positions[2] == 3
    assert eigen.values[3] == pytest.approx(target, rel=1e-3)


def test_grid_too_coarse(square):
    with pytest.raises(InvalidGeometry):
        assemble_plap(square, n=4)


def test_spectral_positions():
    positions, mults = spectral_positions(np.array([1.0, 2.0, 2.0 + 1e-9, 3.0]))
    assert positions == [1, 2, 2, 4]
    assert mults == [1, 2, 2, 1]


def test_subdomain_ground_states(square_cross):
    states = subdomain_ground_states(square_cross, n=12)
    assert len(states) == 4
    for state in states:
        assert state.value == pytest.approx(8.0, abs=1e-8)
        center = np.mean(state.operator.dof_points, axis=0)
        assert state(center[None, :])[0] > 0


def test_evaluate_and_gradient(square):
    eigen = solve_eigs(assemble_plap(square, n=16), 1)
    op = eigen.operator
    vec = eigen.vectors[:, 0]
    pts = np.array([[0.4, 1.1], [2.0, 2.5]])
    exact = (2 / math.pi) * np.sin(pts[:, 0]) * np.sin(pts[:, 1])
    assert np.allclose(np.abs(op.evaluate(vec, pts)), exact, atol=1e-8)
    grad = op.gradient(vec, pts)
    sign = np.sign(op.evaluate(vec, pts)[0])
    exact_dx = (2 / math.pi) * np.cos(pts[:, 0]) * np.sin(pts[:, 1])
    assert np.allclose(sign * grad[:, 0], exact_dx, atol=1e-7)
    with pytest.raises(InvalidGeometry):
        op.evaluate(vec, np.array([[4.0, 1.0]]))


def test_tip_coefficient_requires_tip(square_cross):
    eigen = solve_eigs(assemble_plap(square_cross, n=10), 1)
    with pytest.raises(InvalidGeometry):
        tip_coefficient(eigen.operator, eigen.vectors[:, 0], square_cross.interior_corners()[0].id)


def test_tip_coefficient_on_slit():
    p = build_stub_partition(3, 0.3)
    eigen = solve_eigs(assemble_plap(p, n=12), 2)
    tip = next(c.id for c in p.corners if c.kind == CornerKind.TIP)
    value = tip_coefficient(eigen.operator, eigen.vectors[:, 0], tip)
    assert np.isfinite(value) and value >= 0


def test_sector_mixed_solve_validation():
    with pytest.raises(InvalidGeometry):
        sector_mixed_solve(1.5)


@pytest.mark.slow
def test_sector_reference_near_radial_energy():
    # with no Dirichlet stub the wedge problem contains j_{3,1}^2
    value = sector_neumann_reference(0.1, bessel_zero(3, 1) ** 2)
    assert value == pytest.approx(bessel_zero(3, 1) ** 2, rel=1e-5)
