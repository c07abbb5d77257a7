import numpy as np
import pytest

from pyspl.nodal import DegenerateVector, extract_nodal_partition
from pyspl.plap import assemble_plap, solve_eigs


@pytest.fixture(scope="module")
def square_eigen(square):
    return solve_eigs(assemble_plap(square, n=16), 4)


def test_ground_state_has_one_domain(square_eigen):
    result = extract_nodal_partition(square_eigen.vectors[:, 0], square_eigen.operator, 32)
    assert result.domain_count == 1
    assert result.polylines == []
    assert result.domain_energies[0] == pytest.approx(2.0, rel=1e-2)


def test_four_domains(square_eigen):
    result = extract_nodal_partition(square_eigen.vectors[:, 3], square_eigen.operator, 32)
    assert result.domain_count == 4
    assert len(result.polylines) >= 1
    assert result.domain_energies == pytest.approx([8.0] * 4, rel=2e-2)
    assert result.defect < 0.1
    # every polyline runs along x = pi/2 or y = pi/2
    for line in result.polylines:
        near_axis = np.minimum(np.abs(line[:, 0] - np.pi / 2), np.abs(line[:, 1] - np.pi / 2))
        assert np.all(near_axis < 1e-2)


def test_cross_eight_mode_splits_across_cuts(square_cross):
    eigen = solve_eigs(assemble_plap(square_cross, n=12), 4)
    result = extract_nodal_partition(eigen.vectors[:, 3], eigen.operator, 24)
    assert result.domain_count == 4


def test_zero_vector_is_degenerate(square_eigen):
    with pytest.raises(DegenerateVector):
        extract_nodal_partition(np.zeros(square_eigen.operator.size), square_eigen.operator, 16)


def test_labels_cover_samples(square_eigen):
    result = extract_nodal_partition(square_eigen.vectors[:, 3], square_eigen.operator, 16)
    assert set(np.unique(result.labels)) <= {-1, 0, 1, 2, 3}
    assert sum(result.domain_sizes) == int(np.sum(result.labels >= 0))


def test_small_domains_are_counted(square_eigen):
    op = square_eigen.operator
    v1, v4 = square_eigen.vectors[:, 0], square_eigen.vectors[:, 3]
    p = np.array([[0.4, 0.3]])
    # v4 / v1 is proportional to cos x cos y
    ratio = op.evaluate(v4, p)[0] / (op.evaluate(v1, p)[0] * np.cos(0.4) * np.cos(0.3))
    w = v4 - 0.99 * ratio * v1
    result = extract_nodal_partition(w, op, 64)
    assert result.domain_count == 3
    small = sorted(result.domain_sizes)[:2]
    assert small[0] > 0
    assert small[1] < 0.01 * sum(result.domain_sizes)
