from fractions import Fraction
import math

import numpy as np
import pytest

from pyspl.numerics import BracketError, DomainError
from pyspl.rect import (courant_sharp_22, cross_partition, degenerate_pairs, dtn_negative_profile_22,
                        gamma_residual_scan, rect_eigenvalue, rect_spectral_position, solve_gamma_pair)


def test_rect_eigenvalue():
    assert rect_eigenvalue(1, 1, 1.0) == pytest.approx(2.0)
    assert rect_eigenvalue(2, 2, 1.5) == pytest.approx(4 / 2.25 + 4)


def test_square_positions():
    assert rect_spectral_position(1, 1, 1.0) == (1, 1)
    assert rect_spectral_position(1, 2, 1.0) == (2, 2)
    assert rect_spectral_position(2, 2, 1.0) == (4, 1)


def test_position_22_at_three_halves():
    position, multiplicity = rect_spectral_position(2, 2, 1.5, Fraction(9, 4))
    assert (position, multiplicity) == (5, 1)
    assert position - 4 == 1


def test_exact_degeneracy_at_five_thirds():
    a2 = Fraction(5, 3)
    alpha = math.sqrt(5 / 3)
    assert rect_eigenvalue(2, 2, alpha) == pytest.approx(rect_eigenvalue(3, 1, alpha))
    assert degenerate_pairs(alpha, a2) == [((2, 2), (3, 1))]
    assert rect_spectral_position(2, 2, alpha, a2)[1] == 2


@pytest.mark.parametrize("a2,sharp", [
    (Fraction(1, 2), False),
    (Fraction(3, 5), True),
    (Fraction(4, 5), True),
    (Fraction(1), True),
    (Fraction(6, 5), True),
    (Fraction(3, 2), True),
    (Fraction(5, 3), True),
    (Fraction(9, 5), False),
    (Fraction(9, 4), False),
])
def test_courant_sharp_window(a2, sharp):
    assert courant_sharp_22(math.sqrt(a2), a2) == sharp


def test_courant_sharp_rejects_bad_alpha():
    with pytest.raises(DomainError):
        courant_sharp_22(-1.0)


def test_gamma_pair_three_halves():
    pair = solve_gamma_pair(1.5)
    assert pair.gamma1 == pytest.approx(2.08, abs=0.01)
    assert pair.gamma2 == pytest.approx(1.20, abs=0.01)
    assert 3 / 1.5 < pair.gamma1 < 4 / 1.5
    assert 1 < pair.gamma2 < 2
    assert pair.constraint_residual < 1e-10
    assert pair.matching_residual < 1e-8
    assert pair.sigma > 0


def test_gamma_pair_matches_scan():
    pair = solve_gamma_pair(1.5)
    g1, g2 = gamma_residual_scan(1.5)
    assert g1 == pytest.approx(pair.gamma1, abs=1e-3)
    assert g2 == pytest.approx(pair.gamma2, abs=1e-3)


def test_gamma_pair_outside_regime():
    with pytest.raises(BracketError):
        solve_gamma_pair(1.0)


def test_negative_profile_signs():
    profile = dtn_negative_profile_22(1.5)
    w = 1.5 * math.pi
    assert 0 < profile.horizontal_zero < w / 2
    near_boundary = profile.value(np.array([[0.1 * profile.horizontal_zero, math.pi / 2]]))
    near_center = profile.value(np.array([[0.5 * (profile.horizontal_zero + w / 2), math.pi / 2]]))
    assert near_boundary[0] > 0
    assert near_center[0] < 0
    assert profile.center_value < 0
    assert profile.sign_pattern["horizontal_near_center"] == -1
    # even under both reflections
    pts = np.array([[0.3, math.pi / 2], [w - 0.3, math.pi / 2]])
    assert profile.value(pts)[0] == pytest.approx(profile.value(pts)[1])


def test_cross_partition_geometry():
    p = cross_partition(1.5)
    assert p.domain.width == pytest.approx(1.5 * math.pi)
    assert p.k == 4
    assert len({round(a.length, 12) for a in p.interfaces}) == 2
