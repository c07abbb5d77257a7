import math

import numpy as np
import pytest

from pyspl.disk import (even_mode_profile, negative_form_even, radial_deficiency, radial_energy,
                        radial_partition_data, radial_spectrum, solve_alpha_match, spectral_flow_odd,
                        weighted_bessel_integral)
from pyspl.numerics import BracketError, DomainError, bessel_zero


def test_radial_energy_six():
    assert radial_energy(6) == pytest.approx(40.7065, abs=1e-3)
    assert radial_energy(2) == pytest.approx(bessel_zero(1, 1) ** 2)


def test_radial_spectrum_odd_k():
    spectrum = radial_spectrum(3)
    assert spectrum[0][0] == pytest.approx(math.pi ** 2, abs=1e-10)
    assert spectrum[0][1] == 2
    assert spectrum[-1][0] == pytest.approx(radial_energy(3))
    assert all(order % 1 == 0.5 for _, _, order, _ in spectrum)


def test_radial_spectrum_even_k_is_disk_spectrum():
    spectrum = radial_spectrum(4)
    assert spectrum[0][:3] == (pytest.approx(bessel_zero(0, 1) ** 2), 1, 0.0)
    values = [v for v, _, _, _ in spectrum]
    assert values == sorted(values)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_small_k_not_deficient(k):
    position, deficiency = radial_deficiency(k)
    assert deficiency == 0
    assert position == k


@pytest.mark.parametrize("k", [6, 7, 8, 9, 10])
def test_large_k_deficient(k):
    _, deficiency = radial_deficiency(k)
    assert deficiency >= 1


def test_radial_k_out_of_range():
    with pytest.raises(DomainError):
        radial_deficiency(13)
    with pytest.raises(DomainError):
        radial_energy(1)


def test_alpha_match_six():
    alpha = solve_alpha_match(6)
    assert alpha == pytest.approx(0.5657, abs=5e-4)
    assert bessel_zero(alpha, 2) == pytest.approx(bessel_zero(3, 1), abs=1e-10)


def test_alpha_match_needs_six():
    with pytest.raises(BracketError):
        solve_alpha_match(5)


def test_weighted_integral_domain():
    with pytest.raises(DomainError):
        weighted_bessel_integral(0.5, 1.0)
    assert weighted_bessel_integral(1.0, 2.0) > 0


@pytest.mark.parametrize("k", [6, 8, 10])
def test_even_forms_negative(k):
    value = negative_form_even(k)
    assert value < 0
    assert even_mode_profile(k).form == pytest.approx(value, rel=1e-12)


def test_even_profile_trace():
    profile = even_mode_profile(6)
    r = np.linspace(0.1, 0.9, 5)
    # the extension matches its trace on both rays of the sector
    assert np.allclose(profile(r, 0.0), profile.trace(r))
    assert np.allclose(profile(r, 2 * math.pi / 6), profile.trace(r))
    with pytest.raises(DomainError):
        even_mode_profile(7)


@pytest.mark.parametrize("k", [7, 9])
def test_odd_spectral_flow(k):
    solution = spectral_flow_odd(k)
    assert solution.form < 0
    assert solution.sigma > 0
    assert solution.normalization_spread < 1e-6
    assert solution.jump_residual < 1e-8
    assert solution.contributions.sum() == pytest.approx(solution.form, rel=1e-8)
    theta = np.linspace(0.01, 2 * math.pi - 0.01, 200)
    assert np.all(solution.evaluate(theta) > 0)
    assert solution.positive_roots == (solution.sigma,)
    assert len(solution.roots) == solution.sign_changes


def test_odd_spectral_flow_single_sign_change():
    solution = spectral_flow_odd(7)
    assert solution.sign_changes == 1
    assert solution.sigma == pytest.approx(0.672, abs=1e-3)


def test_odd_spectral_flow_picks_positive_root():
    solution = spectral_flow_odd(9)
    assert solution.sign_changes == 3
    assert solution.sigma == pytest.approx(2.485, abs=1e-3)
    for root in solution.roots:
        if root != solution.sigma:
            assert root not in solution.positive_roots


def test_spectral_flow_needs_odd():
    with pytest.raises(DomainError):
        spectral_flow_odd(8)


def test_radial_partition_data():
    data = radial_partition_data(6)
    assert data.deficiency >= 1
    assert data.matched_order == pytest.approx(solve_alpha_match(6))
    assert radial_partition_data(4).matched_order is None
