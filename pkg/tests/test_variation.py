import math

import numpy as np
import pytest

from pyspl.boundary import DeformationField, arc_bump_field
from pyspl.families import DiskCosine, DiskDilation, DiskTranslation, FamilySample, RectWidth, SquareShear
from pyspl.groundstate import DiskModeState, RectGroundState
from pyspl.mesh import InvalidGeometry
from pyspl.numerics import DomainError
from pyspl.partition import build_stub_partition, orient_interfaces
from pyspl.plap import subdomain_ground_states
from pyspl.variation import (BorderedSystem, CrossingDetected, HelmholtzSolver, NotCritical, _check_overlap,
                             bump_basis, criticality, dtn_form, dtn_form_matrix, equipartition_integrals,
                             family_first_variation, fd_oracle, groundstate_data, hadamard_first, hessian_form,
                             moment_fields, moment_residuals, negative_direction_22, project_equipartition_tangent,
                             project_moments, second_variation_c3)


@pytest.fixture(scope="module")
def rect_solver(rect_cross, rect_cross_frame):
    return HelmholtzSolver(rect_cross, rect_cross_frame, 10)


def test_hadamard_rect_width():
    a = 1.5
    state = RectGroundState(0.0, a * math.pi, 0.0, math.pi)
    assert hadamard_first(state, RectWidth(a).deformation()) == pytest.approx(-2 / a ** 3, rel=1e-10)


def test_hadamard_disk():
    state = DiskModeState(0, 1)
    assert hadamard_first(state, DiskDilation().deformation()) == pytest.approx(-2 * state.value, rel=1e-10)
    assert abs(hadamard_first(state, DiskTranslation().deformation())) < 1e-10


def test_discrete_data_matches_closed_form(rect_cross):
    closed = groundstate_data(rect_cross)
    discrete = groundstate_data(rect_cross, n=12, discrete=True)
    assert not closed[0].discrete and discrete[0].discrete
    for c, d in zip(closed, discrete):
        assert d.value == pytest.approx(c.value, rel=1e-8)
        arc = rect_cross.arcs_of(c.subdomain)[0]
        pts = arc.point(np.array([-0.5, 0.0, 0.5]))
        assert d.normal_derivative(arc, pts) == pytest.approx(c.normal_derivative(arc, pts), abs=1e-5)
        assert np.all(c.normal_derivative(arc, pts) < 0)


def test_cross_is_critical(rect_cross, rect_cross_frame):
    crit = criticality(rect_cross, rect_cross_frame)
    assert crit.critical
    assert crit.residual < 1e-8
    assert crit.coefficients == pytest.approx([0.5] * 4, abs=1e-10)
    assert crit.defect == pytest.approx(0.0, abs=1e-12)
    center = rect_cross.interior_corners()[0].id
    assert crit.rho.corner_values[center] == 0.0


def test_staggered_cross_not_critical(staggered_cross):
    crit = criticality(staggered_cross)
    assert not crit.critical
    assert crit.residual > 0.1
    assert crit.defect > 0
    with pytest.raises(NotCritical) as info:
        criticality(staggered_cross, strict=True)
    assert info.value.data.residual == pytest.approx(crit.residual)


def test_criticality_rejects_slits():
    with pytest.raises(InvalidGeometry):
        criticality(build_stub_partition(3, 0.3))


def test_equipartition_projection(rect_cross, rect_cross_data):
    X = arc_bump_field(rect_cross.interfaces[0])
    before = equipartition_integrals(X, rect_cross_data)
    assert np.ptp(before) > 1e-3
    Y = project_equipartition_tangent(X, rect_cross, rect_cross_data)
    after = equipartition_integrals(Y, rect_cross_data)
    assert np.ptp(after) < 1e-10 * np.max(np.abs(before))
    assert X.name == "bump[0]"


def test_bordered_system(square):
    state = subdomain_ground_states(square, n=10)[0]
    system = BorderedSystem.from_state(state)
    pts = system.boundary_points()
    g = np.sin(pts[:, 0]) + pts[:, 1]
    W = system.solve(g)
    assert W[system.fixed, 0] == pytest.approx(g)
    assert abs(float(system.b_psi @ W[:, 0])) < 1e-10 * np.max(np.abs(W))
    form = system.form(W)
    assert form.shape == (1, 1)


def test_tangential_field_has_zero_hessian(rect_cross, rect_cross_frame, rect_solver):
    crit = criticality(rect_cross, rect_cross_frame)
    a = 1.5

    def along(points):
        return np.stack([np.sin(2 * points[:, 0] / a), np.sin(2 * points[:, 1])], axis=1)
    value = hessian_form(rect_cross, rect_cross_frame, crit, DeformationField(along), solver=rect_solver)
    assert abs(value) < 1e-12


def _random_cross_field(rng, a):
    P = np.polynomial.Polynomial(rng.normal(size=3))
    R = np.polynomial.Polynomial(rng.normal(size=3))

    def func(points):
        x, y = points[:, 0], points[:, 1]
        return np.stack([np.sin(x / a) * np.sin(2 * y) * P(y / math.pi),
                         np.sin(y) * np.sin(2 * x / a) * R(x / (a * math.pi))], axis=1)
    return DeformationField(func)


@pytest.mark.parametrize("n,tol", [(10, 1e-2), (16, 1e-3)])
def test_hessian_boundary_route_matches_volume_form(rect_cross, rect_cross_frame, n, tol):
    crit = criticality(rect_cross, rect_cross_frame)
    solver = HelmholtzSolver(rect_cross, rect_cross_frame, n)
    rng = np.random.default_rng(7)
    fields = [_random_cross_field(rng, 1.5) for _ in range(10)]
    traces = [crit.rho * X.normal_trace(rect_cross, rect_cross_frame) for X in fields]
    boundary = solver.boundary_gram(traces)
    volume = solver.gram(traces)
    scale = np.max(np.abs(volume))
    assert scale > 0
    assert np.allclose(boundary, volume, rtol=tol, atol=tol * scale)
    h = hessian_form(rect_cross, rect_cross_frame, crit, fields[0], solver=solver)
    assert h == pytest.approx(2 * dtn_form(rect_cross, rect_cross_frame, traces[0], solver=solver),
                              rel=tol, abs=tol * scale)


def test_hessian_symmetric(rect_cross, rect_cross_frame, rect_solver):
    crit = criticality(rect_cross, rect_cross_frame)
    X1 = arc_bump_field(rect_cross.interfaces[0])
    X2 = arc_bump_field(rect_cross.interfaces[1], center=0.2, half_width=0.4)
    h12 = hessian_form(rect_cross, rect_cross_frame, crit, X1, X2, solver=rect_solver)
    h21 = hessian_form(rect_cross, rect_cross_frame, crit, X2, X1, solver=rect_solver)
    assert h12 == pytest.approx(h21, rel=1e-10, abs=1e-14)


def test_hessian_polarization(rect_cross, rect_cross_frame, rect_solver):
    crit = criticality(rect_cross, rect_cross_frame)
    X1 = arc_bump_field(rect_cross.interfaces[0], center=-0.1)
    X2 = arc_bump_field(rect_cross.interfaces[2], center=0.3, half_width=0.4)

    def Q(X):
        return hessian_form(rect_cross, rect_cross_frame, crit, X, solver=rect_solver)
    h12 = hessian_form(rect_cross, rect_cross_frame, crit, X1, X2, solver=rect_solver)
    assert h12 == pytest.approx(0.25 * (Q(X1 + X2) - Q(X1 - X2)), rel=1e-8, abs=1e-12)


def test_projected_fields_keep_eigenvalues(rect_cross, rect_cross_data):
    rng = np.random.default_rng(11)
    for _ in range(20):
        X = None
        for _ in range(int(rng.integers(1, 4))):
            arc = rect_cross.interfaces[int(rng.integers(len(rect_cross.interfaces)))]
            bump = arc_bump_field(arc, center=float(rng.uniform(-0.4, 0.4)),
                                  half_width=float(rng.uniform(0.2, 0.5))).scale(float(rng.normal()))
            X = bump if X is None else X + bump
        Y = project_equipartition_tangent(X, rect_cross, rect_cross_data)
        for d in rect_cross_data:
            assert abs(hadamard_first(d, Y)) < 1e-8


def test_hessian_frame_invariant(rect_cross, rect_cross_frame, rect_solver):
    crit = criticality(rect_cross, rect_cross_frame)
    flipped = rect_cross_frame.flipped()
    X = arc_bump_field(rect_cross.interfaces[2])
    h = hessian_form(rect_cross, rect_cross_frame, crit, X, solver=rect_solver)
    other = HelmholtzSolver(rect_cross, flipped, 10)
    assert hessian_form(rect_cross, flipped, crit, X, solver=other) == pytest.approx(h, rel=1e-10)


def test_helmholtz_rejects_slits():
    p = build_stub_partition(3, 0.3)
    with pytest.raises(InvalidGeometry):
        HelmholtzSolver(p, orient_interfaces(p), 10)


def test_moment_projection(rect_cross, rect_cross_frame, rect_cross_data):
    basis = bump_basis(rect_cross, 4)
    assert len(basis) == 4 * len(rect_cross.interfaces)
    projected = project_moments(basis, rect_cross, rect_cross_frame, rect_cross_data)
    moments = moment_fields(rect_cross, rect_cross_frame, rect_cross_data, basis[0].n)
    for f in projected:
        scale = max(math.sqrt(f.l2_inner(f)), 1.0)
        assert np.all(np.abs(moment_residuals(f, moments)) < 1e-8 * scale)


def test_bump_basis_is_local(rect_cross):
    basis = bump_basis(rect_cross, 3)
    first = basis[0]
    assert np.max(np.abs(first.samples[0])) > 0
    for arc in rect_cross.interfaces[1:]:
        assert np.max(np.abs(first.samples[arc.id])) == 0.0


@pytest.mark.slow
def test_cross_index_three_halves(rect_cross, rect_cross_frame):
    crit = criticality(rect_cross, rect_cross_frame)
    solver = HelmholtzSolver(rect_cross, rect_cross_frame, 16)
    index = dtn_form_matrix(rect_cross, rect_cross_frame, crit, bump_basis(rect_cross, 8), solver=solver)
    assert index.negative == 1
    assert index.basis_size == 32
    flipped = rect_cross_frame.flipped()
    other = HelmholtzSolver(rect_cross, flipped, 16)
    assert dtn_form_matrix(rect_cross, flipped, crit, bump_basis(rect_cross, 8), solver=other).negative == 1


@pytest.mark.slow
def test_cross_index_stable_under_basis_growth(rect_cross, rect_cross_frame):
    crit = criticality(rect_cross, rect_cross_frame)
    solver = HelmholtzSolver(rect_cross, rect_cross_frame, 24)
    for size in (8, 16):
        index = dtn_form_matrix(rect_cross, rect_cross_frame, crit, bump_basis(rect_cross, size), solver=solver)
        assert index.basis_size == 4 * size
        assert index.negative == 1


@pytest.mark.slow
def test_square_cross_index_zero(square_cross):
    frame = orient_interfaces(square_cross)
    crit = criticality(square_cross, frame)
    index = dtn_form_matrix(square_cross, frame, crit, bump_basis(square_cross, 8), n=16)
    assert index.negative == 0


@pytest.mark.slow
def test_negative_direction(rect_cross, rect_cross_frame):
    crit = criticality(rect_cross, rect_cross_frame)
    X = negative_direction_22(1.5, crit, rect_cross_frame)
    solver = HelmholtzSolver(rect_cross, rect_cross_frame, 16)
    assert hessian_form(rect_cross, rect_cross_frame, crit, X, solver=solver) < 0


def test_family_first_variation():
    assert family_first_variation(RectWidth(1.5)) == pytest.approx(RectWidth(1.5).exact_derivative(), rel=1e-10)
    assert abs(family_first_variation(SquareShear())) < 1e-10


def test_fd_first_derivative():
    family = RectWidth(1.5)
    report = fd_oracle(family, 1, n=12)
    assert report.value == pytest.approx(family.exact_derivative(), rel=1e-6)
    assert report.base == pytest.approx(1 / 2.25 + 1, rel=1e-10)
    assert report.steps == [1e-3, 5e-4]


def test_fd_second_derivative_dilation():
    report = fd_oracle(DiskDilation(), 2, n=12)
    lam = DiskModeState(0, 1).value
    assert report.value == pytest.approx(6 * lam, rel=1e-4)


def test_fd_rejects_order():
    with pytest.raises(DomainError):
        fd_oracle(RectWidth(), 3)


def test_crossing_detected():
    ref = FamilySample(1.0, np.array([1.0, 0.0]), np.eye(2))
    other = FamilySample(1.0, np.array([0.0, 1.0]), np.eye(2))
    with pytest.raises(CrossingDetected):
        _check_overlap(ref, other, 1e-3)
    _check_overlap(ref, FamilySample(1.0, np.array([-1.0, 0.01]), np.eye(2)), 1e-3)


def test_second_variation_dilation():
    second = second_variation_c3(DiskDilation(), n=16)
    lam = DiskModeState(0, 1).value
    assert second.first == pytest.approx(-2 * lam, rel=1e-10)
    assert second.value == pytest.approx(6 * lam, rel=1e-4)


def test_second_variation_translation():
    second = second_variation_c3(DiskTranslation(), n=16)
    assert abs(second.first) < 1e-10
    assert abs(second.value) < 1e-6


def test_second_variation_needs_disk():
    with pytest.raises(DomainError):
        second_variation_c3(RectWidth(1.5))
    with pytest.raises(DomainError):
        second_variation_c3(DiskDilation(), mode=DiskModeState(1, 1))


@pytest.mark.slow
def test_second_variation_matches_fd_cosine():
    family = DiskCosine()
    second = second_variation_c3(family, n=16)
    report = fd_oracle(family, 2, n=16)
    assert second.value == pytest.approx(report.value, rel=1e-5)
