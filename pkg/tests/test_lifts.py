import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsurf.lifts import (
    IdentityLift,
    RadialLift,
    SixPatchLift,
    composite_jacobian,
    lift_point,
    make_lift,
    pullback,
    sigma_at,
    sigma_sup_deviation,
    sigma_values,
)
from fracsurf.mesh import SurfaceMesh, element_map, quadrature_geometry
from fracsurf.sphere import step_values

coordinate = st.floats(-2.0, 2.0, allow_nan=False)
ambient_point = st.tuples(coordinate, coordinate, coordinate).filter(
    lambda p: np.linalg.norm(p) > 1e-3
)


def test_radial_projection_example(radial_lift):
    np.testing.assert_allclose(lift_point(radial_lift, [2.0, 0.0, 0.0]), [1.0, 0.0, 0.0])


def test_six_patch_example(six_patch_lift):
    lifted = lift_point(six_patch_lift, [0.9, 0.1, 0.1])
    np.testing.assert_allclose(lifted, [np.sqrt(1.0 - 0.02), 0.1, 0.1], atol=1e-15)


def test_origin_is_domain_error(radial_lift):
    with pytest.raises(ValueError):
        lift_point(radial_lift, [0.0, 0.0, 0.0])


def test_six_patch_outside_domain_error(six_patch_lift):
    # off-axis coordinates alone exceed the unit ball: no root to solve for
    with pytest.raises(ValueError):
        lift_point(six_patch_lift, [1.0, 1.05, 0.9])


@settings(max_examples=60, deadline=None)
@given(ambient_point)
def test_radial_idempotence(p):
    lift = RadialLift()
    once = lift.lift_points(np.array(p))
    twice = lift.lift_points(once)
    assert np.linalg.norm(np.linalg.norm(once) - 1.0) <= 1e-12
    assert np.linalg.norm(twice - once) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(ambient_point.filter(lambda p: np.linalg.norm(p) <= 1.0))
def test_six_patch_idempotence(p):
    lift = SixPatchLift()
    once = lift.lift_points(np.array(p))
    twice = lift.lift_points(once)
    assert abs(np.linalg.norm(once) - 1.0) <= 1e-12
    assert np.linalg.norm(twice - once) <= 1e-12


def test_points_on_sphere_are_fixed(radial_lift, six_patch_lift, rng):
    pts = rng.normal(size=(40, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    np.testing.assert_allclose(radial_lift.lift_points(pts), pts, atol=1e-15)
    np.testing.assert_allclose(six_patch_lift.lift_points(pts), pts, atol=1e-12)


def test_patch_boundary_consistency():
    # on-sphere points with |x1| = |x2|: both adjacent patch formulas agree
    for c in (0.0, 0.3, -0.5):
        a = np.sqrt((1.0 - c * c) / 2.0)
        x = np.array([a, a, c])
        z1 = x.copy()
        z1[0] = np.sqrt(1.0 - x[1] ** 2 - x[2] ** 2)  # patch (1, +)
        z2 = x.copy()
        z2[1] = np.sqrt(1.0 - x[0] ** 2 - x[2] ** 2)  # patch (2, +)
        assert np.linalg.norm(z1 - z2) <= 1e-12
        lifted = SixPatchLift().lift_points(x)
        assert np.linalg.norm(lifted - z1) <= 1e-12


def test_radial_jacobian_tangent_singular_values(radial_lift, rng):
    # projection restricted to the tangent plane scales by 1/r
    for r in (0.5, 1.0, 2.5):
        x = r * np.array([0.36, -0.48, 0.8])
        jac = radial_lift.jacobians(x)
        svals = np.linalg.svd(jac, compute_uv=False)
        np.testing.assert_allclose(svals[:2], [1.0 / r, 1.0 / r], rtol=1e-12)
        assert svals[2] <= 1e-14


def test_composite_jacobian_equals_reference_at_tangency(radial_lift):
    # flat triangle in the plane z = 1, touching the sphere at the pole
    verts = np.array(
        [[0.2, 0.0, 1.0], [-0.1, 0.15, 1.0], [-0.1, -0.15, 1.0], [0.9, 0.9, 1.0]]
    )
    mesh = SurfaceMesh("triangle", verts, np.array([[0, 1, 2], [0, 2, 1], [0, 1, 3]]))
    emap = element_map(mesh, 0)
    # reference point mapping to the touching point (0, 0, 1)
    xi = np.linalg.lstsq(
        np.column_stack([verts[1] - verts[0], verts[2] - verts[0]])[:2],
        -verts[0][:2],
        rcond=None,
    )[0]
    comp = composite_jacobian(radial_lift, emap, xi)
    np.testing.assert_allclose(comp, emap.jacobian(xi), atol=1e-13)


@pytest.mark.parametrize("lift_kind", ["sdf", "generic"])
def test_composite_jacobian_tangency(lift_kind, cube_chain):
    lift = make_lift(lift_kind)
    mesh = cube_chain[2]
    for cell in (0, 33, 81):
        emap = element_map(mesh, cell)
        for xi in ([0.3, 0.4], [0.75, 0.2]):
            comp = composite_jacobian(lift, emap, xi)
            normal = lift.lift_points(emap.point(xi))  # sphere normal = position
            assert np.abs(comp.T @ normal).max() <= 1e-10


def test_sigma_identity_lift_is_one(cube_chain):
    mesh = cube_chain[1]
    emap = element_map(mesh, 3)
    assert sigma_at(IdentityLift(), emap, [0.25, 0.5]) == pytest.approx(1.0, abs=1e-15)
    assert sigma_sup_deviation(IdentityLift(), mesh, 6) <= 1e-14


def test_sigma_integral_recovers_sphere_area(cube_chain, radial_lift):
    geo = quadrature_geometry(cube_chain[2], 6)
    sig = sigma_values(radial_lift, geo)
    integral = float(np.einsum("q,cq,cq->", geo["weights"], sig, geo["area"]))
    assert abs(integral - 4.0 * np.pi) <= 1e-6


def test_sigma_positive_everywhere(cube_chain, ico_chain, radial_lift, six_patch_lift):
    for mesh in (cube_chain[3], ico_chain[2]):
        geo = quadrature_geometry(mesh, 6)
        for lift in (radial_lift, six_patch_lift):
            assert sigma_values(lift, geo).min() > 0.0


def test_sigma_deviation_quarters_per_level(cube_chain, radial_lift):
    devs = [sigma_sup_deviation(radial_lift, cube_chain[lv], 6) for lv in (2, 3, 4)]
    for coarse, fine in zip(devs, devs[1:]):
        assert 3.4 <= coarse / fine <= 4.6


def test_sigma_degenerate_cell_error():
    verts = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    mesh = SurfaceMesh("triangle", verts, np.array([[0, 1, 2], [0, 2, 1]]))
    emap = element_map(mesh, 0)
    with pytest.raises(ValueError, match="degenerate"):
        sigma_at(RadialLift(), emap, [0.2, 0.2])


def test_pullback_constant_and_step(radial_lift):
    ones = pullback(radial_lift, lambda p: np.ones(p.shape[0]))
    np.testing.assert_allclose(ones(np.array([[0.2, 0.1, 1.4]])), 1.0)
    step = pullback(radial_lift, step_values)
    assert step(np.array([[0.0, 0.0, -0.9]]))[0] == -1.0


def test_pullback_composition(radial_lift, rng):
    third = pullback(radial_lift, lambda p: p[:, 2])
    pts = rng.normal(size=(20, 3)) * 1.5
    pts = pts[np.linalg.norm(pts, axis=1) > 0.1]
    expected = radial_lift.lift_points(pts)[:, 2]
    np.testing.assert_allclose(third(pts), expected, atol=1e-15)
