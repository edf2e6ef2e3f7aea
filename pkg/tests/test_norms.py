import math

import numpy as np
import pytest

from fracsurf.fem import FeFunction, FeSpace, assemble_mass, interpolate
from fracsurf.lifts import IdentityLift, make_lift
from fracsurf.norms import (
    errors_from_samples,
    fit_rates,
    h1_error,
    l2_error,
    surface_samples,
)
from fracsurf.quadrature import basis_tables


def _zeta1(points):
    return math.sqrt(3.0 / (4.0 * math.pi)) * points[:, 2]


def _zeta1_gradient(points):
    scale = math.sqrt(3.0 / (4.0 * math.pi))
    e3 = np.array([0.0, 0.0, 1.0])
    return scale * (e3[None, :] - points[:, 2][:, None] * points)


def test_zero_and_constant_cases(cube_chain, radial_lift):
    space = FeSpace(cube_chain[1])
    zero = FeFunction(space, np.zeros(space.n_dofs))
    assert l2_error(cube_chain[1], radial_lift, zero, lambda p: np.zeros(len(p))) == 0.0
    const = FeFunction(space, np.full(space.n_dofs, 2.5))
    err = l2_error(cube_chain[1], radial_lift, const, lambda p: np.full(len(p), 2.5))
    assert err <= 1e-14
    errh1 = h1_error(
        cube_chain[1],
        radial_lift,
        const,
        lambda p: np.full(len(p), 2.5),
        lambda p: np.zeros_like(p),
    )
    assert errh1 <= 1e-14


def test_quad_order_validation(cube_chain, radial_lift):
    space = FeSpace(cube_chain[1])
    fe = FeFunction(space, np.zeros(space.n_dofs))
    with pytest.raises(ValueError):
        l2_error(cube_chain[1], radial_lift, fe, lambda p: np.zeros(len(p)), quad_order=2)


@pytest.mark.parametrize("chain_name", ["cube_chain", "ico_chain"])
def test_interpolation_rates_for_smooth_mode(chain_name, request, radial_lift):
    chain = request.getfixturevalue(chain_name)
    l2s, h1s = [], []
    for level in (2, 3, 4):
        mesh = chain[level]
        space = FeSpace(mesh)
        fe = interpolate(space, lambda p: _zeta1(radial_lift.lift_points(p)))
        l2s.append(l2_error(mesh, radial_lift, fe, _zeta1))
        h1s.append(h1_error(mesh, radial_lift, fe, _zeta1, _zeta1_gradient))
    for coarse, fine in zip(l2s, l2s[1:]):
        assert 3.5 <= coarse / fine <= 4.5  # O(h^2)
    for coarse, fine in zip(h1s, h1s[1:]):
        assert 1.8 <= coarse / fine <= 2.2  # O(h)


def test_h1_dominates_l2(cube_chain, radial_lift):
    mesh = cube_chain[2]
    space = FeSpace(mesh)
    fe = interpolate(space, lambda p: _zeta1(radial_lift.lift_points(p)))
    l2 = l2_error(mesh, radial_lift, fe, _zeta1)
    h1 = h1_error(mesh, radial_lift, fe, _zeta1, _zeta1_gradient)
    assert h1 >= l2


def test_identity_lift_matches_direct_quadrature_oracle(ico_chain):
    # with the identity lift the chain rule collapses; compare against an
    # independent cellwise integration of the same quantity
    mesh = ico_chain[1]
    space = FeSpace(mesh)
    lift = IdentityLift()
    rng = np.random.default_rng(11)
    fe = FeFunction(space, rng.normal(size=space.n_dofs))

    def exact(points):
        return np.sin(points[:, 0]) + points[:, 1]

    def exact_gradient(points):
        grads = np.zeros_like(points)
        grads[:, 0] = np.cos(points[:, 0])
        grads[:, 1] = 1.0
        return grads

    order = 6
    pts, wts, phi, dphi = basis_tables(mesh.cell_kind, order)
    l2_sq = 0.0
    h1_sq = 0.0
    for cell_index, cell in enumerate(mesh.cells):
        coords = mesh.vertices[cell]
        local = fe.coeffs[cell]
        for q, w in enumerate(wts):
            jac = np.stack(
                [
                    np.einsum("l,li->i", dphi[:, q, 0], coords),
                    np.einsum("l,li->i", dphi[:, q, 1], coords),
                ],
                axis=1,
            )
            gram = jac.T @ jac
            mu = np.sqrt(np.linalg.det(gram))
            x = phi[:, q] @ coords
            u_val = local @ phi[:, q]
            diff = exact(x[None, :])[0] - u_val
            l2_sq += w * diff * diff * mu
            grad_u = jac @ np.linalg.solve(gram, dphi[:, q].T @ local)
            # tangential part of the exact gradient on the flat cell
            g = exact_gradient(x[None, :])[0]
            dref = jac.T @ g
            g_tan = jac @ np.linalg.solve(gram, dref)
            gd = g_tan - grad_u
            h1_sq += w * (gd @ gd) * mu
    oracle_l2 = math.sqrt(l2_sq)
    oracle_h1 = math.sqrt(l2_sq + h1_sq)
    assert l2_error(mesh, lift, fe, exact, order) == pytest.approx(oracle_l2, abs=1e-10)
    assert h1_error(mesh, lift, fe, exact, exact_gradient, order) == pytest.approx(
        oracle_h1, abs=1e-10
    )


def test_triangle_inequality_against_m_norm(cube_chain, radial_lift, rng):
    mesh = cube_chain[2]
    space = FeSpace(mesh)
    mass = assemble_mass(space, 6)
    samples = surface_samples(mesh, radial_lift, 6)
    vals = _zeta1(samples.lifted.reshape(-1, 3))
    for _ in range(4):
        u = rng.normal(size=space.n_dofs)
        v = rng.normal(size=space.n_dofs)
        eu, _ = errors_from_samples(samples, u, vals)
        ev, _ = errors_from_samples(samples, v, vals)
        d = u - v
        m_dist = math.sqrt(d @ (mass @ d))
        assert eu <= ev + m_dist + 1e-12


def test_quadrature_order_stability(cube_chain, radial_lift):
    # order 6 vs 8 must agree to < 0.5% from level 3 on, otherwise the
    # rate studies would be quadrature-limited
    for level in (3, 4):
        mesh = cube_chain[level]
        space = FeSpace(mesh)
        fe = interpolate(space, lambda p: _zeta1(radial_lift.lift_points(p)))
        for fn, args in (
            (l2_error, (_zeta1,)),
            (h1_error, (_zeta1, _zeta1_gradient)),
        ):
            e6 = fn(mesh, radial_lift, fe, *args, quad_order=6)
            e8 = fn(mesh, radial_lift, fe, *args, quad_order=8)
            assert abs(e6 - e8) <= 5e-3 * e8


def test_fit_rates_exact_powers():
    dofs = np.array([100.0, 400.0, 1600.0])
    slopes, last = fit_rates(dofs, dofs**-1.0)
    np.testing.assert_allclose(slopes, 1.0, atol=1e-12)
    assert last == pytest.approx(1.0)
    # halving error while quadrupling dofs
    slopes, last = fit_rates([100, 400], [1.0, 0.5])
    assert last == pytest.approx(0.5)
    slopes, last = fit_rates([10, 20], [1.0, 0.25])
    assert len(slopes) == 1 and last == pytest.approx(2.0)


def test_fit_rates_validation():
    with pytest.raises(ValueError):
        fit_rates([100], [1.0])
    with pytest.raises(ValueError):
        fit_rates([100, 50], [1.0, 0.5])
    with pytest.raises(ValueError):
        fit_rates([100, 400], [1.0, -0.5])
