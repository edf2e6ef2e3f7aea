import numpy as np
import pytest

from fracsurf.mesh import (
    MeshError,
    SurfaceMesh,
    build_initial_sphere_mesh,
    cell_diameters,
    element_map,
    euler_characteristic,
    mesh_area,
    mesh_edges,
    mesh_quality,
    refine_uniform,
    validate,
)


def test_cube_combinatorics():
    mesh = build_initial_sphere_mesh("cube")
    assert mesh.n_vertices == 8
    assert mesh.n_cells == 6
    assert mesh_edges(mesh).shape[0] == 12
    assert euler_characteristic(mesh) == 2
    validate(mesh)


def test_icosahedron_combinatorics():
    mesh = build_initial_sphere_mesh("ico")
    assert mesh.n_vertices == 12
    assert mesh.n_cells == 20
    assert mesh_edges(mesh).shape[0] == 30
    assert euler_characteristic(mesh) == 2
    validate(mesh)


def test_cube_vertices_projected_exactly():
    mesh = build_initial_sphere_mesh("cube")
    np.testing.assert_allclose(np.abs(mesh.vertices), 1.0 / np.sqrt(3.0), atol=0)
    np.testing.assert_allclose(np.linalg.norm(mesh.vertices, axis=1), 1.0, atol=1e-15)


@pytest.mark.parametrize("kind", ["cube", "ico"])
def test_outward_ccw_orientation(kind):
    mesh = build_initial_sphere_mesh(kind)
    for cell in range(mesh.n_cells):
        emap = element_map(mesh, cell)
        center = [1 / 3, 1 / 3] if mesh.cell_kind == "triangle" else [0.5, 0.5]
        jac = emap.jacobian(center)
        normal = np.cross(jac[:, 0], jac[:, 1])
        assert normal @ emap.point(center) > 0.0


def test_refine_counts_cube(cube_chain):
    level1 = cube_chain[1]
    assert level1.n_cells == 24
    assert level1.n_vertices == 26  # V + E + F = 8 + 12 + 6
    assert level1.level == 1
    assert cube_chain[2].n_cells == 96
    validate(level1)


def test_refine_counts_ico(ico_chain):
    level1 = ico_chain[1]
    assert level1.n_cells == 80
    assert level1.n_vertices == 42  # V + E = 12 + 30
    validate(level1)


def test_refinement_closedness_preserved(cube_chain, ico_chain):
    for mesh in (cube_chain[3], ico_chain[2]):
        nl = mesh.cells.shape[1]
        pairs = np.concatenate(
            [
                np.stack([mesh.cells[:, i], mesh.cells[:, (i + 1) % nl]], axis=1)
                for i in range(nl)
            ]
        )
        pairs.sort(axis=1)
        _, counts = np.unique(pairs, axis=0, return_counts=True)
        assert np.all(counts == 2)
        assert euler_characteristic(mesh) == 2


def test_vertices_stay_on_sphere(cube_chain, ico_chain):
    for mesh in (cube_chain[5], ico_chain[3]):
        radii = np.linalg.norm(mesh.vertices, axis=1)
        assert np.abs(radii - 1.0).max() <= 1e-12


def test_h_roughly_halves(cube_chain):
    assert cube_chain[2].n_cells == 96
    hs = [mesh_quality(m).h for m in cube_chain]
    # the coarse cube is one maximal patch per face; halving sets in at level 1
    for ratio in (hs[2] / hs[1], hs[3] / hs[2], hs[4] / hs[3]):
        assert 0.45 <= ratio <= 0.55


def test_quality_constants_cube_level0():
    q = mesh_quality(build_initial_sphere_mesh("cube"))
    assert q.max_valence == 3
    assert q.c_quasi_uniform == pytest.approx(1.0)


def test_quality_constants_ico_level0():
    q = mesh_quality(build_initial_sphere_mesh("ico"))
    assert q.c_quasi_uniform == pytest.approx(1.0)  # congruent cells
    assert q.max_valence == 5


@pytest.mark.parametrize("chain_name", ["cube_chain", "ico_chain"])
def test_quality_bounded_along_refinement(chain_name, request):
    chain = request.getfixturevalue(chain_name)
    quals = [mesh_quality(m) for m in chain]
    ref = quals[1]
    for q in quals:
        assert q.c_quasi_uniform <= 1.5 * ref.c_quasi_uniform
        assert q.c_jacobian <= 1.5 * ref.c_jacobian
        assert q.max_valence <= 1.5 * ref.max_valence


def test_jacobian_singular_values_within_reported_bound(cube_chain):
    mesh = cube_chain[2]
    q = mesh_quality(mesh)
    diam = cell_diameters(mesh)
    for cell in (0, 17, 50):
        emap = element_map(mesh, cell)
        for xi in ([0.0, 0.0], [1.0, 1.0], [0.5, 0.5]):
            svals = np.linalg.svd(emap.jacobian(xi) / diam[cell], compute_uv=False)
            assert svals[0] <= q.c_jacobian * (1 + 1e-12)
            assert svals[-1] >= 1.0 / q.c_jacobian * (1 - 1e-12)


def test_element_map_nodal_interpolation():
    mesh = build_initial_sphere_mesh("ico")
    emap = element_map(mesh, 0)
    np.testing.assert_allclose(emap.point([0.0, 0.0]), mesh.vertices[mesh.cells[0, 0]])
    np.testing.assert_allclose(emap.point([1.0, 0.0]), mesh.vertices[mesh.cells[0, 1]])


def test_element_map_quad_center_is_centroid():
    mesh = build_initial_sphere_mesh("cube")
    emap = element_map(mesh, 0)
    centroid = mesh.vertices[mesh.cells[0]].mean(axis=0)
    np.testing.assert_allclose(emap.point([0.5, 0.5]), centroid, atol=1e-15)


def test_cell_area_matches_planar_polygon_formula():
    # lifted cube faces are planar squares; icosahedron faces are flat
    from fracsurf.quadrature import gauss_rule

    cube = build_initial_sphere_mesh("cube")
    pts, wts = gauss_rule("quad", 4)
    for cell in range(cube.n_cells):
        emap = element_map(cube, cell)
        area = sum(
            w * np.linalg.norm(np.cross(emap.jacobian(p)[:, 0], emap.jacobian(p)[:, 1]))
            for p, w in zip(pts, wts)
        )
        verts = cube.vertices[cube.cells[cell]]
        exact = 0.5 * np.linalg.norm(np.cross(verts[2] - verts[0], verts[3] - verts[1]))
        assert abs(area - exact) <= 1e-12

    ico = build_initial_sphere_mesh("ico")
    pts, wts = gauss_rule("triangle", 4)
    for cell in range(0, ico.n_cells, 5):
        emap = element_map(ico, cell)
        area = sum(
            w * np.linalg.norm(np.cross(emap.jacobian(p)[:, 0], emap.jacobian(p)[:, 1]))
            for p, w in zip(pts, wts)
        )
        verts = ico.vertices[ico.cells[cell]]
        exact = 0.5 * np.linalg.norm(np.cross(verts[1] - verts[0], verts[2] - verts[0]))
        assert abs(area - exact) <= 1e-12


@pytest.mark.parametrize("chain_name", ["cube_chain", "ico_chain"])
def test_areas_increase_to_sphere_area(chain_name, request):
    chain = request.getfixturevalue(chain_name)
    areas = [mesh_area(m, 6) for m in chain]
    sphere = 4.0 * np.pi
    assert all(a < sphere for a in areas)
    assert all(b > a for a, b in zip(areas, areas[1:]))
    deficits = [sphere - a for a in areas]
    # O(h^2) deficit decay; the coarsest pair is pre-asymptotic
    for first, second in zip(deficits[1:], deficits[2:]):
        assert 3.7 <= first / second <= 4.3


def test_quality_invariant_under_rigid_motion(cube_chain, rng):
    mesh = cube_chain[2]
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = 1.1
    kmat = np.array(
        [[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]]
    )
    rot = np.eye(3) + np.sin(angle) * kmat + (1 - np.cos(angle)) * (kmat @ kmat)
    moved = SurfaceMesh(
        mesh.cell_kind, mesh.vertices @ rot.T + np.array([0.3, -1.2, 2.0]), mesh.cells
    )
    q0 = mesh_quality(mesh)
    q1 = mesh_quality(moved)
    assert q1.h == pytest.approx(q0.h, rel=1e-12)
    assert q1.c_quasi_uniform == pytest.approx(q0.c_quasi_uniform, rel=1e-12)
    assert q1.c_jacobian == pytest.approx(q0.c_jacobian, rel=1e-10)
    assert q1.max_valence == q0.max_valence


def test_refine_reports_lift_failure(radial_lift):
    # structurally valid two-triangle pillow whose edge crosses the origin
    verts = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    cells = np.array([[0, 1, 2], [0, 2, 1]])
    pillow = SurfaceMesh("triangle", verts, cells)
    with pytest.raises(MeshError, match="midpoint"):
        refine_uniform(pillow, radial_lift)


def test_validate_rejects_open_surface():
    verts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    single = SurfaceMesh("triangle", verts, np.array([[0, 1, 2]]))
    with pytest.raises(MeshError, match="edges"):
        validate(single)


def test_validate_rejects_bad_index():
    verts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    bad = SurfaceMesh("triangle", verts, np.array([[0, 1, 5]]))
    with pytest.raises(MeshError, match="invalid vertex"):
        validate(bad)


def test_mesh_immutable(cube_chain):
    with pytest.raises(ValueError):
        cube_chain[0].vertices[0, 0] = 7.0
