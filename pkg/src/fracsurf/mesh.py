"""Polyhedral / bilinear approximations of closed surfaces.

A :class:`SurfaceMesh` stores vertices in ambient 3-space together with
triangle or quadrilateral cells, counterclockwise with respect to the
outward normal.  Meshes are immutable after construction; uniform
refinement returns a new mesh whose new vertices are placed through the
lift map of the run, so all vertices stay on the target surface.

Quadrilateral cells are bilinear patches (generally non-planar); every
geometric quantity is evaluated pointwise through the reference map,
never via a flat-facet assumption.
"""

from dataclasses import dataclass, field

import numpy as np

from .quadrature import LOCAL_DOFS, QUAD, TRIANGLE, basis_tables, shape_functions

CUBE = "cube"
ICOSAHEDRON = "ico"


class MeshError(ValueError):
    """Raised when a mesh violates a structural invariant."""


@dataclass(frozen=True)
class SurfaceMesh:
    """Closed surface mesh with vertices on (or near) the target surface."""

    cell_kind: str
    vertices: np.ndarray  # (n_vertices, 3)
    cells: np.ndarray  # (n_cells, 3 or 4) int
    level: int = 0

    def __post_init__(self):
        verts = np.ascontiguousarray(self.vertices, dtype=float)
        cells = np.ascontiguousarray(self.cells, dtype=np.int64)
        if verts.ndim != 2 or verts.shape[1] != 3:
            raise MeshError("vertices must be an (n, 3) array")
        if cells.ndim != 2 or cells.shape[1] != LOCAL_DOFS[self.cell_kind]:
            raise MeshError(
                f"cells must be (m, {LOCAL_DOFS[self.cell_kind]}) "
                f"for kind {self.cell_kind!r}"
            )
        verts.setflags(write=False)
        cells.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "cells", cells)

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_cells(self):
        return self.cells.shape[0]

    @property
    def dim_ambient(self):
        return self.vertices.shape[1]


@dataclass(frozen=True)
class MeshQuality:
    """Shape-regularity constants of a mesh.

    ``c_jacobian`` measures the reference maps after rescaling each map
    by the cell diameter, so it captures distortion rather than size and
    stays bounded along uniform refinement.
    """

    h: float  # max cell diameter
    c_quasi_uniform: float  # max / min cell diameter
    c_jacobian: float  # bound on singular values of the scaled maps
    max_valence: int  # max number of cells sharing one vertex


class ElementMap:
    """Reference-to-physical map of one cell (linear or bilinear)."""

    def __init__(self, mesh, cell):
        if not 0 <= cell < mesh.n_cells:
            raise MeshError(f"cell index {cell} out of range")
        self.cell = int(cell)
        self.cell_kind = mesh.cell_kind
        self.coords = mesh.vertices[mesh.cells[cell]]

    def point(self, xi):
        """Physical point F(xi)."""
        phi, _ = shape_functions(self.cell_kind, np.atleast_2d(xi))
        return phi[:, 0] @ self.coords

    def jacobian(self, xi):
        """Exact jacobian DF(xi), shape (3, 2)."""
        _, dphi = shape_functions(self.cell_kind, np.atleast_2d(xi))
        return np.einsum("ld,li->id", dphi[:, 0, :], self.coords)


def element_map(mesh, cell):
    """Reference element map of ``cell``; jacobians are exact."""
    return ElementMap(mesh, cell)


def build_initial_sphere_mesh(kind):
    """Coarse quad or triangle subdivision of the unit sphere.

    ``"cube"`` gives the 6-cell cube surface with its 8 corners radially
    projected onto the sphere; ``"ico"`` gives the regular icosahedron
    (12 vertices, 20 triangles).
    """
    if kind == CUBE:
        corners = np.array(
            [
                [-1, -1, -1],
                [1, -1, -1],
                [1, 1, -1],
                [-1, 1, -1],
                [-1, -1, 1],
                [1, -1, 1],
                [1, 1, 1],
                [-1, 1, 1],
            ],
            dtype=float,
        )
        verts = corners / np.sqrt(3.0)
        faces = np.array(
            [
                [0, 3, 2, 1],  # z = -1
                [4, 5, 6, 7],  # z = +1
                [0, 1, 5, 4],  # y = -1
                [2, 3, 7, 6],  # y = +1
                [0, 4, 7, 3],  # x = -1
                [1, 2, 6, 5],  # x = +1
            ]
        )
        return SurfaceMesh(QUAD, verts, faces, level=0)
    if kind == ICOSAHEDRON:
        g = (1.0 + np.sqrt(5.0)) / 2.0
        raw = np.array(
            [
                [-1, g, 0], [1, g, 0], [-1, -g, 0], [1, -g, 0],
                [0, -1, g], [0, 1, g], [0, -1, -g], [0, 1, -g],
                [g, 0, -1], [g, 0, 1], [-g, 0, -1], [-g, 0, 1],
            ],
            dtype=float,
        )
        verts = raw / np.linalg.norm(raw, axis=1, keepdims=True)
        faces = np.array(
            [
                [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
                [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
                [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
                [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
            ]
        )
        return SurfaceMesh(TRIANGLE, verts, faces, level=0)
    raise ValueError(f"unknown initial mesh kind {kind!r}")


def mesh_edges(mesh):
    """Unique edges as a sorted (n_edges, 2) array of vertex pairs."""
    cells = mesh.cells
    nl = cells.shape[1]
    pairs = np.concatenate(
        [np.stack([cells[:, i], cells[:, (i + 1) % nl]], axis=1) for i in range(nl)]
    )
    pairs.sort(axis=1)
    return np.unique(pairs, axis=0)


def euler_characteristic(mesh):
    """V - E + F (2 for a topological sphere)."""
    return mesh.n_vertices - mesh_edges(mesh).shape[0] + mesh.n_cells


def validate(mesh):
    """Check structural invariants; raises :class:`MeshError`.

    Verified: indices in range, each edge shared by exactly two cells
    (closed surface), no duplicate vertices inside a cell, no degenerate
    cell (zero area element at the cell center).
    """
    cells = mesh.cells
    if cells.min() < 0 or cells.max() >= mesh.n_vertices:
        raise MeshError("cell references an invalid vertex index")
    for c, cell in enumerate(cells):
        if len(set(cell.tolist())) != cells.shape[1]:
            raise MeshError(f"cell {c} repeats a vertex")
    nl = cells.shape[1]
    pairs = np.concatenate(
        [np.stack([cells[:, i], cells[:, (i + 1) % nl]], axis=1) for i in range(nl)]
    )
    pairs.sort(axis=1)
    _, counts = np.unique(pairs, axis=0, return_counts=True)
    if not np.all(counts == 2):
        bad = int(np.sum(counts != 2))
        raise MeshError(f"{bad} edges are not shared by exactly two cells")
    center = np.full((1, 2), 1.0 / 3.0) if mesh.cell_kind == TRIANGLE else np.full((1, 2), 0.5)
    _, dphi = shape_functions(mesh.cell_kind, center)
    jac = np.einsum("ld,cli->cid", dphi[:, 0, :], mesh.vertices[cells])
    area2 = np.linalg.norm(np.cross(jac[:, :, 0], jac[:, :, 1]), axis=1)
    if np.any(area2 <= 1e-14):
        raise MeshError(f"cell {int(np.argmin(area2))} is degenerate")


def refine_uniform(mesh, lift):
    """Split every cell into four children; new vertices go through ``lift``.

    Edge midpoints (and, for quads, the cell center) are created once,
    lifted onto the target surface with ``lift`` and shared between
    neighboring cells, so the refined mesh stays closed and conforming.
    A lift failure (e.g. an edge midpoint at the origin for the radial
    lift) is reported, not silently projected.
    """
    verts = [mesh.vertices]
    next_index = mesh.n_vertices
    midpoint_of = {}

    def midpoint(a, b):
        nonlocal next_index
        key = (a, b) if a < b else (b, a)
        idx = midpoint_of.get(key)
        if idx is None:
            point = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
            try:
                lifted = lift.lift_points(point)
            except ValueError as exc:
                raise MeshError(
                    f"cannot lift midpoint of edge ({a}, {b}): {exc}"
                ) from exc
            verts.append(lifted.reshape(1, 3))
            idx = next_index
            midpoint_of[key] = idx
            next_index += 1
        return idx

    children = []
    if mesh.cell_kind == TRIANGLE:
        for v0, v1, v2 in mesh.cells:
            m01 = midpoint(v0, v1)
            m12 = midpoint(v1, v2)
            m02 = midpoint(v0, v2)
            children += [[v0, m01, m02], [m01, v1, m12], [m02, m12, v2], [m01, m12, m02]]
    else:
        for v0, v1, v2, v3 in mesh.cells:
            m01 = midpoint(v0, v1)
            m12 = midpoint(v1, v2)
            m23 = midpoint(v2, v3)
            m30 = midpoint(v3, v0)
            center = 0.25 * (
                mesh.vertices[v0] + mesh.vertices[v1] + mesh.vertices[v2] + mesh.vertices[v3]
            )
            try:
                lifted = lift.lift_points(center)
            except ValueError as exc:
                raise MeshError(f"cannot lift center of cell: {exc}") from exc
            verts.append(lifted.reshape(1, 3))
            c = next_index
            next_index += 1
            children += [
                [v0, m01, c, m30],
                [m01, v1, m12, c],
                [c, m12, v2, m23],
                [m30, c, m23, v3],
            ]
    return SurfaceMesh(
        mesh.cell_kind,
        np.concatenate(verts),
        np.asarray(children, dtype=np.int64),
        level=mesh.level + 1,
    )


def cell_diameters(mesh):
    """Max pairwise vertex distance within each cell."""
    coords = mesh.vertices[mesh.cells]  # (nc, nl, 3)
    diff = coords[:, :, None, :] - coords[:, None, :, :]
    return np.linalg.norm(diff, axis=-1).max(axis=(1, 2))


def mesh_quality(mesh):
    """Mesh-quality constants; see :class:`MeshQuality`.

    The jacobian bound samples the reference map at the cell vertices
    and center, which brackets the exact supremum within a fixed factor
    for (bi)linear maps.
    """
    diam = cell_diameters(mesh)
    h = float(diam.max())
    c_q = float(h / diam.min())
    if mesh.cell_kind == TRIANGLE:
        samples = np.array([[0, 0], [1, 0], [0, 1], [1 / 3, 1 / 3]], dtype=float)
    else:
        samples = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]], dtype=float)
    _, dphi = shape_functions(mesh.cell_kind, samples)
    jac = np.einsum("lsd,cli->csid", dphi, mesh.vertices[mesh.cells])
    jac = jac / diam[:, None, None, None]
    svals = np.linalg.svd(jac, compute_uv=False)  # (nc, s, 2) descending
    c_j = float(max(svals[..., 0].max(), (1.0 / svals[..., 1]).max()))
    valence = int(np.bincount(mesh.cells.ravel()).max())
    return MeshQuality(h=h, c_quasi_uniform=c_q, c_jacobian=c_j, max_valence=valence)


def quadrature_geometry(mesh, order):
    """Batched geometry tables at the Gauss points of every cell.

    Returns
    -------
    dict with keys
        ``points`` (nc, q, 3), ``jac`` (nc, q, 3, 2), ``area`` (nc, q)
        the surface area element |d1 F x d2 F|, ``weights`` (q,),
        ``phi`` (nl, q), ``dphi`` (nl, q, 2).
    """
    _, wts, phi, dphi = basis_tables(mesh.cell_kind, order)
    coords = mesh.vertices[mesh.cells]
    points = np.einsum("lq,cli->cqi", phi, coords)
    jac = np.einsum("lqd,cli->cqid", dphi, coords)
    cross = np.cross(jac[..., 0], jac[..., 1])
    area = np.linalg.norm(cross, axis=-1)
    return {
        "points": points,
        "jac": jac,
        "area": area,
        "weights": wts,
        "phi": phi,
        "dphi": dphi,
    }


def mesh_area(mesh, order=4):
    """Total surface area by Gauss quadrature."""
    geo = quadrature_geometry(mesh, order)
    return float(np.einsum("q,cq->", geo["weights"], geo["area"]))
