"""File exports: legacy VTK meshes, MatrixMarket dumps, geodesic traces.

VTK output is legacy ASCII ``POLYDATA``; nodal fields are written as
``POINT_DATA`` scalars (the solution field is named ``"u"``).  The
geodesic trace samples a finite element function along the arc
``phi = 0`` from the north to the south pole by intersecting radial
rays with the mesh (valid for the star-shaped sphere approximations
used here).
"""

import numpy as np
from scipy.io import mmwrite

from .quadrature import QUAD, TRIANGLE, shape_functions


def _fmt(x):
    return repr(float(x))


def write_vtk(mesh, path, point_data=None):
    """Write a mesh (and optional nodal scalar fields) as legacy VTK."""
    lines = [
        "# vtk DataFile Version 3.0",
        "fracsurf surface mesh",
        "ASCII",
        "DATASET POLYDATA",
        f"POINTS {mesh.n_vertices} double",
    ]
    lines += [" ".join(_fmt(c) for c in v) for v in mesh.vertices]
    nl = mesh.cells.shape[1]
    lines.append(f"POLYGONS {mesh.n_cells} {mesh.n_cells * (nl + 1)}")
    lines += [f"{nl} " + " ".join(str(i) for i in cell) for cell in mesh.cells]
    if point_data:
        lines.append(f"POINT_DATA {mesh.n_vertices}")
        for name, values in point_data.items():
            values = np.asarray(values, dtype=float)
            if values.shape != (mesh.n_vertices,):
                raise ValueError(f"field {name!r} must have one value per vertex")
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines += [_fmt(v) for v in values]
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def dump_matrix(matrix, path):
    """Debug dump of a sparse matrix in MatrixMarket coordinate format."""
    mmwrite(path, matrix)


def _ray_cell_triangle(coords, direction):
    basis = np.column_stack([coords[1] - coords[0], coords[2] - coords[0], -direction])
    try:
        sol = np.linalg.solve(basis, -coords[0])
    except np.linalg.LinAlgError:
        return None
    a, b, t = sol
    eps = 1e-10
    if a >= -eps and b >= -eps and a + b <= 1.0 + eps and t > 0.0:
        return np.clip([a, b], 0.0, 1.0)
    return None


def _ray_cell_quad(coords, direction):
    xi = np.array([0.5, 0.5])
    t = float(np.linalg.norm(coords.mean(axis=0)))
    for _ in range(30):
        phi, dphi = shape_functions(QUAD, xi[None, :])
        f = phi[:, 0] @ coords - t * direction
        if np.linalg.norm(f) < 1e-13:
            break
        jac = np.column_stack(
            [np.einsum("l,li->i", dphi[:, 0, 0], coords),
             np.einsum("l,li->i", dphi[:, 0, 1], coords),
             -direction]
        )
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            return None
        xi = xi - step[:2]
        t = t - step[2]
    else:
        return None
    eps = 1e-9
    if -eps <= xi[0] <= 1.0 + eps and -eps <= xi[1] <= 1.0 + eps and t > 0.0:
        return np.clip(xi, 0.0, 1.0)
    return None


def locate_ray(mesh, direction, n_candidates=12):
    """Cell and reference coordinates where a radial ray crosses the mesh."""
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    centroids = mesh.vertices[mesh.cells].mean(axis=1)
    centroids = centroids / np.linalg.norm(centroids, axis=1, keepdims=True)
    candidates = np.argsort(centroids @ direction)[::-1][:n_candidates]
    hit = _ray_cell_triangle if mesh.cell_kind == TRIANGLE else _ray_cell_quad
    for cell in candidates:
        xi = hit(mesh.vertices[mesh.cells[cell]], direction)
        if xi is not None:
            return int(cell), xi
    raise ValueError("ray does not hit the mesh (not star-shaped?)")


def geodesic_trace(mesh, coeffs, n_samples=512):
    """Sample a FE function along the arc phi = 0, theta in [0, pi].

    Returns ``(theta, values)``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    theta = np.linspace(0.0, np.pi, n_samples)
    values = np.empty(n_samples)
    for i, th in enumerate(theta):
        direction = np.array([np.sin(th), 0.0, np.cos(th)])
        cell, xi = locate_ray(mesh, direction)
        phi, _ = shape_functions(mesh.cell_kind, xi[None, :])
        values[i] = coeffs[mesh.cells[cell]] @ phi[:, 0]
    return theta, values


def write_trace_csv(path, theta, values):
    with open(path, "w") as handle:
        handle.write("theta,u\n")
        for th, v in zip(theta, values):
            handle.write(f"{_fmt(th)},{_fmt(v)}\n")


def export_solution(mesh, fe, path, n_samples=512):
    """Write a solution as VTK (point data ``u``) plus a trace CSV.

    The trace file lives next to the VTK file with suffix
    ``_trace.csv``.
    """
    coeffs = getattr(fe, "coeffs", None)
    coeffs = np.asarray(fe if coeffs is None else coeffs, dtype=float)
    path = str(path)
    write_vtk(mesh, path, point_data={"u": coeffs})
    stem = path[:-4] if path.endswith(".vtk") else path
    theta, values = geodesic_trace(mesh, coeffs, n_samples)
    write_trace_csv(stem + "_trace.csv", theta, values)
