"""Piecewise linear / bilinear finite elements on a surface mesh.

Degrees of freedom are the mesh vertices (Lagrange degree 1, nodal
basis).  Mass and stiffness matrices are assembled on one shared CSR
sparsity pattern, which the shifted solver reuses across all quadrature
shifts.  Assembly accumulates per-cell contributions in a fixed cell
order, so results are reproducible and the matrices are symmetric
bit-for-bit.

Surface gradients use the first fundamental form of the reference map:
``grad_G phi = DF G^{-1} grad_ref phi`` with ``G = DF^T DF``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .lifts import sigma_values
from .mesh import quadrature_geometry
from .quadrature import shape_functions

DEFAULT_ASSEMBLY_ORDER = 4


class AssemblyError(RuntimeError):
    """Raised when assembly hits a degenerate cell."""


class FeSpace:
    """Vertex-based P1/Q1 space on a surface mesh."""

    def __init__(self, mesh):
        self.mesh = mesh
        self.n_dofs = mesh.n_vertices
        self._pattern = None

    def pattern(self):
        """Shared CSR pattern and per-cell scatter indices.

        Returns ``(indptr, indices, entry)`` where ``entry[a, b, c]`` is
        the position in the CSR data array of the (local a, local b)
        contribution of cell ``c``.
        """
        if self._pattern is None:
            cells = self.mesh.cells
            n = self.n_dofs
            nl = cells.shape[1]
            keys = (cells[:, :, None] * n + cells[:, None, :]).transpose(1, 2, 0)
            unique = np.unique(keys)
            entry = np.searchsorted(unique, keys)
            rows = unique // n
            indices = unique % n
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
            self._pattern = (indptr, indices, np.ascontiguousarray(entry))
        return self._pattern

    def csr(self, data):
        indptr, indices, _ = self.pattern()
        return sparse.csr_matrix(
            (data, indices.copy(), indptr.copy()), shape=(self.n_dofs, self.n_dofs)
        )


@dataclass
class FeFunction:
    """Finite element function: one coefficient per vertex."""

    space: FeSpace
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.space.n_dofs,):
            raise ValueError("coefficient vector length must equal n_dofs")


def _geometry_checked(mesh, quad_order, what):
    geo = quadrature_geometry(mesh, quad_order)
    area = geo["area"]
    if np.any(area.min(axis=1) <= 1e-300):
        cell = int(np.argmin(area.min(axis=1)))
        raise AssemblyError(f"degenerate cell {cell} during {what} assembly")
    return geo


def assemble_mass(space, quad_order=DEFAULT_ASSEMBLY_ORDER):
    """Mass matrix M_ij = integral of phi_i phi_j over the mesh."""
    mesh = space.mesh
    geo = _geometry_checked(mesh, quad_order, "mass")
    w, phi, mu = geo["weights"], geo["phi"], geo["area"]
    _, _, entry = space.pattern()
    nl = phi.shape[0]
    nnz = space.pattern()[1].shape[0]
    data = np.zeros(nnz)
    for a in range(nl):
        for b in range(a, nl):
            vals = mu @ (w * phi[a] * phi[b])
            data += np.bincount(entry[a, b], weights=vals, minlength=nnz)
            if b > a:
                data += np.bincount(entry[b, a], weights=vals, minlength=nnz)
    return space.csr(data)


def assemble_stiffness(space, quad_order=DEFAULT_ASSEMBLY_ORDER):
    """Stiffness matrix A_ij = integral of grad phi_i . grad phi_j."""
    mesh = space.mesh
    geo = _geometry_checked(mesh, quad_order, "stiffness")
    w, dphi, jac, mu = geo["weights"], geo["dphi"], geo["jac"], geo["area"]
    gram = np.einsum("cqid,cqie->cqde", jac, jac)
    det = gram[..., 0, 0] * gram[..., 1, 1] - gram[..., 0, 1] * gram[..., 1, 0]
    if np.any(det <= 1e-300):
        cell = int(np.argmin(det.min(axis=1)))
        raise AssemblyError(f"singular metric in cell {cell} during stiffness assembly")
    inv = np.empty_like(gram)
    inv[..., 0, 0] = gram[..., 1, 1]
    inv[..., 1, 1] = gram[..., 0, 0]
    inv[..., 0, 1] = -gram[..., 0, 1]
    inv[..., 1, 0] = -gram[..., 1, 0]
    inv /= det[..., None, None]

    _, _, entry = space.pattern()
    nl = dphi.shape[0]
    nnz = space.pattern()[1].shape[0]
    data = np.zeros(nnz)
    for a in range(nl):
        for b in range(a, nl):
            integ = np.einsum("qd,cqde,qe->cq", dphi[a], inv, dphi[b])
            vals = (integ * mu) @ w
            data += np.bincount(entry[a, b], weights=vals, minlength=nnz)
            if b > a:
                data += np.bincount(entry[b, a], weights=vals, minlength=nnz)
    return space.csr(data)


def assemble_load_sigma(space, lift, f, quad_order=DEFAULT_ASSEMBLY_ORDER):
    """Load vector b_i = integral of (f o P) phi_i sigma over the mesh.

    ``sigma`` is the area-element ratio of the lift, so the right-hand
    side equals the integral of ``f phi_i`` over the lifted surface.
    Cells cut by a data discontinuity are integrated with the same
    Gauss rule (no sub-cell splitting).
    """
    mesh = space.mesh
    geo = _geometry_checked(mesh, quad_order, "load")
    w, phi, mu = geo["weights"], geo["phi"], geo["area"]
    sig = sigma_values(lift, geo)
    lifted = lift.lift_points(geo["points"].reshape(-1, 3))
    fvals = np.asarray(f(lifted), dtype=float).reshape(mu.shape)
    common = fvals * sig * mu
    b = np.zeros(space.n_dofs)
    cells = mesh.cells
    for a in range(phi.shape[0]):
        vals = common @ (w * phi[a])
        b += np.bincount(cells[:, a], weights=vals, minlength=space.n_dofs)
    return b


def interpolate(space, f):
    """Nodal interpolant of a function of the ambient coordinates."""
    return FeFunction(space, np.asarray(f(space.mesh.vertices), dtype=float))


def evaluate(fe, cell, xi):
    """Value and ambient surface gradient of a FE function at (cell, xi)."""
    mesh = fe.space.mesh
    phi, dphi = shape_functions(mesh.cell_kind, np.atleast_2d(xi))
    coords = mesh.vertices[mesh.cells[cell]]
    local = fe.coeffs[mesh.cells[cell]]
    value = float(local @ phi[:, 0])
    jac = np.einsum("ld,li->id", dphi[:, 0, :], coords)
    gram = jac.T @ jac
    grad_ref = dphi[:, 0, :].T @ local
    grad = jac @ np.linalg.solve(gram, grad_ref)
    return value, grad
