"""Gauss quadrature and nodal basis tables on the reference elements.

Two reference elements are used throughout: the unit triangle
{(x, y) : x, y >= 0, x + y <= 1} with linear shape functions, and the
unit square [0, 1]^2 with bilinear shape functions.

The ``order`` parameter of a rule is the number of Gauss points per
direction.  Square rules are tensor-product Gauss-Legendre (exact for
bi-degree 2*order - 1).  Triangle rules collapse a tensor product of
Gauss-Legendre and Gauss-Jacobi(1, 0) points through the Duffy map,
which is exact for total degree 2*order - 1.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

TRIANGLE = "triangle"
QUAD = "quad"

#: number of local shape functions per cell kind
LOCAL_DOFS = {TRIANGLE: 3, QUAD: 4}


@lru_cache(maxsize=None)
def gauss_rule(cell_kind, order):
    """Quadrature nodes and weights on the reference element.

    Parameters
    ----------
    cell_kind : str
        ``"triangle"`` or ``"quad"``.
    order : int
        Gauss points per direction (>= 1).

    Returns
    -------
    points : (q, 2) ndarray
    weights : (q,) ndarray
        Weights sum to the reference area (1/2 for the triangle, 1 for
        the square).
    """
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    x, wx = roots_legendre(order)
    x = 0.5 * (x + 1.0)  # [-1, 1] -> [0, 1]
    wx = 0.5 * wx
    if cell_kind == QUAD:
        xi, eta = np.meshgrid(x, x, indexing="ij")
        w = np.outer(wx, wx)
        pts = np.column_stack([xi.ravel(), eta.ravel()])
        wts = w.ravel()
    elif cell_kind == TRIANGLE:
        # Duffy map (u, v) -> (u (1 - v), v) with jacobian (1 - v); the
        # jacobian is absorbed by Gauss-Jacobi(alpha=1) points in v.
        v, wv = roots_jacobi(order, 1.0, 0.0)
        v = 0.5 * (v + 1.0)
        wv = 0.25 * wv
        u2, v2 = np.meshgrid(x, v, indexing="ij")
        w = np.outer(wx, wv)
        pts = np.column_stack([(u2 * (1.0 - v2)).ravel(), v2.ravel()])
        wts = w.ravel()
    else:
        raise ValueError(f"unknown cell kind {cell_kind!r}")
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def shape_functions(cell_kind, points):
    """Nodal shape functions and reference gradients at given points.

    Returns
    -------
    phi : (n_local, q) ndarray
    dphi : (n_local, q, 2) ndarray
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    xi, eta = pts[:, 0], pts[:, 1]
    q = pts.shape[0]
    one = np.ones(q)
    zero = np.zeros(q)
    if cell_kind == TRIANGLE:
        phi = np.stack([1.0 - xi - eta, xi, eta])
        dphi = np.empty((3, q, 2))
        dphi[0, :, 0], dphi[0, :, 1] = -one, -one
        dphi[1, :, 0], dphi[1, :, 1] = one, zero
        dphi[2, :, 0], dphi[2, :, 1] = zero, one
    elif cell_kind == QUAD:
        # vertices (0,0), (1,0), (1,1), (0,1), counterclockwise
        phi = np.stack(
            [(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta]
        )
        dphi = np.empty((4, q, 2))
        dphi[0, :, 0], dphi[0, :, 1] = -(1 - eta), -(1 - xi)
        dphi[1, :, 0], dphi[1, :, 1] = 1 - eta, -xi
        dphi[2, :, 0], dphi[2, :, 1] = eta, xi
        dphi[3, :, 0], dphi[3, :, 1] = -eta, 1 - xi
    else:
        raise ValueError(f"unknown cell kind {cell_kind!r}")
    return phi, dphi


@lru_cache(maxsize=None)
def basis_tables(cell_kind, order):
    """Shape functions evaluated at the Gauss points of ``gauss_rule``.

    Returns ``(points, weights, phi, dphi)`` with read-only arrays;
    cached so repeated assembly and error evaluation share tables.
    """
    pts, wts = gauss_rule(cell_kind, order)
    phi, dphi = shape_functions(cell_kind, pts)
    phi.setflags(write=False)
    dphi.setflags(write=False)
    return pts, wts, phi, dphi
