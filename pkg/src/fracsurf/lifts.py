"""Lift maps from a polyhedral surface onto the unit sphere.

Two lifts are provided.  :class:`RadialLift` is the orthogonal
(signed-distance) projection ``x -> x / |x|``; it approximates the
geometry to second order in the mesh size.  :class:`SixPatchLift` keeps
two coordinates fixed and re-solves the third from ``|z| = 1`` on each
of six axis-aligned patches; it is representative of generic lifts and
only first-order accurate.  :class:`IdentityLift` treats the mesh
itself as the target surface and is used for diagnostics and oracles.

All lifts are stateless and operate on arrays of points of any leading
shape.  ``sigma`` denotes the ratio between the area element of the
lifted surface and the area element of the mesh.
"""

import numpy as np

from .mesh import quadrature_geometry

_ORIGIN_TOL = 1e-14


class RadialLift:
    """Orthogonal projection onto the unit sphere, ``x -> x / |x|``."""

    kind = "sdf"

    def lift_points(self, x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        if np.any(r < _ORIGIN_TOL):
            raise ValueError("radial lift undefined at the origin")
        return x / r

    def jacobians(self, x):
        """d/dx of the projection: (I - n n^T) / |x| with n = x/|x|."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        if np.any(r < _ORIGIN_TOL):
            raise ValueError("radial lift undefined at the origin")
        n = x / r[..., None]
        eye = np.broadcast_to(np.eye(3), x.shape + (3,))
        return (eye - n[..., :, None] * n[..., None, :]) / r[..., None, None]


class SixPatchLift:
    """Piecewise axis-aligned lift onto the unit sphere.

    The ambient space is split into six regions by the dominant
    coordinate.  In region (i, +-) the two other coordinates are kept
    and the i-th is re-solved from |z| = 1 with the matching sign.
    Points on region boundaries are assigned deterministically: the
    smallest dominant index wins, + before -.  (argmax over |x_i|
    realizes exactly this rule.)
    """

    kind = "generic"

    @staticmethod
    def _patches(x):
        """Dominant axis (argmax of |x_i|, first on ties) and its sign."""
        ax = np.abs(x).argmax(axis=-1)
        dom = np.take_along_axis(x, ax[..., None], axis=-1)[..., 0]
        sign = np.where(dom >= 0.0, 1.0, -1.0)
        return ax, sign

    def lift_points(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_2d(x.reshape(-1, 3)).copy()
        ax, sign = self._patches(flat)
        rows = np.arange(flat.shape[0])
        flat[rows, ax] = 0.0
        rest = np.einsum("ni,ni->n", flat, flat)
        if np.any(rest > 1.0 + 1e-12):
            raise ValueError("point outside the six-patch lift domain")
        flat[rows, ax] = sign * np.sqrt(np.maximum(1.0 - rest, 0.0))
        return flat.reshape(x.shape)

    def jacobians(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_2d(x.reshape(-1, 3)).copy()
        ax, sign = self._patches(flat)
        rows = np.arange(flat.shape[0])
        flat[rows, ax] = 0.0
        rest = np.einsum("ni,ni->n", flat, flat)
        if np.any(rest > 1.0 - 1e-12):
            raise ValueError("six-patch jacobian undefined at the patch rim")
        w = np.sqrt(1.0 - rest)
        jac = np.tile(np.eye(3), (flat.shape[0], 1, 1))
        # row ax: d z_ax / d x_j = -sign * x_j / w for j != ax, 0 for j = ax
        jac[rows, ax, :] = -(sign / w)[:, None] * flat
        return jac.reshape(x.shape + (3,))


class IdentityLift:
    """No-op lift: the mesh is taken as the exact surface (diagnostics)."""

    kind = "identity"

    def lift_points(self, x):
        return np.array(x, dtype=float)

    def jacobians(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(3), x.shape + (3,)).copy()


_LIFTS = {"sdf": RadialLift, "generic": SixPatchLift, "identity": IdentityLift}


def make_lift(kind):
    """Lift instance by name: ``sdf``, ``generic`` or ``identity``."""
    try:
        return _LIFTS[kind]()
    except KeyError:
        raise ValueError(f"unknown lift kind {kind!r}") from None


def lift_point(lift, x):
    """Lift a single ambient point onto the surface."""
    return lift.lift_points(np.asarray(x, dtype=float))


def composite_jacobian(lift, emap, xi):
    """Jacobian of ``lift o F`` at a reference point, shape (3, 2).

    Chain rule with the analytic differential of the lift; the columns
    are tangent to the target surface at the lifted point.
    """
    jac_f = emap.jacobian(xi)
    x = emap.point(xi)
    jac_p = lift.jacobians(x)
    return jac_p @ jac_f


def sigma_at(lift, emap, xi):
    """Area-element ratio sigma at one reference point of one cell."""
    jac_f = emap.jacobian(xi)
    mu_f = np.linalg.norm(np.cross(jac_f[:, 0], jac_f[:, 1]))
    if mu_f <= 1e-300:
        raise ValueError(f"degenerate area element in cell {emap.cell}")
    jac_c = lift.jacobians(emap.point(xi)) @ jac_f
    mu_c = np.linalg.norm(np.cross(jac_c[:, 0], jac_c[:, 1]))
    return float(mu_c / mu_f)


def sigma_values(lift, geo):
    """sigma at every Gauss point of a ``quadrature_geometry`` table.

    Returns an (n_cells, q) array; raises on any degenerate cell.
    """
    points = geo["points"]
    jac = geo["jac"]
    if np.any(geo["area"] <= 1e-300):
        raise ValueError("degenerate area element")
    jac_p = lift.jacobians(points)
    jac_c = np.einsum("cqij,cqjd->cqid", jac_p, jac)
    mu_c = np.linalg.norm(np.cross(jac_c[..., 0], jac_c[..., 1]), axis=-1)
    return mu_c / geo["area"]


def sigma_sup_deviation(lift, mesh, quad_order=6):
    """max |sigma - 1| over the Gauss points of every cell."""
    geo = quadrature_geometry(mesh, quad_order)
    return float(np.abs(sigma_values(lift, geo) - 1.0).max())


def pullback(lift, f):
    """Compose a function on the surface with the lift: x -> f(P(x))."""

    def pulled(x):
        return f(lift.lift_points(np.asarray(x, dtype=float)))

    return pulled
