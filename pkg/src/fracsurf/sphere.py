"""Analytic reference problem on the unit sphere.

The data is the odd step function (+1 on the upper hemisphere, -1 on
the lower) or a single zonal mode.  Solutions of the fractional problem
are represented by truncated zonal series: axisymmetric spherical
harmonics ``zeta_j(theta) = sqrt((2j+1)/(4 pi)) P_j(cos theta)`` with
eigenvalues ``j (j + 1)``, where ``P_j`` are the Legendre polynomials.

The data coefficients of the step function have the closed form

    f_j = 2 sqrt(pi) (P_{j-1}(0) - P_{j+1}(0)) / sqrt(2j+1)   (odd j)

and vanish identically for even ``j``; see the tests for the quadrature
oracle backing this identity.
"""

import math

import numpy as np

from .kernels import zonal_sums

SPHERE_AREA = 4.0 * math.pi
DEFAULT_MODES = 10000

_E3 = np.array([0.0, 0.0, 1.0])


def _require_on_sphere(points, tol=1e-9):
    r = np.linalg.norm(points, axis=-1)
    worst = float(np.abs(r - 1.0).max()) if r.size else 0.0
    if worst > tol:
        raise ValueError(f"point off the unit sphere by {worst:.3e}")


def step_eval(x):
    """Step data at one point of the sphere: +1 if x3 >= 0 else -1."""
    x = np.asarray(x, dtype=float)
    _require_on_sphere(x)
    return 1.0 if x[2] >= 0.0 else -1.0


def step_values(points):
    """Vectorized step data; validates that points lie on the sphere."""
    points = np.asarray(points, dtype=float)
    _require_on_sphere(points)
    return np.where(points[..., 2] >= 0.0, 1.0, -1.0)


def legendre_pack(j_max, t):
    """Legendre polynomials and derivatives up to degree ``j_max``.

    Values come from the three-term recurrence; derivatives from
    ``P'_{j+1} = P'_{j-1} + (2j+1) P_j``, which is the analytic
    continuation of ``(1-t^2) P'_j = j (P_{j-1} - t P_j)`` and stays
    finite at the endpoints.

    Returns ``(p, dp)`` of shape ``(j_max + 1,) + shape(t)``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise ValueError("argument outside [-1, 1]")
    shape = (j_max + 1,) + t.shape
    p = np.empty(shape)
    dp = np.empty(shape)
    p[0] = 1.0
    dp[0] = 0.0
    if j_max >= 1:
        p[1] = t
        dp[1] = 1.0
    for j in range(1, j_max):
        p[j + 1] = ((2 * j + 1) * t * p[j] - j * p[j - 1]) / (j + 1)
        dp[j + 1] = dp[j - 1] + (2 * j + 1) * p[j]
    return p, dp


def legendre_at_zero(j_max):
    """Table of P_j(0), j = 0..j_max (exact zeros for odd j)."""
    p0 = np.zeros(j_max + 1)
    p0[0] = 1.0
    for j in range(1, j_max):
        p0[j + 1] = -j * p0[j - 1] / (j + 1)
    return p0


def step_coefficients(j_max):
    """Zonal expansion coefficients of the step data up to ``j_max``.

    Even entries are bitwise zero (the data is odd in x3).
    """
    if j_max < 1:
        raise ValueError("need at least one mode")
    p0 = legendre_at_zero(j_max + 1)
    f = np.zeros(j_max + 1)
    j = np.arange(1, j_max + 1, 2)
    f[j] = 2.0 * math.sqrt(math.pi) * (p0[j - 1] - p0[j + 1]) / np.sqrt(2.0 * j + 1.0)
    return f


def eigenvalues(j_max):
    """Laplace-Beltrami eigenvalues j (j + 1) of the zonal modes."""
    j = np.arange(j_max + 1, dtype=float)
    return j * (j + 1.0)


def solution_coefficients(data_coeffs, s):
    """Coefficients of u = L^{-s} f from the data coefficients.

    ``s`` may be 1 for the classical Laplace-Beltrami reference; the
    fractional pipeline itself restricts to s in (0, 1).
    """
    if not 0.0 < s <= 1.0:
        raise ValueError(f"fractional power must be in (0, 1], got {s}")
    lam = eigenvalues(len(data_coeffs) - 1)
    u = np.zeros_like(data_coeffs)
    u[1:] = lam[1:] ** (-s) * data_coeffs[1:]
    return u


def _zeta_norms(j_max):
    j = np.arange(j_max + 1, dtype=float)
    return np.sqrt((2.0 * j + 1.0) / (4.0 * math.pi))


def _kahan_descending(terms):
    """Compensated sum over axis 0, highest index first."""
    total = np.zeros(terms.shape[1:])
    comp = np.zeros_like(total)
    for j in range(terms.shape[0] - 1, -1, -1):
        y = terms[j] - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def exact_solution(theta, s, j_max=DEFAULT_MODES):
    """Truncated series for u(theta) = (L^{-s} f)(theta), step data.

    Summed with compensated accumulation from the highest mode down.
    ``theta`` may be a scalar or an array of colatitudes in [0, pi].
    """
    theta = np.asarray(theta, dtype=float)
    if not 0.0 < s < 1.0:
        raise ValueError(f"fractional power must be in (0, 1), got {s}")
    coeffs = solution_coefficients(step_coefficients(j_max), s) * _zeta_norms(j_max)
    t = np.cos(theta)
    flat = np.atleast_1d(t).ravel()
    out = np.empty_like(flat)
    chunk = 256
    for start in range(0, flat.size, chunk):
        sl = flat[start : start + chunk]
        p, _ = legendre_pack(j_max, sl)
        out[start : start + chunk] = _kahan_descending(coeffs[:, None] * p)
    return out.reshape(theta.shape) if theta.shape else float(out[0])


def exact_gradient(theta, s, j_max=DEFAULT_MODES):
    """Tangential gradient of the step-data solution at (theta, phi=0).

    Returned as an ambient 3-vector tangent to the sphere; exactly zero
    at the poles (the series is axisymmetric).
    """
    theta = np.asarray(theta, dtype=float)
    if not 0.0 < s < 1.0:
        raise ValueError(f"fractional power must be in (0, 1), got {s}")
    coeffs = solution_coefficients(step_coefficients(j_max), s) * _zeta_norms(j_max)
    t = np.cos(theta)
    flat = np.atleast_1d(t).ravel()
    slope = np.empty_like(flat)
    chunk = 256
    for start in range(0, flat.size, chunk):
        sl = flat[start : start + chunk]
        _, dp = legendre_pack(j_max, sl)
        slope[start : start + chunk] = _kahan_descending(coeffs[:, None] * dp)
    slope = slope.reshape(theta.shape)
    cos_t = np.cos(theta)
    sin_t = np.where(np.abs(cos_t) >= 1.0, 0.0, np.sin(theta))  # exact at poles
    points = np.stack([sin_t, np.zeros_like(sin_t), cos_t], axis=-1)
    # grad = S'(t) (e3 - t p); identically zero at the poles since p = +-e3
    return slope[..., None] * (_E3 - cos_t[..., None] * points)


class SphereData:
    """Right-hand-side data on the sphere: ``"step"`` or ``"mode:<j>"``."""

    def __init__(self, name="step"):
        self.name = name
        if name == "step":
            self.mode = None
        elif name.startswith("mode:"):
            self.mode = int(name.split(":", 1)[1])
            if self.mode < 1:
                raise ValueError("zonal mode index must be >= 1")
        else:
            raise ValueError(f"unknown data kind {name!r}")

    def coefficients(self, j_max):
        if self.mode is None:
            return step_coefficients(j_max)
        if self.mode > j_max:
            raise ValueError("mode index exceeds the truncation")
        f = np.zeros(j_max + 1)
        f[self.mode] = 1.0
        return f

    def values(self, points):
        points = np.asarray(points, dtype=float)
        if self.mode is None:
            return step_values(points)
        _require_on_sphere(points)
        t = np.clip(points[..., 2], -1.0, 1.0)
        p, _ = legendre_pack(self.mode, t)
        return _zeta_norms(self.mode)[self.mode] * p[self.mode]


class ZonalSolutions:
    """Truncated zonal solutions u = L^{-s} f for several powers at once.

    Bundling the powers lets one Legendre recurrence sweep serve every
    ``s`` (the hot path of the convergence studies).
    """

    def __init__(self, data, s_values, j_max=DEFAULT_MODES):
        self.data = data if isinstance(data, SphereData) else SphereData(data)
        self.s_values = tuple(s_values)
        self.j_max = j_max
        f = self.data.coefficients(j_max)
        nu = _zeta_norms(j_max)
        self.series = np.ascontiguousarray(
            np.stack([solution_coefficients(f, s) * nu for s in self.s_values])
        )

    def eval(self, points):
        """Values and tangential gradients at points on the sphere.

        Returns ``(values, gradients)`` with shapes ``(n_s, n)`` and
        ``(n_s, n, 3)``.
        """
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        _require_on_sphere(points)
        t = np.clip(points[:, 2], -1.0, 1.0)
        s0, s1 = zonal_sums(self.series, t)
        direction = _E3[None, :] - t[:, None] * points
        return s0, s1[:, :, None] * direction[None, :, :]

    def coefficient_norms(self):
        """l2 norm of the solution coefficient sequence, one per s."""
        return np.linalg.norm(self.series / _zeta_norms(self.j_max), axis=1)
