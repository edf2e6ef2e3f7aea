"""Sinc quadrature of the Balakrishnan integral for negative powers.

The integral representation

    L^{-s} f = (sin(pi s) / pi) * integral_0^inf mu^{-s} (mu I + L)^{-1} f dmu

is discretized, after the substitution mu = exp(y), by a trapezoid-type
rule with spacing ``k``: nodes ``y_l = k l`` for ``l = -m_left ...
n_right``, shifts ``mu_l = exp(y_l)`` and weights

    w_l = (k sin(pi s) / pi) * exp((1 - s) y_l).

The truncation counts that balance the three quadrature error sources
are ``n_right = ceil(pi^2 / (4 s k^2))`` and ``m_left =
ceil(pi^2 / (4 (1 - s) k^2))``; the rule then converges like
``exp(-c / k)``.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .solvers import ShiftedFamily


def _ceil_guarded(x):
    # absorb last-bit fp noise so exact-integer arguments stay put
    return int(math.ceil(x * (1.0 - 1e-12)))


def _check_power(s):
    if not 0.0 < s < 1.0:
        raise ValueError(f"fractional power must be in (0, 1), got {s}")


def choose_truncation(s, k):
    """Balanced truncation counts ``(m_left, n_right)`` for spacing k."""
    _check_power(s)
    if k <= 0.0:
        raise ValueError(f"quadrature spacing must be positive, got {k}")
    n_right = _ceil_guarded(math.pi**2 / (4.0 * s * k * k))
    m_left = _ceil_guarded(math.pi**2 / (4.0 * (1.0 - s) * k * k))
    return m_left, n_right


@dataclass(frozen=True)
class SincRule:
    """Sinc rule for lambda^{-s}: spacing, truncation, nodes, weights."""

    s: float
    k: float
    m_left: int  # terms with negative exponent (small shifts)
    n_right: int  # terms with positive exponent (large shifts)

    @classmethod
    def create(cls, s, k, m_left=None, n_right=None):
        """Rule with balanced truncation unless counts are overridden."""
        _check_power(s)
        if k <= 0.0:
            raise ValueError(f"quadrature spacing must be positive, got {k}")
        auto_m, auto_n = choose_truncation(s, k)
        m = auto_m if m_left is None else int(m_left)
        n = auto_n if n_right is None else int(n_right)
        if m < 0 or n < 0:
            raise ValueError("truncation counts must be nonnegative")
        return cls(s=s, k=k, m_left=m, n_right=n)

    @cached_property
    def nodes(self):
        """Quadrature nodes y_l = k l, l = -m_left .. n_right."""
        return self.k * np.arange(-self.m_left, self.n_right + 1, dtype=float)

    @cached_property
    def shifts(self):
        """Resolvent shifts exp(y_l)."""
        return np.exp(self.nodes)

    @cached_property
    def weights(self):
        """Positive weights (k sin(pi s)/pi) exp((1-s) y_l)."""
        return (self.k * math.sin(math.pi * self.s) / math.pi) * np.exp(
            (1.0 - self.s) * self.nodes
        )

    @property
    def n_terms(self):
        return self.m_left + self.n_right + 1


def scalar_apply(rule, lam):
    """The scalar rational symbol q_k(lambda) approximating lambda^{-s}.

    Strictly positive and strictly decreasing in lambda.  Summed with
    ``math.fsum`` so the result is independent of term ordering.
    """
    if lam <= 0.0:
        raise ValueError(f"argument must be positive, got {lam}")
    return math.fsum(w / (mu + lam) for w, mu in zip(rule.weights, rule.shifts))


def error_bound_rho(k, r, t, s, m_left, n_right):
    """A-priori quadrature error envelope rho(k, r, t).

    Sum of the discretization term and the two tail-truncation terms;
    valid for source regularity index ``r < s`` (``t`` is part of the
    bound's signature but does not enter the envelope itself).
    """
    del t
    if r >= s:
        raise ValueError(f"bound requires r < s, got r = {r}, s = {s}")
    if k <= 0.0:
        raise ValueError(f"quadrature spacing must be positive, got {k}")
    r_plus = max(0.0, r)
    half = math.pi**2 / (2.0 * k)
    return (
        math.exp(-half) / math.sinh(half)
        + math.exp(-(s - r_plus) * n_right * k)
        + math.exp(-(1.0 - s) * m_left * k)
    )


def apply_fractional_inverse(
    rule, mass, stiffness, load, solver=None, deflate=True, workers=1
):
    """Approximate L^{-s} applied to the load: U = sum_l w_l U^l.

    Each node solves ``(mu_l M + A) U^l = b``; the weighted sum runs in
    fixed node order (left to right) with compensated accumulation,
    since the shifts span many orders of magnitude.  With ``workers``
    greater than one the node solves run on a thread pool, each writing
    into its own slot, and the reduction stays serial, so the result
    does not depend on the thread count.

    The load must come from zero-mean data.  With ``deflate`` (default)
    the constant component is projected out of the load once and out of
    every node solution: in exact arithmetic this is a no-op (each U^l
    has zero mean), but in floating point the small-shift resolvents
    amplify any residual mean by up to exp(k * m_left * s) ~ 1e16,
    which would otherwise drown the result in a spurious constant.

    Returns the coefficient vector of U.
    """
    b = np.asarray(load, dtype=float)
    if solver is None:
        solver = ShiftedFamily(mass, stiffness)
    ones = np.ones(b.shape[0])
    m_ones = mass @ ones
    gram = float(ones @ m_ones)
    if deflate:
        b = b - (float(ones @ b) / gram) * m_ones

    weights = rule.weights
    shifts = rule.shifts

    def node_solution(index):
        try:
            u_node = solver.solve(shifts[index], b)
        except Exception as exc:
            node = index - rule.m_left
            raise RuntimeError(f"solve failed at quadrature node {node}: {exc}") from exc
        if deflate:
            u_node = u_node - (float(m_ones @ u_node) / gram)
        return u_node

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            solutions = list(pool.map(node_solution, range(rule.n_terms)))
    else:
        solutions = map(node_solution, range(rule.n_terms))

    acc = np.zeros_like(b)
    comp = np.zeros_like(b)
    for weight, u_node in zip(weights, solutions):
        term = weight * u_node
        y = term - comp
        tot = acc + y
        comp = (tot - acc) - y
        acc = tot
    return acc
