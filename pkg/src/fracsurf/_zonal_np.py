"""Pure-numpy fallback for the zonal series kernel.

Same contract and, up to the last bit, same arithmetic as the compiled
kernel in ``_zonal.pyx``: the per-point operation sequence (Legendre
three-term recurrence, derivative recurrence, Kahan-compensated
accumulation) is written with identical association so both backends
agree bit-for-bit on IEEE doubles.
"""

import numpy as np


def zonal_sums(coeffs, t):
    """Legendre series sums and derivative sums at many points.

    Parameters
    ----------
    coeffs : (m, j_max + 1) array
        One row per series; column ``j`` multiplies ``P_j``.
    t : (n,) array
        Evaluation points in [-1, 1].

    Returns
    -------
    s0 : (m, n) ndarray
        ``sum_j coeffs[i, j] * P_j(t)``.
    s1 : (m, n) ndarray
        ``sum_j coeffs[i, j] * P_j'(t)`` (derivative in ``t``).
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    t = np.ascontiguousarray(t, dtype=np.float64)
    if coeffs.ndim != 2 or t.ndim != 1:
        raise ValueError("coeffs must be (m, j_max+1) and t must be 1-d")
    m, ncols = coeffs.shape
    n = t.shape[0]

    s0 = np.zeros((m, n))
    c0 = np.zeros((m, n))
    s1 = np.zeros((m, n))
    c1 = np.zeros((m, n))
    term = np.empty((m, n))
    y = np.empty((m, n))
    tot = np.empty((m, n))

    p_prev = np.zeros(n)  # P_{j-1}, seeded with P_{-1} = 0
    p = np.ones(n)  # P_j, seeded with P_0 = 1
    dp_prev = np.zeros(n)  # P'_{j-1}, seeded with P'_{-1} = 0
    dp = np.zeros(n)  # P'_j, seeded with P'_0 = 0
    p_next = np.empty(n)
    dp_next = np.empty(n)
    buf = np.empty(n)

    for j in range(ncols):
        cj = coeffs[:, j]

        np.multiply(cj[:, None], p[None, :], out=term)
        np.subtract(term, c0, out=y)
        np.add(s0, y, out=tot)
        np.subtract(tot, s0, out=c0)
        np.subtract(c0, y, out=c0)
        s0, tot = tot, s0

        np.multiply(cj[:, None], dp[None, :], out=term)
        np.subtract(term, c1, out=y)
        np.add(s1, y, out=tot)
        np.subtract(tot, s1, out=c1)
        np.subtract(c1, y, out=c1)
        s1, tot = tot, s1

        # advance: P_{j+1} = ((2j+1) t P_j - j P_{j-1}) / (j+1)
        #          P'_{j+1} = P'_{j-1} + (2j+1) P_j
        a = float(2 * j + 1)
        b = float(j)
        c = float(j + 1)
        np.multiply(t, p, out=p_next)
        np.multiply(p_next, a, out=p_next)
        np.multiply(p_prev, b, out=buf)
        np.subtract(p_next, buf, out=p_next)
        np.divide(p_next, c, out=p_next)
        np.multiply(p, a, out=dp_next)
        np.add(dp_next, dp_prev, out=dp_next)
        p_prev, p, p_next = p, p_next, p_prev
        dp_prev, dp, dp_next = dp, dp_next, dp_prev

    return s0, s1
