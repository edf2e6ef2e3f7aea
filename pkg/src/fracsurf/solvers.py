"""Direct and iterative solvers for the shifted systems (mu M + A) U = b.

A run of the fractional solver needs hundreds of such solves with the
same sparsity pattern and different shifts.  :class:`ShiftedFamily`
merges the patterns of M and A once and then builds each shifted matrix
by a pure value combination, handing it to SuperLU in symmetric mode
(zero diagonal-pivot threshold, fill-reducing ordering), which behaves
like a sparse Cholesky factorization on SPD input.

The largest shifts reach ~1e24 for the default quadrature spacing; the
shifted values stay far below the overflow threshold, which is asserted
rather than rescaled away.
"""

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

_MAX_ENTRY = 1e300


class SolverError(RuntimeError):
    """Hard failure of a linear solve (broken assembly, singular pivot)."""


class CgConvergenceError(SolverError):
    """Conjugate gradients ran out of iterations.

    Carries the best iterate and its relative residual.
    """

    def __init__(self, message, iterate, residual, iterations):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual
        self.iterations = iterations


class Factor:
    """Factorized shifted matrix; solves check their own residual."""

    def __init__(self, matrix, lu):
        self.matrix = matrix
        self._lu = lu
        self._row_norm = float(np.abs(matrix).sum(axis=1).max())

    def solve(self, b, check=True):
        b = np.asarray(b, dtype=float)
        if not np.all(np.isfinite(b)):
            raise ValueError("right-hand side contains non-finite entries")
        u = self._lu.solve(b)
        if check:
            # backward-stable criterion: residual small against both the
            # data norm and ||K|| ||U|| (near-kernel shifts can make
            # ||U|| >> ||b|| without any loss of factorization quality)
            res = np.linalg.norm(self.matrix @ u - b)
            scale = np.linalg.norm(b) + self._row_norm * np.linalg.norm(u)
            if res > 1e-10 * max(scale, 1e-300):
                raise SolverError(
                    f"direct solve residual {res:.3e} exceeds tolerance "
                    f"(scale {scale:.3e})"
                )
        return u


class ShiftedFamily:
    """Shared-pattern direct solver for the pencil (mu M + A).

    Shifts below the representability floor ``~ eps ||A|| / ||M||``
    would leave the shifted matrix bit-identical to the singular A;
    they are clamped to the floor, whose effect on the resolvent is far
    below the solve tolerance, and the floor factorization is cached
    because whole quadrature tails share it.
    """

    def __init__(self, mass, stiffness):
        if mass.shape != stiffness.shape:
            raise ValueError("mass and stiffness must have the same shape")
        n = mass.shape[0]
        # merge the two sparsity patterns once; explicit zeros are kept
        # (scipy's sparse addition would prune them)
        keys = []
        for mat in (mass, stiffness):
            csc = sparse.csc_matrix(mat)
            csc.sum_duplicates()
            csc.sort_indices()
            cols = np.repeat(np.arange(n, dtype=np.int64), np.diff(csc.indptr))
            keys.append((csc, cols * n + csc.indices))
        union = np.union1d(keys[0][1], keys[1][1])
        data = np.zeros((2, union.shape[0]))
        for slot, (csc, key) in enumerate(keys):
            data[slot, np.searchsorted(union, key)] = csc.data
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(union // n, minlength=n), out=indptr[1:])
        self._template = sparse.csc_matrix(
            (np.zeros(union.shape[0]), (union % n).astype(np.int32), indptr),
            shape=(n, n),
        )
        self._m_data = data[0]
        self._a_data = data[1]
        eps = np.finfo(float).eps
        self.shift_floor = 64.0 * eps * np.abs(data[1]).max() / np.abs(data[0]).max()
        self._floor_factor = None

    @property
    def shape(self):
        return self._template.shape

    def matrix(self, mu):
        """The shifted matrix mu*M + A on the merged pattern."""
        if mu <= 0.0:
            raise ValueError(f"shift must be positive, got {mu}")
        k = self._template.copy()
        k.data = mu * self._m_data + self._a_data
        if np.abs(k.data).max() >= _MAX_ENTRY:
            raise SolverError(f"shifted matrix entries overflow at mu = {mu:.3e}")
        return k

    def factorize(self, mu):
        if mu <= 0.0:
            raise ValueError(f"shift must be positive, got {mu}")
        clamped = mu < self.shift_floor
        if clamped and self._floor_factor is not None:
            return self._floor_factor
        k = self.matrix(max(mu, self.shift_floor))
        diag = k.diagonal()
        if diag.min() <= 0.0:
            raise SolverError(
                "non-positive diagonal pivot: the pencil is not SPD "
                "(broken assembly?)"
            )
        try:
            lu = spla.splu(
                k,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError as exc:
            raise SolverError(
                f"factorization failed at shift {mu:.6e} "
                f"(non-SPD pivot / broken assembly?): {exc}"
            ) from exc
        factor = Factor(k, lu)
        if clamped:
            self._floor_factor = factor
        return factor

    def solve(self, mu, b, check=True):
        return self.factorize(mu).solve(b, check=check)


class CgShiftSolver:
    """Iterative drop-in for :class:`ShiftedFamily` based on CG."""

    def __init__(self, mass, stiffness, tol=1e-10, maxiter=None):
        self.mass = mass
        self.stiffness = stiffness
        self.tol = tol
        self.maxiter = maxiter

    def solve(self, mu, b, check=True):
        u, _ = solve_cg(self.mass, self.stiffness, mu, b, self.tol, self.maxiter)
        return u


def solve_cg(mass, stiffness, mu, b, tol=1e-10, maxiter=None):
    """Jacobi-preconditioned CG solve of (mu M + A) U = b.

    Returns ``(U, iterations)``; raises :class:`CgConvergenceError`
    with the best iterate attached when the iteration limit is hit.
    """
    if mu <= 0.0:
        raise ValueError(f"shift must be positive, got {mu}")
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    k = (mu * mass + stiffness).tocsr()
    diag = k.diagonal()
    if np.any(diag <= 0.0):
        raise SolverError("non-positive diagonal: system is not SPD")
    precond = spla.LinearOperator(k.shape, matvec=lambda x: x / diag)
    iterations = 0

    def count(_xk):
        nonlocal iterations
        iterations += 1

    u, info = spla.cg(k, b, rtol=tol, atol=0.0, maxiter=maxiter, M=precond, callback=count)
    if info > 0:
        res = np.linalg.norm(k @ u - b) / max(np.linalg.norm(b), 1e-300)
        raise CgConvergenceError(
            f"CG did not converge within {info} iterations "
            f"(relative residual {res:.3e})",
            iterate=u,
            residual=res,
            iterations=iterations,
        )
    if info < 0:
        raise SolverError(f"CG failed with status {info}")
    return u, iterations
