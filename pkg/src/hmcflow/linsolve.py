"""Linear algebra kernels for the two time-stepping schemes.

The surface scheme produces one symmetric positive definite sparse matrix
per step, shared by the three coordinate components; it is solved by
Jacobi-preconditioned conjugate gradients (the matrix changes every step,
so factorization reuse buys nothing).  The axisymmetric scheme decouples
into strictly diagonally dominant tridiagonal systems, solved by direct
elimination without pivoting; the periodic variant is handled by a
rank-one (Sherman-Morrison) correction of the open solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.sparse import csr_matrix

ASSEMBLY_SYMMETRY_TOL = 1e-12
DEFAULT_CG_TOL = 1e-10
DENSE_FALLBACK_MAX = 200


class SolverError(RuntimeError):
    """Iterative solve failed; carries the final relative residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class DominanceError(ValueError):
    """Tridiagonal row lost strict diagonal dominance (time step too large
    or geometry degenerate)."""


@dataclass
class SparseSystem:
    """Symmetric positive definite system in CSR form."""

    matrix: csr_matrix

    def __post_init__(self):
        a = self.matrix
        if a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        scale = float(np.max(np.abs(a.data))) if a.nnz else 0.0
        skew = abs(a - a.T)
        asym = float(skew.max()) if skew.nnz else 0.0
        if asym > ASSEMBLY_SYMMETRY_TOL * max(scale, 1.0):
            raise SolverError(
                f"assembled matrix is not symmetric: |A - A^T| = {asym:.3e}"
            )
        diag = a.diagonal()
        if np.any(diag <= 0.0):
            raise SolverError("assembled matrix has a nonpositive diagonal entry")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def solve_spd(system: SparseSystem, rhs: np.ndarray, tol: float = DEFAULT_CG_TOL) -> np.ndarray:
    """Solve A x = b by preconditioned CG to a relative residual <= tol.

    ``rhs`` may be a vector or an (n, k) block of right-hand sides sharing
    the matrix.  Deterministic: fixed zero start, fixed reduction order.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    a = system.matrix
    b = np.asarray(rhs, dtype=float)
    single = b.ndim == 1
    cols = b.reshape(-1, 1) if single else b
    if cols.shape[0] != system.dimension:
        raise ValueError("rhs length does not match system dimension")
    inv_diag = 1.0 / a.diagonal()
    out = np.empty_like(cols)
    max_iter = 10 * system.dimension
    for j in range(cols.shape[1]):
        out[:, j] = _pcg(a, cols[:, j], inv_diag, tol, max_iter)
    return out[:, 0] if single else out


def _pcg(a, b, inv_diag, tol, max_iter):
    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return np.zeros_like(b)
    x = np.zeros_like(b)
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    for _ in range(max_iter):
        ap = a @ p
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        if np.linalg.norm(r) <= tol * norm_b:
            return x
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"CG did not converge in {max_iter} iterations",
        residual=float(np.linalg.norm(r) / norm_b),
    )


def solve_dense(matrix, rhs: np.ndarray) -> np.ndarray:
    """Dense Gaussian-elimination fallback for systems up to n = 200.

    Serves as the independent oracle for the iterative path.
    """
    a = matrix.toarray() if hasattr(matrix, "toarray") else np.asarray(matrix, float)
    if a.shape[0] > DENSE_FALLBACK_MAX:
        raise ValueError(f"dense fallback limited to n <= {DENSE_FALLBACK_MAX}")
    return np.linalg.solve(a, np.asarray(rhs, dtype=float))


@dataclass
class TridiagSystem:
    """Tridiagonal (optionally cyclic) system.

    ``sub``, ``diag``, ``sup`` all have length n.  For open systems
    sub[0] and sup[-1] must be zero.  For cyclic systems sub[0] is the
    matrix entry A[0, n-1] and sup[-1] is A[n-1, 0].  ``rhs`` is (n,) or
    (n, k).  Rows must be strictly diagonally dominant.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray
    cyclic: bool = False

    def __post_init__(self):
        self.sub = np.ascontiguousarray(self.sub, dtype=float)
        self.diag = np.ascontiguousarray(self.diag, dtype=float)
        self.sup = np.ascontiguousarray(self.sup, dtype=float)
        self.rhs = np.ascontiguousarray(self.rhs, dtype=float)
        n = self.diag.size
        if not (self.sub.size == n and self.sup.size == n and self.rhs.shape[0] == n):
            raise ValueError("band and rhs sizes disagree")
        if not self.cyclic and (self.sub[0] != 0.0 or self.sup[-1] != 0.0):
            raise ValueError("open system must have sub[0] = sup[-1] = 0")
        margin = np.abs(self.diag) - np.abs(self.sub) - np.abs(self.sup)
        if not np.all(margin > 0.0):
            worst = int(np.argmin(margin))
            raise DominanceError(
                f"row {worst} violates strict diagonal dominance "
                f"(margin {margin[worst]:.3e})"
            )


def solve_tridiagonal(system: TridiagSystem) -> np.ndarray:
    """Direct elimination solve; exact Dirichlet rows stay exact."""
    rhs = system.rhs
    single = rhs.ndim == 1
    cols = rhs.reshape(-1, 1) if single else rhs
    if system.cyclic:
        out = _cyclic_thomas(system.sub, system.diag, system.sup, cols)
    else:
        out = _thomas(system.sub, system.diag, system.sup, cols)
    return out[:, 0] if single else out


@njit(cache=True)
def _thomas_kernel(sub, diag, sup, rhs):
    n = diag.size
    k = rhs.shape[1]
    gamma = np.empty(n)
    x = np.empty((n, k))
    beta = diag[0]
    for j in range(k):
        x[0, j] = rhs[0, j] / beta
    for i in range(1, n):
        gamma[i] = sup[i - 1] / beta
        beta = diag[i] - sub[i] * gamma[i]
        for j in range(k):
            x[i, j] = (rhs[i, j] - sub[i] * x[i - 1, j]) / beta
    for i in range(n - 2, -1, -1):
        for j in range(k):
            x[i, j] -= gamma[i + 1] * x[i + 1, j]
    return x


def _thomas(sub, diag, sup, rhs):
    return _thomas_kernel(sub, diag, sup, np.ascontiguousarray(rhs))


def _cyclic_thomas(sub, diag, sup, rhs):
    # A = T + u v^T with u = (gamma, 0, ..., 0, sub[0... ]), following the
    # usual rank-one reduction: corner entries alpha = sub[0] (row 0, col n-1)
    # and beta = sup[-1] (row n-1, col 0).
    n = diag.size
    if n < 3:
        a = np.zeros((n, n))
        for i in range(n):
            a[i, i] = diag[i]
            a[i, (i - 1) % n] += sub[i]
            a[i, (i + 1) % n] += sup[i]
        return np.linalg.solve(a, rhs)
    alpha = sub[0]
    beta = sup[-1]
    gamma = -diag[0]
    diag_mod = diag.copy()
    diag_mod[0] -= gamma
    diag_mod[-1] -= alpha * beta / gamma
    sub_mod = sub.copy()
    sub_mod[0] = 0.0
    sup_mod = sup.copy()
    sup_mod[-1] = 0.0
    u = np.zeros((n, 1))
    u[0, 0] = gamma
    u[-1, 0] = beta
    y = _thomas_kernel(sub_mod, diag_mod, sup_mod, np.ascontiguousarray(rhs))
    q = _thomas_kernel(sub_mod, diag_mod, sup_mod, u)
    # v = (1, 0, ..., 0, alpha/gamma)
    denom = 1.0 + q[0, 0] + (alpha / gamma) * q[-1, 0]
    factor = (y[0, :] + (alpha / gamma) * y[-1, :]) / denom
    return y - q * factor
