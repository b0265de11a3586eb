"""Small dense linear-algebra kernels shared by several modules.

Everything here is written for tiny matrices (n <= 4 in practice) and is
compiled with numba so it can be called from the simulation kernel.
"""

import numpy as np
from numba import njit

# diagonal (6, 6) Pade coefficients c_k = (2q-k)! q! / ((2q)! k! (q-k)!)
_PADE6 = np.array([1.0, 1.0 / 2.0, 5.0 / 44.0, 1.0 / 66.0,
                   1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0])


@njit(cache=True)
def expm(a):
    """Matrix exponential by scaling and squaring with a (6, 6) Pade approximant.

    The matrix is scaled by ``2**-s`` until its infinity norm is at most 1/2,
    where the truncation error of the approximant is below 4e-16.
    """
    n = a.shape[0]
    norm = 0.0
    for i in range(n):
        row = 0.0
        for j in range(n):
            row += abs(a[i, j])
        if row > norm:
            norm = row
    s = 0
    if norm > 0.5:
        s = int(np.ceil(np.log2(norm / 0.5)))
    x = a / (2.0 ** s)
    ident = np.eye(n)
    num = _PADE6[0] * ident
    den = _PADE6[0] * ident
    power = ident.copy()
    sign = 1.0
    for k in range(1, 7):
        power = power @ x
        sign = -sign
        num = num + _PADE6[k] * power
        den = den + sign * _PADE6[k] * power
    r = np.ascontiguousarray(np.linalg.solve(den, num))
    for _ in range(s):
        r = r @ r
    return r


@njit(cache=True)
def solve_lyapunov_kron(a, q):
    """Solve ``a.T @ p + p @ a + q = 0`` through the Kronecker-vectorized system."""
    n = a.shape[0]
    ident = np.eye(n)
    at = np.ascontiguousarray(a.T)
    lhs = np.kron(ident, at) + np.kron(at, ident)
    # column-major vec: vec(a.T p) = (I kron a.T) vec(p), vec(p a) = (a.T kron I) vec(p)
    rhs = -np.ascontiguousarray(q.T).reshape(n * n)
    vec = np.linalg.solve(lhs, rhs)
    p = np.ascontiguousarray(vec.reshape(n, n).T)
    return 0.5 * (p + p.T)


def sym_sqrt(p):
    """Return ``(P^{1/2}, P^{-1/2})`` of a symmetric positive definite matrix."""
    w, v = np.linalg.eigh(p)
    if w.min() <= 0.0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    root = (v * np.sqrt(w)) @ v.T
    inv_root = (v / np.sqrt(w)) @ v.T
    return root, inv_root


def is_hurwitz(a, threshold=-1e-9):
    return bool(np.max(np.linalg.eigvals(a).real) < threshold)


def is_anti_hurwitz(a, threshold=1e-9):
    return bool(np.min(np.linalg.eigvals(a).real) > threshold)


def numerical_rank(a, rtol):
    s = np.linalg.svd(np.atleast_2d(a), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))
