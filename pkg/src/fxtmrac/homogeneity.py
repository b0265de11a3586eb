"""Linear dilations, homogeneous norms and homogeneity checks.

A dilation is the matrix group ``D(tau) = expm(G tau)`` for an anti-Hurwitz
generator ``G``.  Two homogeneous norms are provided:

* :class:`ExplicitNorm`, the weighted power sum
  ``phi(e) = (sum_i |e_i|^{rho / r_i})^{1/rho}`` with ``r_i = 1 + (i - n) nu``,
  homogeneous of degree one for the diagonal dilation ``diag(r)``;
* :class:`CanonicalNorm`, defined implicitly by ``||D(-ln phi) e||_P = 1``.
"""

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._linalg import expm, is_anti_hurwitz, solve_lyapunov_kron, sym_sqrt
from .exceptions import BisectionError, InvalidInputError

EXPLICIT = 0
CANONICAL = 1


@dataclass(frozen=True)
class Dilation:
    """Dilation group generated by ``generator``.

    ``P`` defaults to the solution of ``G^T P + P G = 2 I``, which exists
    and is positive definite whenever ``-G`` is Hurwitz.
    """

    generator: np.ndarray
    P: np.ndarray = None
    kappa1: float = field(init=False)
    kappa2: float = field(init=False)

    def __post_init__(self):
        g = np.array(self.generator, dtype=float, ndmin=2)
        if g.shape[0] != g.shape[1]:
            raise InvalidInputError(f"generator must be square, got {g.shape}")
        if not is_anti_hurwitz(g):
            raise InvalidInputError(
                "dilation generator must be anti-Hurwitz, eigenvalues "
                f"{np.round(np.linalg.eigvals(g), 6)}")
        if self.P is None:
            p = solve_lyapunov_kron(np.ascontiguousarray(-g), 2.0 * np.eye(g.shape[0]))
        else:
            p = np.array(self.P, dtype=float, ndmin=2)
        object.__setattr__(self, "generator", np.ascontiguousarray(g))
        object.__setattr__(self, "P", np.ascontiguousarray(0.5 * (p + p.T)))
        k1, k2 = monotonicity_constants(self)
        object.__setattr__(self, "kappa1", k1)
        object.__setattr__(self, "kappa2", k2)

    @property
    def n(self):
        return self.generator.shape[0]

    def __call__(self, tau):
        return dilation_apply(self, tau)

    def p_norm(self, tau):
        """Induced weighted norm ``||P^{1/2} D(tau) P^{-1/2}||_2``."""
        root, inv_root = sym_sqrt(self.P)
        return float(np.linalg.norm(root @ self(tau) @ inv_root, 2))

    def lyapunov_margin(self):
        """Smallest eigenvalue of ``P G + G^T P`` (must be positive)."""
        g, p = self.generator, self.P
        return float(np.linalg.eigvalsh(p @ g + g.T @ p)[0])


def dilation_apply(dil, tau):
    return expm(dil.generator * float(tau))


def monotonicity_constants(dil):
    """``(kappa1, kappa2)``: half the extreme eigenvalues of
    ``P^{1/2} G P^{-1/2} + P^{-1/2} G^T P^{1/2}``."""
    try:
        root, inv_root = sym_sqrt(dil.P)
    except np.linalg.LinAlgError:
        raise InvalidInputError("dilation metric P is not positive definite") from None
    s = root @ dil.generator @ inv_root
    w = np.linalg.eigvalsh(s + s.T)
    return 0.5 * float(w[-1]), 0.5 * float(w[0])


# -- explicit weighted power-sum norm -----------------------------------------

def explicit_weights(n, nu):
    r = 1.0 + (np.arange(1, n + 1) - n) * nu
    if np.any(r <= 0):
        raise InvalidInputError(f"weights 1 + (i - n) nu must be positive, got {r}")
    return r


@njit(cache=True)
def _phi_explicit(e, weights, rho):
    s = 0.0
    for i in range(e.shape[0]):
        s += abs(e[i]) ** (rho / weights[i])
    return s ** (1.0 / rho)


@njit(cache=True)
def _phi_explicit_grad(e, weights, rho):
    phi = _phi_explicit(e, weights, rho)
    out = np.zeros(e.shape[0])
    for i in range(e.shape[0]):
        p = rho / weights[i]
        out[i] = phi ** (1.0 - rho) / weights[i] * abs(e[i]) ** (p - 1.0) * np.sign(e[i])
    return out


def phi_explicit(e, rho, nu):
    e = np.ascontiguousarray(np.asarray(e, dtype=float).reshape(-1))
    return float(_phi_explicit(e, explicit_weights(e.shape[0], nu), float(rho)))


# -- canonical norm -----------------------------------------------------------

@njit(cache=True)
def _level(e, gen, P, s):
    y = expm(-s * gen) @ e
    return np.sqrt(y @ P @ y)


@njit(cache=True)
def _phi_canonical(e, gen, P, tol):
    """Solve ``||D(-s) e||_P = 1`` for ``s`` by bracketing then bisection.

    Returns ``exp(s)``; ``0`` for ``e == 0`` and ``-1`` if no bracket is found.
    """
    if not np.any(e != 0.0):
        return 0.0
    g0 = _level(e, gen, P, 0.0)
    if g0 == 1.0:
        return 1.0
    step = 1.0
    if g0 > 1.0:
        lo = 0.0
        hi = step
        while _level(e, gen, P, hi) > 1.0:
            lo = hi
            step *= 2.0
            hi = step
            if step > 1e4:
                return -1.0
    else:
        hi = 0.0
        lo = -step
        while _level(e, gen, P, lo) < 1.0:
            hi = lo
            step *= 2.0
            lo = -step
            if step > 1e4:
                return -1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _level(e, gen, P, mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return np.exp(0.5 * (lo + hi))


@njit(cache=True)
def _phi_canonical_grad(e, gen, P, tol):
    phi = _phi_canonical(e, gen, P, tol)
    dm = expm(-np.log(phi) * gen)
    y = dm @ e
    w = P @ gen + gen.T @ P
    return phi * 2.0 * (dm.T @ (P @ y)) / (y @ w @ y)


@njit(cache=True)
def phi_value(e, mode, weights, rho, gen, P, tol):
    """Kernel-side dispatch over the two norm variants."""
    if mode == EXPLICIT:
        return _phi_explicit(e, weights, rho)
    return _phi_canonical(e, gen, P, tol)


class HomogeneousNorm:
    """Common surface of the two norm variants."""

    variant = None
    dilation = None

    def __call__(self, e):
        raise NotImplementedError

    def gradient(self, e):
        raise NotImplementedError

    def project(self, u):
        """Scale ``u`` onto the unit level set along the norm's own dilation."""
        u = np.asarray(u, dtype=float)
        return self.dilation(-np.log(self(u))) @ u

    def kernel_args(self):
        raise NotImplementedError


class ExplicitNorm(HomogeneousNorm):
    variant = "explicit"

    def __init__(self, n, rho=2.0, nu=0.2):
        if rho <= 0:
            raise InvalidInputError("rho must be positive")
        self.n = n
        self.rho = float(rho)
        self.nu = float(nu)
        self.weights = explicit_weights(n, nu)
        self.dilation = Dilation(np.diag(self.weights))

    def __call__(self, e):
        e = np.ascontiguousarray(np.asarray(e, dtype=float).reshape(-1))
        return float(_phi_explicit(e, self.weights, self.rho))

    def gradient(self, e):
        e = np.ascontiguousarray(np.asarray(e, dtype=float).reshape(-1))
        if not np.any(e):
            raise InvalidInputError("gradient of a homogeneous norm is undefined at 0")
        return _phi_explicit_grad(e, self.weights, self.rho)

    def kernel_args(self):
        n = self.n
        return EXPLICIT, self.weights, self.rho, np.eye(n), np.eye(n), 1e-12

    def __repr__(self):
        return f"ExplicitNorm(n={self.n}, rho={self.rho}, nu={self.nu})"


class CanonicalNorm(HomogeneousNorm):
    variant = "canonical"

    def __init__(self, dilation, tol=1e-12):
        self.dilation = dilation
        self.n = dilation.n
        self.tol = float(tol)

    def __call__(self, e):
        e = np.ascontiguousarray(np.asarray(e, dtype=float).reshape(-1))
        phi = _phi_canonical(e, self.dilation.generator, self.dilation.P, self.tol)
        if phi < 0:
            raise BisectionError("canonical norm level function could not be bracketed")
        return float(phi)

    def gradient(self, e):
        e = np.ascontiguousarray(np.asarray(e, dtype=float).reshape(-1))
        if not np.any(e):
            raise InvalidInputError("gradient of a homogeneous norm is undefined at 0")
        self(e)
        return _phi_canonical_grad(e, self.dilation.generator, self.dilation.P, self.tol)

    def residual(self, e):
        """``| ||D(-ln phi) e||_P - 1 |``."""
        e = np.asarray(e, dtype=float)
        y = self.dilation(-np.log(self(e))) @ e
        return abs(float(np.sqrt(y @ self.dilation.P @ y)) - 1.0)

    def kernel_args(self):
        n = self.n
        return CANONICAL, np.ones(n), 2.0, self.dilation.generator, self.dilation.P, self.tol

    def __repr__(self):
        return f"CanonicalNorm(generator={self.dilation.generator.tolist()})"


def phi_canonical(e, dil, tol=1e-12):
    return CanonicalNorm(dil, tol)(e)


def phi_gradient(e, norm):
    return norm.gradient(e)


@dataclass(frozen=True)
class DegreeReport:
    degree: float
    samples: int
    max_violation: float
    passed: bool


def homogeneity_degree_check(field, dil, degree, samples=100, seed=0, tol=1e-6,
                             tau_range=2.0):
    """Check ``f(D(tau) x) = e^{degree tau} D(tau) f(x)`` on random samples.

    The violation is measured relative to the norm of the right-hand side.
    """
    if samples < 1:
        raise InvalidInputError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = rng.normal(size=dil.n)
        tau = rng.uniform(-tau_range, tau_range)
        d = dil(tau)
        lhs = np.asarray(field(d @ x), dtype=float)
        rhs = np.exp(degree * tau) * d @ np.asarray(field(x), dtype=float)
        scale = max(np.linalg.norm(rhs), 1e-300)
        worst = max(worst, float(np.linalg.norm(lhs - rhs) / scale))
    return DegreeReport(degree=degree, samples=samples, max_violation=worst,
                        passed=worst <= tol)
