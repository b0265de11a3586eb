"""Two-phase control law, direct-phase gain adaptation and the closed-loop
Lyapunov value.

For ``t <= T_switch`` the input is ``u = K_d^T x + r`` with an adaptive
``K_d``; afterwards the estimate-based gain ``K_x^T = B^+(A_m - A_hat)`` is
combined with ``K_0 e`` and the homogeneous correction
``phi(e)^{nu + eps} K D(-ln phi(e)) e``.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._linalg import expm, sym_sqrt
from .exceptions import InvalidInputError, PhaseError
from .homogeneity import phi_value

DIRECT = "direct"
INDIRECT = "indirect"


def pseudo_inverse(B):
    b = np.asarray(B, dtype=float).reshape(-1)
    return b / (b @ b)


def kx_from_estimate(A_hat, A_m, B):
    """``K_x = B^+ (A_m - A_hat)`` as a length-n vector."""
    b = np.asarray(B, dtype=float).reshape(-1)
    if not np.any(b):
        raise InvalidInputError("B must be nonzero")
    return pseudo_inverse(b) @ (np.asarray(A_m, dtype=float) - np.asarray(A_hat, dtype=float))


@dataclass
class ControllerState:
    """Direct-phase adaptive gain and switching data.

    ``kd_sign = -1`` gives the stabilising gradient law
    ``K_d' = Gamma_d(-x e^T P_1 B - sigma K_d)``; ``+1`` reproduces the
    sign as printed with the original law, which diverges on the
    reference example (see README).
    """

    K_d: np.ndarray
    Gamma_d: np.ndarray
    P_1: np.ndarray
    T_switch: float
    sigma: float = 0.1
    kd_sign: float = -1.0

    def __post_init__(self):
        self.K_d = np.asarray(self.K_d, dtype=float).reshape(-1).copy()
        self.Gamma_d = np.array(self.Gamma_d, dtype=float, ndmin=2)
        self.P_1 = np.array(self.P_1, dtype=float, ndmin=2)
        if self.sigma < 0:
            raise InvalidInputError("sigma must be nonnegative")
        if np.linalg.eigvalsh(0.5 * (self.Gamma_d + self.Gamma_d.T))[0] <= 0:
            raise InvalidInputError("Gamma_d must be positive definite")
        if self.kd_sign not in (-1.0, 1.0):
            raise InvalidInputError("kd_sign must be -1 or +1")

    def phase(self, t):
        return DIRECT if t <= self.T_switch else INDIRECT


@njit(cache=True)
def _kd_rate(Kd, x, e, P1B, Gamma_d, sigma, kd_sign):
    return Gamma_d @ (kd_sign * x * (e @ P1B) - sigma * Kd)


def kd_derivative(state, x, e, B, t=None):
    """Rate of the direct adaptive gain. Only valid in the direct phase."""
    if t is not None and state.phase(t) != DIRECT:
        raise PhaseError("K_d adaptation is only defined for t <= T_switch")
    x = np.asarray(x, dtype=float)
    e = np.asarray(e, dtype=float)
    p1b = state.P_1 @ np.asarray(B, dtype=float).reshape(-1)
    return _kd_rate(state.K_d, x, e, p1b, state.Gamma_d, float(state.sigma), float(state.kd_sign))


@njit(cache=True)
def _homogeneous_term(e, K, G_d, exponent, nu, mode, weights, rho, gen, P_hom, tol):
    phi = phi_value(e, mode, weights, rho, gen, P_hom, tol)
    if phi <= 0.0:
        return 0.0
    z = expm(-np.log(phi) * G_d) @ e
    return phi ** (nu + exponent) * (K @ z)


@njit(cache=True)
def _control(direct, x, xm, r, theta_hat, Kd, A_m, Bpinv, K_0, K, G_d, exponent, nu,
             mode, weights, rho, gen, P_hom, tol):
    if direct:
        return Kd @ x + r
    n = x.shape[0]
    e = x - xm
    a_hat = theta_hat.reshape(n, n)
    kx = Bpinv @ (A_m - a_hat)
    return (kx @ x + r + K_0 @ e
            + _homogeneous_term(e, K, G_d, exponent, nu, mode, weights, rho, gen, P_hom, tol))


def control_input(t, x, x_m, r, theta_hat, design, state, norm, A_m, B):
    """Phase-selected scalar input; the homogeneous term is 0 at ``e = 0``."""
    direct = state.phase(t) == DIRECT
    mode, weights, rho, gen, p_hom, tol = norm.kernel_args()
    c = np.ascontiguousarray
    return float(_control(direct, c(x, dtype=float), c(x_m, dtype=float), float(r),
                          c(theta_hat, dtype=float), c(state.K_d), c(A_m, dtype=float),
                          pseudo_inverse(B), c(design.K_0), c(design.K), c(design.G_d),
                          float(design.exponent), float(design.nu), mode, weights, rho, gen,
                          p_hom, tol))


@njit(cache=True)
def _lyapunov_value(e, P, G_d, mode, weights, rho, gen, P_hom, tol):
    phi = phi_value(e, mode, weights, rho, gen, P_hom, tol)
    if phi <= 0.0:
        return 0.0
    z = expm(-np.log(phi) * G_d) @ e
    return (z @ P @ z) * phi


def lyapunov_value(e, design, norm):
    """``V(e) = (D(-ln phi) e)^T P (D(-ln phi) e) phi(e)`` with ``V(0) = 0``."""
    mode, weights, rho, gen, p_hom, tol = norm.kernel_args()
    e = np.ascontiguousarray(np.asarray(e, dtype=float).reshape(-1))
    return float(_lyapunov_value(e, design.P, design.G_d, mode, weights, rho, gen, p_hom, tol))


def c4_margin(e, d, design, norm):
    """Right minus left side of the disturbance condition; ``>= 0`` means it holds.

    Near ``e = 0`` the right side vanishes, so any nonzero ``d`` violates it.
    """
    e = np.asarray(e, dtype=float).reshape(-1)
    d = np.asarray(d, dtype=float).reshape(-1)
    phi = norm(e)
    if phi <= 0.0:
        return 0.0 if not np.any(d) else -np.inf
    dm = expm(np.ascontiguousarray(-np.log(phi) * design.G_d))
    _, x_inv_root = sym_sqrt(design.X)
    n = design.n
    half = 0.5 * np.eye(n) - design.G_d
    rhs = (design.psi * design.zeta * design.eta * phi ** (2 * design.nu)
           * float(np.linalg.norm(x_inv_root @ dm @ e)) ** 2
           / (2.0 * (1.0 + np.linalg.norm(half, 2))))
    return float(rhs - np.linalg.norm(dm @ d))
