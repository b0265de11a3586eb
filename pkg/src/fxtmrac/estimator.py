"""Fixed-time parameter update law, its exponential baseline, and the
settling-time bound for the estimation error."""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import InvalidAuxiliaryConstants, InvalidInputError


@njit(cache=True)
def signed_power(v, a):
    """Componentwise ``|v_i|**a * sign(v_i)``."""
    return np.abs(v) ** a * np.sign(v)


@njit(cache=True)
def _fxt_rate(theta_hat, N, G, M, H, kappa, gamma, alpha):
    rg = G - N @ theta_hat
    rh = H - M @ theta_hat
    out = kappa * (N.T @ (signed_power(rg, 1.0 - alpha) + signed_power(rg, 1.0 + alpha)))
    out += gamma * (M.T @ (signed_power(rh, 1.0 - alpha) + signed_power(rh, 1.0 + alpha)))
    return out


@njit(cache=True)
def _baseline_rate(theta_hat, N, G, M, H, kappa, gamma):
    # both exponents set to 1, so each bracket collapses to twice the residual
    rg = G - N @ theta_hat
    rh = H - M @ theta_hat
    return 2.0 * kappa * (N.T @ rg) + 2.0 * gamma * (M.T @ rh)


@dataclass
class EstimatorState:
    theta_hat: np.ndarray
    kappa: float = 25.0
    gamma: float = 50.0
    alpha: float = 2.0 / 3.0

    def __post_init__(self):
        self.theta_hat = np.asarray(self.theta_hat, dtype=float).reshape(-1).copy()
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.kappa <= 0 or self.gamma <= 0:
            raise InvalidInputError("kappa and Gamma must be positive")


def _prep(*arrays):
    return tuple(np.ascontiguousarray(np.asarray(a, dtype=float)) for a in arrays)


def fxt_update(state, N, G, M, H):
    """Rate of the fixed-time estimate.

    ``kappa N^T (|G - N th|^{1-a} + |G - N th|^{1+a})
    + Gamma M^T (|H - M th|^{1-a} + |H - M th|^{1+a})``
    with signed powers taken componentwise.
    """
    N, G, M, H = _prep(N, G, M, H)
    return _fxt_rate(state.theta_hat, N, G, M, H, state.kappa, state.gamma, state.alpha)


def baseline_exponential_update(state, N, G, M, H):
    """Exponential-convergence reference law (both exponents replaced by 1)."""
    N, G, M, H = _prep(N, G, M, H)
    return _baseline_rate(state.theta_hat, N, G, M, H, state.kappa, state.gamma)


@dataclass(frozen=True)
class SettlingBound:
    alpha: float
    mu: float
    gamma: float
    n: int
    c: float
    z: float
    q: int
    T: float
    p: float
    kappa1: float
    kappa2: float
    T_max: float

    def as_dict(self):
        return dict(self.__dict__)


def settling_bound(alpha, mu, gamma, n, c, z, q, T):
    """Upper bound on the disturbance-free estimation settling time.

    ``T_max = (2 / alpha)(1 / kappa1 + 1 / kappa2) + q T`` where

    * ``kappa1 = 2^{(2-a)/2} mu^{2-a} Gamma (1-a)/(2-a)``
    * ``kappa2 = 2^{(2+a)/2} mu^{2+a} p Gamma (n+1)^{-a/(2(2+a))}``
    * ``p = 1 - c^{2+a}(1+a)/(2+a) - z^{(2+a)/(1+a)}(1+a)^2/(2+a)``

    Raises
    ------
    InvalidAuxiliaryConstants
        If ``p <= 0`` for the supplied ``c`` and ``z``.
    """
    a = float(alpha)
    if not 0.0 < a < 1.0:
        raise InvalidInputError(f"alpha must lie in (0, 1), got {alpha}")
    if mu <= 0 or gamma <= 0 or c <= 0 or z <= 0:
        raise InvalidInputError("mu, Gamma, c and z must be positive")
    p = (1.0 - c ** (2 + a) * (1 + a) / (2 + a)
         - z ** ((2 + a) / (1 + a)) * (1 + a) ** 2 / (2 + a))
    if p <= 0:
        raise InvalidAuxiliaryConstants(
            f"invalid auxiliary constants c={c}, z={z}: p={p:.4g} is not positive")
    k1 = 2 ** ((2 - a) / 2) * mu ** (2 - a) * gamma * (1 - a) / (2 - a)
    k2 = 2 ** ((2 + a) / 2) * mu ** (2 + a) * p * gamma * (n + 1) ** (-a / (2 * (2 + a)))
    t_max = 2.0 / a * (1.0 / k1 + 1.0 / k2) + q * T
    return SettlingBound(alpha=a, mu=mu, gamma=gamma, n=n, c=c, z=z, q=q, T=T,
                         p=p, kappa1=k1, kappa2=k2, T_max=t_max)
