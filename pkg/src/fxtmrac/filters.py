"""First-order filter cascade turning the plant ODE into algebraic relations.

With ``N' = -k N + Phi``, ``h' = -k h + x`` and ``G2' = -k G2 + B u`` the
signal ``G = x - e^{-kt} x(0) - k h - G2`` satisfies ``G = N Theta + W``
without ever differentiating ``x``.  A second stage
``M' = -k M + N^T N``, ``H' = -k H + N^T G`` gives ``H = M Theta + W1``.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import InvalidInputError
from .model import _regressor


@dataclass
class FilterBank:
    """Mutable filter state for one run. All filters start at zero."""

    k: float
    N: np.ndarray
    h: np.ndarray
    G2: np.ndarray
    M: np.ndarray
    H: np.ndarray
    x0: np.ndarray
    t: float = 0.0

    @classmethod
    def zeros(cls, n, k, x0):
        if k <= 0:
            raise InvalidInputError(f"filter gain k must be positive, got {k}")
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        if x0.shape[0] != n:
            raise InvalidInputError(f"x0 must have length {n}")
        p = n * n
        return cls(k=float(k), N=np.zeros((n, p)), h=np.zeros(n), G2=np.zeros(n),
                   M=np.zeros((p, p)), H=np.zeros(p), x0=x0.copy(), t=0.0)

    @property
    def n(self):
        return self.h.shape[0]


@njit(cache=True)
def _g_reconstruct(k, t, x, x0, h, G2):
    g1 = x - np.exp(-k * t) * x0 - k * h
    return g1 - G2


@njit(cache=True)
def _filter_derivatives(k, t, N, h, G2, M, H, x, x0, bu):
    phi = _regressor(x)
    g = _g_reconstruct(k, t, x, x0, h, G2)
    dN = -k * N + phi
    dh = -k * h + x
    dG2 = -k * G2 + bu
    dM = -k * M + N.T @ N
    dH = -k * H + N.T @ g
    return dN, dh, dG2, dM, dH


def g_reconstruct(bank, x):
    """``G = G1 - G2`` with ``G1 = x - e^{-kt} x0 - k h`` (integration by parts)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if bank.t < 0:
        raise InvalidInputError("filter time must be nonnegative")
    return _g_reconstruct(bank.k, float(bank.t), x, bank.x0, bank.h, bank.G2)


def filter_derivatives(bank, x, u, B):
    """Time derivatives ``(dN, dh, dG2, dM, dH)`` of the cascade at ``bank.t``."""
    x = np.ascontiguousarray(np.asarray(x, dtype=float).reshape(-1))
    B = np.asarray(B, dtype=float).reshape(-1)
    if x.shape[0] != bank.n or B.shape[0] != bank.n:
        raise InvalidInputError("x and B must match the filter dimension")
    return _filter_derivatives(bank.k, float(bank.t), bank.N, bank.h, bank.G2,
                               bank.M, bank.H, x, bank.x0, B * float(u))


def disturbance_envelope(d_bar, k, t):
    """Bound ``W_bar(t) = (d_bar / k)(1 - e^{-kt})`` on ``||W(t)||``."""
    if k <= 0:
        raise InvalidInputError(f"filter gain k must be positive, got {k}")
    if d_bar < 0 or np.any(np.asarray(t) < 0):
        raise InvalidInputError("d_bar and t must be nonnegative")
    return d_bar / k * (1.0 - np.exp(-k * np.asarray(t, dtype=float)))


@dataclass(frozen=True)
class DisturbanceBounds:
    """Disturbance bound ``d_bar`` and the resulting filter-error envelopes.

    ``w1_bar`` is filled in from a simulation, where it is tracked as
    ``w1' = -k w1 + ||N||_F W_bar(t)`` (Frobenius norm bounds the spectral one).
    """

    d_bar: float
    k: float
    w1_bar: float = float("nan")

    def envelope(self, t):
        return disturbance_envelope(self.d_bar, self.k, t)

    @property
    def limit(self):
        return self.d_bar / self.k
