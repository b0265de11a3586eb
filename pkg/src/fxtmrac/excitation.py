"""Interval-excitation monitoring and the eigenvalue floor of ``M``."""

from dataclasses import dataclass, replace

import numpy as np

from ._linalg import numerical_rank
from .exceptions import InvalidInputError

RANK_RTOL = 1e-8


@dataclass(frozen=True)
class ExcitationReport:
    """Running excitation record.

    ``gram`` is ``int_0^t Phi^T Phi``; ``T_detect`` is the first time its
    smallest eigenvalue reached ``gamma_target`` (``nan`` if never).
    """

    gram: np.ndarray
    t: float = 0.0
    gamma_target: float = 0.25
    T_detect: float = float("nan")
    gamma: float = float("nan")
    q: int = 1
    mu: float = float("nan")
    rank_M: int = 0
    lambda_min_M: float = 0.0

    @classmethod
    def empty(cls, n, gamma_target=0.25, q=1):
        return cls(gram=np.zeros((n * n, n * n)), gamma_target=gamma_target, q=q)

    @property
    def lambda_min(self):
        return float(np.linalg.eigvalsh(self.gram)[0])

    @property
    def detected(self):
        return not np.isnan(self.T_detect)


def update_gram(report, phi, dt, k=None):
    """Add ``Phi^T Phi dt`` and refresh the detection fields.

    When ``k`` is given and excitation is newly detected, ``mu`` is computed
    from the achieved level with :func:`mu_floor`.
    """
    if dt <= 0:
        raise InvalidInputError("dt must be positive")
    gram = report.gram + phi.T @ phi * dt
    t = report.t + dt
    out = replace(report, gram=gram, t=t)
    if not report.detected:
        lam = float(np.linalg.eigvalsh(gram)[0])
        if lam >= report.gamma_target:
            mu = mu_floor(lam, k, t, report.q) if k is not None else float("nan")
            out = replace(out, T_detect=t, gamma=lam, mu=mu)
    return out


def with_m_diagnostics(report, M):
    lam = float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
    return replace(report, rank_M=numerical_rank(M, RANK_RTOL), lambda_min_M=lam)


def mu_floor(gamma, k, T, q=1):
    """``mu = gamma * sum_{j=1..q} exp(-j k T)``, the floor on ``lambda_min(M)``."""
    if gamma <= 0 or k <= 0 or T <= 0 or q < 1 or int(q) != q:
        raise InvalidInputError("mu_floor needs gamma, k, T > 0 and integer q >= 1")
    j = np.arange(1, int(q) + 1)
    return float(gamma * np.sum(np.exp(-j * k * T)))


def gain_for_mu(gamma, mu, T):
    """Filter gain ``k`` that makes the single-window (q=1) floor equal ``mu``."""
    if not 0 < mu < gamma or T <= 0:
        raise InvalidInputError("need 0 < mu < gamma and T > 0")
    return float(-np.log(mu / gamma) / T)


def detect_excitation(times, lambda_min_gram, gamma_target):
    """First logged time at which ``lambda_min_gram >= gamma_target``.

    Returns ``(T_detect, gamma_achieved)``; both ``nan`` when never met.
    """
    hits = np.nonzero(np.asarray(lambda_min_gram) >= gamma_target)[0]
    if hits.size == 0:
        return float("nan"), float("nan")
    i = hits[0]
    return float(times[i]), float(lambda_min_gram[i])
