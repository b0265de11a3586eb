"""Controller design artifacts: the C1 linear system, the LMI conditions,
gains, Lyapunov matrices, level-set bounds and the final reaching time."""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from ._linalg import is_anti_hurwitz, is_hurwitz, solve_lyapunov_kron, sym_sqrt
from .exceptions import C1DegenerateError, InvalidInputError, SynthesisFailed

LMI_TOL = 1e-8


def _col(b):
    return np.asarray(b, dtype=float).reshape(-1, 1)


def _row(v):
    return np.asarray(v, dtype=float).reshape(1, -1)


def c1_residual(A_m, B, L, Y):
    """``||A_m L - L A_m + B Y - A_m||_F`` and ``||L B||``."""
    A_m = np.asarray(A_m, dtype=float)
    L = np.asarray(L, dtype=float)
    r = A_m @ L - L @ A_m + _col(B) @ _row(Y) - A_m
    return float(np.linalg.norm(r)), float(np.linalg.norm(L @ _col(B)))


@dataclass(frozen=True)
class C1Solution:
    L: np.ndarray
    Y: np.ndarray
    G_d: np.ndarray
    K_0: np.ndarray
    residual: float
    lb_residual: float
    anti_hurwitz: bool
    exact: bool


def _c1_gd_k0(A_m, B, L, Y, epsilon, nu, residual, lb):
    n = L.shape[0]
    lmi = L - np.eye(n)
    if np.linalg.cond(lmi) > 1e12:
        raise C1DegenerateError("C1 degenerate: L - I is singular")
    G_d = epsilon * np.eye(n) + nu * L
    K_0 = (_row(Y) @ np.linalg.inv(lmi)).reshape(-1)
    return C1Solution(L=L, Y=np.asarray(Y, dtype=float).reshape(-1), G_d=G_d, K_0=K_0,
                      residual=residual, lb_residual=lb,
                      anti_hurwitz=is_anti_hurwitz(G_d), exact=residual <= 1e-9)


def solve_c1(A_m, B, epsilon, nu):
    """Solve ``A_m L - L A_m + B Y = A_m`` subject to ``L B = 0``.

    ``L B = 0`` is imposed exactly by parametrising its null space; the
    Sylvester-type equation is solved in the least-squares sense and its
    residual is returned (a nonzero residual is a warning, not an error).
    """
    A_m = np.asarray(A_m, dtype=float)
    b = np.asarray(B, dtype=float).reshape(-1)
    n = A_m.shape[0]
    if not is_hurwitz(A_m):
        raise InvalidInputError("A_m must be Hurwitz")
    if not np.any(b):
        raise InvalidInputError("B must be nonzero")
    ident = np.eye(n)
    # unknown z = [vec_r(L); Y] with row-major vec, so vec_r(A L B') = (A kron B'^T) vec_r(L)
    sylv = np.kron(A_m, ident) - np.kron(ident, A_m.T)
    by = np.kron(b.reshape(-1, 1), ident)
    C = np.hstack([sylv, by])
    d = A_m.reshape(-1)
    E = np.hstack([np.kron(ident, b.reshape(1, -1)), np.zeros((n, n))])
    _, s, vt = np.linalg.svd(E)
    rank = int(np.sum(s > 1e-12 * s[0]))
    Z = vt[rank:].T
    w, *_ = np.linalg.lstsq(C @ Z, d, rcond=None)
    z = Z @ w
    L = z[: n * n].reshape(n, n)
    Y = z[n * n:]
    res, lb = c1_residual(A_m, b, L, Y)
    return _c1_gd_k0(A_m, b, L, Y, epsilon, nu, res, lb)


def c1_from_preset(A_m, B, L, K_0, epsilon, nu):
    """C1 artifacts for a given ``(L, K_0)`` with ``Y = K_0 (L - I)``."""
    L = np.asarray(L, dtype=float)
    Y = (_row(K_0) @ (L - np.eye(L.shape[0]))).reshape(-1)
    res, lb = c1_residual(A_m, B, L, Y)
    return _c1_gd_k0(np.asarray(A_m, dtype=float), B, L, Y, epsilon, nu, res, lb)


def estimate_beta(norm, samples=2000, seed=0, safety=1.1):
    """Sampled bound on ``||grad phi(xi)|| ||xi||`` over the level set ``phi = 1``.

    Returns ``(beta, raw_max)`` where ``beta = safety * raw_max``.
    """
    if samples < 100:
        raise InvalidInputError("estimate_beta needs at least 100 samples")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for u in rng.normal(size=(samples, norm.n)):
        xi = norm.project(u)
        worst = max(worst, float(np.linalg.norm(norm.gradient(xi)) * np.linalg.norm(xi)))
    return safety * worst, worst


@dataclass(frozen=True)
class LMIReport:
    main_margin: float
    decay_margin: float
    x_min_eig: float
    chi: float
    eta: float
    iota: float
    zeta: float
    feasible: bool
    reasons: tuple = ()

    def as_dict(self):
        return dict(self.__dict__, reasons=list(self.reasons))


def lmi_blocks(A_m, B, K_0, G_d, beta, X, Y, chi, eta, iota, zeta):
    """Return the two LMI matrices whose largest eigenvalues must be ``<= 0``."""
    A_m = np.asarray(A_m, dtype=float)
    n = A_m.shape[0]
    b = _col(B)
    Y = _row(Y)
    X = np.asarray(X, dtype=float)
    acl = A_m + b @ _row(K_0)
    s = 0.5 * np.eye(n) - np.asarray(G_d, dtype=float)
    q = (acl @ X + X @ acl.T + b @ Y + Y.T @ b.T
         + chi * beta * s @ s.T + iota * X)
    off = X @ acl.T + Y.T @ b.T
    big = np.block([[q, off], [off.T, -chi * np.eye(n)]])
    small = (zeta - iota) * X + eta * np.eye(n)
    return 0.5 * (big + big.T), 0.5 * (small + small.T)


def verify_lmi(A_m, B, K_0, G_d, beta, X, Y, chi, eta, iota, zeta, tol=LMI_TOL):
    """Eigenvalue check of the closed-loop LMI system."""
    X = np.asarray(X, dtype=float)
    n = np.asarray(A_m).shape[0]
    if X.shape != (n, n) or _row(Y).shape[1] != n or _row(K_0).shape[1] != n:
        raise InvalidInputError("LMI data dimensions do not match A_m")
    big, small = lmi_blocks(A_m, B, K_0, G_d, beta, X, Y, chi, eta, iota, zeta)
    m1 = float(np.linalg.eigvalsh(big)[-1])
    m2 = float(np.linalg.eigvalsh(small)[-1])
    xmin = float(np.linalg.eigvalsh(0.5 * (X + X.T))[0])
    reasons = []
    if not iota > zeta > 0:
        reasons.append(f"C3 precondition iota > zeta > 0 violated (iota={iota}, zeta={zeta})")
    if chi <= 0:
        reasons.append("chi must be positive")
    if eta <= 0:
        reasons.append("eta must be positive")
    if m1 > tol:
        reasons.append(f"main LMI block has eigenvalue {m1:.3g} > 0")
    if m2 > tol:
        reasons.append(f"(zeta - iota) X + eta I has eigenvalue {m2:.3g} > 0")
    if xmin < tol:
        reasons.append(f"X is not positive definite (min eig {xmin:.3g})")
    return LMIReport(main_margin=m1, decay_margin=m2, x_min_eig=xmin, chi=chi, eta=eta,
                     iota=iota, zeta=zeta, feasible=not reasons, reasons=tuple(reasons))


@dataclass(frozen=True)
class LMISolution:
    X: np.ndarray
    Y: np.ndarray
    chi: float
    eta: float
    iota: float
    report: LMIReport


def _sdp_for_iota(A_m, B, K_0, G_d, beta, zeta, iota):
    import cvxpy as cp

    n = A_m.shape[0]
    b = _col(B)
    acl = A_m + b @ _row(K_0)
    s = 0.5 * np.eye(n) - G_d
    X = cp.Variable((n, n), symmetric=True)
    Y = cp.Variable((1, n))
    chi = cp.Variable()
    eta = cp.Variable()
    t = cp.Variable()
    q = (acl @ X + X @ acl.T + b @ Y + Y.T @ b.T
         + beta * chi * (s @ s.T) + iota * X)
    off = X @ acl.T + Y.T @ b.T
    big = cp.bmat([[q, off], [off.T, -chi * np.eye(n)]])
    cons = [
        0.5 * (big + big.T) << t * np.eye(2 * n),
        (zeta - iota) * X + eta * np.eye(n) << t * np.eye(n),
        X >> np.eye(n),
        cp.trace(X) <= 1e3,
        chi >= 1e-3, chi <= 1e4,
        eta >= 1e-3,
    ]
    prob = cp.Problem(cp.Minimize(t), cons)
    try:
        prob.solve()
    except cp.error.SolverError:
        return None
    if X.value is None or t.value is None or t.value >= 0:
        return None
    return np.asarray(X.value), np.asarray(Y.value).reshape(-1), float(chi.value), float(eta.value)


def search_lmi(A_m, B, K_0, G_d, beta, zeta, initial=None, iota_grid=None):
    """Best-effort LMI synthesis; every returned candidate passes :func:`verify_lmi`.

    ``initial`` may hold a candidate ``dict(X=, Y=, chi=, eta=, iota=)``; if it
    already verifies it is returned unchanged.  Otherwise ``iota`` is swept
    over a grid above ``zeta`` and, for each value, the remaining conditions
    (linear in ``X, Y, chi, eta``) are solved as a semidefinite program.
    """
    A_m = np.asarray(A_m, dtype=float)
    G_d = np.asarray(G_d, dtype=float)
    if zeta <= 0:
        raise InvalidInputError("zeta must be positive")
    if initial is not None:
        if not initial["iota"] > zeta:
            raise InvalidInputError("C3 precondition iota > zeta violated by the initial point")
        rep = verify_lmi(A_m, B, K_0, G_d, beta, initial["X"], initial["Y"], initial["chi"],
                         initial["eta"], initial["iota"], zeta)
        if rep.feasible:
            return LMISolution(X=np.asarray(initial["X"], dtype=float),
                               Y=np.asarray(initial["Y"], dtype=float).reshape(-1),
                               chi=initial["chi"], eta=initial["eta"], iota=initial["iota"],
                               report=rep)
    if iota_grid is None:
        iota_grid = zeta * np.array([1.5, 2.0, 2.5, 3.0, 5.0, 10.0, 1.1, 20.0])
    for iota in iota_grid:
        if not iota > zeta:
            continue
        cand = _sdp_for_iota(A_m, B, K_0, G_d, beta, zeta, float(iota))
        if cand is None:
            continue
        X, Y, chi, eta = cand
        rep = verify_lmi(A_m, B, K_0, G_d, beta, X, Y, chi, eta, float(iota), zeta)
        if rep.feasible:
            return LMISolution(X=X, Y=Y, chi=chi, eta=eta, iota=float(iota), report=rep)
    raise SynthesisFailed("synthesis failed; supply a solution via config")


def gain_from_lmi(X, Y):
    """``P = X^{-1}`` and ``K = Y P``."""
    X = np.asarray(X, dtype=float)
    if np.linalg.cond(X) > 1e14:
        raise InvalidInputError("X is singular")
    P = np.linalg.inv(X)
    P = 0.5 * (P + P.T)
    return (_row(Y) @ P).reshape(-1), P


@dataclass(frozen=True)
class LyapunovPair:
    P_1: np.ndarray
    Q_1: np.ndarray

    def residual(self, A_m):
        A_m = np.asarray(A_m, dtype=float)
        return float(np.abs(A_m.T @ self.P_1 + self.P_1 @ A_m + self.Q_1).max())


def lyapunov_solve(A_m, Q_1=None):
    """Unique ``P_1`` with ``A_m^T P_1 + P_1 A_m + Q_1 = 0``."""
    A_m = np.ascontiguousarray(np.asarray(A_m, dtype=float))
    if Q_1 is None:
        Q_1 = np.eye(A_m.shape[0])
    Q_1 = np.ascontiguousarray(np.asarray(Q_1, dtype=float))
    if not is_hurwitz(A_m):
        raise InvalidInputError("no solution: A_m is not Hurwitz")
    if np.linalg.eigvalsh(0.5 * (Q_1 + Q_1.T))[0] <= 0:
        raise InvalidInputError("Q_1 must be symmetric positive definite")
    return solve_lyapunov_kron(A_m, Q_1)


def lyapunov_check(A_m, P_1):
    """Eigenvalues of ``-(A_m^T P_1 + P_1 A_m)``; ``P_1`` is a valid Lyapunov
    matrix for some PD ``Q_1`` only if all are positive."""
    A_m = np.asarray(A_m, dtype=float)
    P_1 = np.asarray(P_1, dtype=float)
    q = -(A_m.T @ P_1 + P_1 @ A_m)
    return np.linalg.eigvalsh(0.5 * (q + q.T)), q


def delta_bounds(X, norm, samples=2000, seed=0, refine=8):
    """Extremes of ``||X^{-1/2} z||`` over ``phi(z) = 1``.

    Level-set points come from projecting random directions with the norm's
    own dilation; the best few samples are refined with Nelder-Mead over the
    direction.
    """
    if samples < 100:
        raise InvalidInputError("delta_bounds needs at least 100 samples")
    _, inv_root = sym_sqrt(np.asarray(X, dtype=float))
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(samples, norm.n))

    def value(u):
        if not np.any(u):
            return np.nan
        return float(np.linalg.norm(inv_root @ norm.project(u)))

    vals = np.array([value(u) for u in dirs])
    order = np.argsort(vals)
    lo, hi = vals[order[0]], vals[order[-1]]
    for i in order[:refine]:
        r = minimize(value, dirs[i], method="Nelder-Mead",
                     options=dict(xatol=1e-10, fatol=1e-13, maxiter=2000))
        if np.isfinite(r.fun):
            lo = min(lo, r.fun)
    for i in order[::-1][:refine]:
        r = minimize(lambda u: -value(u), dirs[i], method="Nelder-Mead",
                     options=dict(xatol=1e-10, fatol=1e-13, maxiter=2000))
        if np.isfinite(r.fun):
            hi = max(hi, -r.fun)
    return float(lo), float(hi)


def final_time(delta_min, delta_max, psi, iota, nu, upsilon, T_max):
    """``max(dmin^{2 nu}, dmax^{2 nu}) / ((1 - psi) iota nu) * upsilon^{-nu} + T_max``."""
    if not 0.0 < psi < 1.0:
        raise InvalidInputError(f"psi must lie in (0, 1), got {psi}")
    if iota <= 0 or nu <= 0 or upsilon <= 0:
        raise InvalidInputError("iota, nu and upsilon must be positive")
    top = max(delta_min ** (2 * nu), delta_max ** (2 * nu))
    return float(top / ((1.0 - psi) * iota * nu) * upsilon ** (-nu) + T_max)


@dataclass(frozen=True)
class HomogeneousDesign:
    """All artifacts the indirect-phase control law needs, plus diagnostics."""

    L: np.ndarray
    Y_c1: np.ndarray
    epsilon: float
    nu: float
    G_d: np.ndarray
    K_0: np.ndarray
    X: np.ndarray
    Y_lmi: np.ndarray
    chi: float
    eta: float
    iota: float
    zeta: float
    K: np.ndarray
    P: np.ndarray
    beta: float
    psi: float = 0.5
    upsilon: float = 0.1
    exponent: float = 0.5
    residual_c1: float = 0.0
    lmi: LMIReport = None
    notes: tuple = field(default=())

    @property
    def n(self):
        return self.G_d.shape[0]

    @property
    def verified(self):
        return self.lmi is not None and self.lmi.feasible

    def with_lmi(self, lmi):
        return replace(self, lmi=lmi)
