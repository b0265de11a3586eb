"""Deterministic fixed-step simulation of the augmented closed loop.

:func:`run` integrates plant, reference model, filters, estimator and
controller as one state vector with classical RK4 and returns a
:class:`Trajectory` whose rows are logged every ``log_every`` steps.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernel
from ._linalg import numerical_rank
from .controller import DIRECT, INDIRECT, ControllerState, _control, _lyapunov_value, \
    c4_margin, pseudo_inverse
from .excitation import RANK_RTOL, detect_excitation, mu_floor
from .exceptions import InvalidInputError, SimulationBlowUp
from .model import vectorize_params

ESTIMATORS = {"off": _kernel.EST_OFF, "fxt": _kernel.EST_FXT,
              "baseline": _kernel.EST_BASELINE}

SETTLE_TOL = 1e-3


@dataclass(frozen=True)
class EstimatorConfig:
    kind: str = "fxt"
    kappa: float = 25.0
    gamma: float = 50.0
    alpha: float = 2.0 / 3.0

    def __post_init__(self):
        if self.kind not in ESTIMATORS:
            raise InvalidInputError(f"estimator must be one of {sorted(ESTIMATORS)}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInputError("alpha must lie in (0, 1)")
        if self.kappa <= 0 or self.gamma <= 0:
            raise InvalidInputError("kappa and Gamma must be positive")


@dataclass(frozen=True)
class Scenario:
    """Everything one run needs. Instances are immutable; use ``replace``."""

    plant: object
    reference: object
    k: float
    estimator: EstimatorConfig
    design: object
    norm: object
    controller: ControllerState
    x0: np.ndarray
    x_m0: np.ndarray
    theta0: np.ndarray
    dt: float = 1e-4
    t_end: float = 10.0
    log_every: int = 100
    seed: int = 0
    disturbance: bool = True
    gamma_target: float = 0.25
    q: int = 1
    T_final: float = float("nan")
    T_max: float = float("nan")

    def __post_init__(self):
        if not self.dt > 0 or not self.t_end > 0:
            raise InvalidInputError("dt and t_end must be positive")
        if self.k <= 0:
            raise InvalidInputError("filter gain k must be positive")
        if self.log_every < 1:
            raise InvalidInputError("log_every must be at least 1")
        n = self.plant.n
        for name, size in (("x0", n), ("x_m0", n), ("theta0", n * n)):
            v = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if v.shape[0] != size or not np.all(np.isfinite(v)):
                raise InvalidInputError(f"{name} must be a finite vector of length {size}")
            object.__setattr__(self, name, v)

    @property
    def n(self):
        return self.plant.n

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    @property
    def switch_step(self):
        """``T_switch`` snapped to the nearest step boundary."""
        return int(round(self.controller.T_switch / self.dt))


def _column_names(n):
    p = n * n
    names = ["t"]
    names += [f"x_{i + 1}" for i in range(n)]
    names += [f"xm_{i + 1}" for i in range(n)]
    names += [f"e_{i + 1}" for i in range(n)]
    names += ["e_norm"]
    names += [f"theta_hat_{i + 1}" for i in range(p)]
    names += ["theta_err_norm", "u", "V", "phase", "lambda_min_M", "rank_M", "c4_margin",
              "g_residual", "h_residual"]
    # diagnostics beyond the fixed core schema
    names += ["lambda_min_gram", "g_identity", "h_identity", "g1_gap", "w_bar", "w1_bar",
              "n_norm", "r"]
    names += [f"K_d_{i + 1}" for i in range(n)]
    return names


@dataclass
class Trajectory:
    """Logged rows plus a run summary.

    ``data`` holds one row per log instant in the order of ``columns``; the
    ``phase`` column is 0 for direct and 1 for indirect.
    """

    columns: list
    data: np.ndarray
    summary: dict = field(default_factory=dict)

    def __getitem__(self, name):
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def block(self, prefix):
        idx = [i for i, c in enumerate(self.columns) if c.startswith(prefix + "_")
               and c[len(prefix) + 1:].isdigit()]
        return self.data[:, idx]

    @property
    def t(self):
        return self["t"]

    def phases(self):
        return np.where(self["phase"] > 0.5, INDIRECT, DIRECT)

    def to_csv(self, path):
        ip = self.columns.index("phase")
        with open(path, "w") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.data:
                cells = ["%.17g" % v for v in row]
                cells[ip] = INDIRECT if row[ip] > 0.5 else DIRECT
                fh.write(",".join(cells) + "\n")

    def summary_json(self, path=None):
        text = json.dumps(_jsonable(self.summary), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _settle_time(t, err, tol):
    """First logged time after which ``err <= tol`` holds for every later row."""
    above = np.nonzero(err > tol)[0]
    if above.size == 0:
        return float(t[0])
    if above[-1] == len(t) - 1:
        return float("nan")
    return float(t[above[-1] + 1])


def _kernel_inputs(sc):
    n = sc.n
    ctl = sc.controller
    d = sc.design
    mode, weights, rho, gen, p_hom, tol = sc.norm.kernel_args()
    scal = np.zeros(_kernel.N_SCALARS)
    scal[_kernel.K_FILT] = sc.k
    scal[_kernel.KAPPA] = sc.estimator.kappa
    scal[_kernel.GAMMA] = sc.estimator.gamma
    scal[_kernel.ALPHA] = sc.estimator.alpha
    scal[_kernel.EST_MODE] = ESTIMATORS[sc.estimator.kind]
    scal[_kernel.SIGMA] = ctl.sigma
    scal[_kernel.KD_SIGN] = ctl.kd_sign
    scal[_kernel.EXPONENT] = d.exponent
    scal[_kernel.NU] = d.nu
    scal[_kernel.D_BAR] = sc.plant.disturbance.sup_bound() if sc.disturbance else 0.0
    scal[_kernel.RHO] = rho
    scal[_kernel.TOL] = tol
    scal[_kernel.PHI_MODE] = mode
    scal[_kernel.D_SCALE] = 1.0 if sc.disturbance else 0.0
    B = sc.plant.B.reshape(-1)
    r_off, r_terms = sc.reference.r.as_arrays()
    d_off, d_terms = sc.plant.disturbance.as_arrays()
    c = np.ascontiguousarray
    arrays = (scal, c(sc.plant.A), c(B), c(sc.reference.A_m), c(pseudo_inverse(B)),
              c(ctl.P_1 @ B), c(ctl.Gamma_d), c(d.K_0), c(d.K), c(d.G_d), c(weights),
              c(gen), c(p_hom), c(sc.x0), c(r_off), c(r_terms), c(d_off), c(d_terms))
    return arrays


def initial_state(sc):
    n = sc.n
    o = _kernel.offsets(n)
    s = np.zeros(o[-1])
    s[o[0]:o[1]] = sc.x0
    s[o[1]:o[2]] = sc.x_m0
    s[o[7]:o[8]] = sc.theta0
    s[o[8]:o[9]] = sc.controller.K_d
    return s


def _rows(sc, log):
    """Turn raw kernel rows into the logged schema."""
    n = sc.n
    p = n * n
    o = _kernel.offsets(n)
    steps = log[:, 0].astype(np.int64)
    t = steps * sc.dt
    S = log[:, 1:]
    x = S[:, o[0]:o[1]]
    xm = S[:, o[1]:o[2]]
    h = S[:, o[2]:o[3]]
    G2 = S[:, o[3]:o[4]]
    N = S[:, o[4]:o[5]].reshape(-1, n, p)
    M = S[:, o[5]:o[6]].reshape(-1, p, p)
    H = S[:, o[6]:o[7]]
    th = S[:, o[7]:o[8]]
    Kd = S[:, o[8]:o[9]]
    gram = S[:, o[9]:o[10]].reshape(-1, n, n)
    G1d = S[:, o[10]:o[11]]
    w1 = S[:, o[11]]
    e = x - xm
    theta = vectorize_params(sc.plant.A)
    k = sc.k
    decay = np.exp(-k * t)[:, None]
    G1 = x - decay * sc.x0 - k * h
    G = G1 - G2
    direct = steps <= sc.switch_step

    args = _kernel_inputs(sc)
    (scal, A, B, A_m, Bpinv, _, _, K_0, K, G_d, weights, gen, p_hom, _, r_off, r_terms,
     _, _) = args
    from .model import eval_signal
    mode, rho, tol = int(scal[_kernel.PHI_MODE]), scal[_kernel.RHO], scal[_kernel.TOL]
    nrow = len(t)
    u = np.empty(nrow)
    V = np.empty(nrow)
    c4 = np.empty(nrow)
    r = np.empty(nrow)
    for i in range(nrow):
        r[i] = eval_signal(r_off, r_terms, t[i])[0]
        u[i] = _control(bool(direct[i]), x[i].copy(), xm[i].copy(), r[i], th[i].copy(),
                        Kd[i].copy(), A_m, Bpinv, K_0, K, G_d, sc.design.exponent,
                        sc.design.nu, mode, weights, rho, gen, p_hom, tol)
        ei = np.ascontiguousarray(e[i])
        V[i] = _lyapunov_value(ei, sc.design.P, sc.design.G_d, mode, weights, rho, gen,
                               p_hom, tol)
        d_i = sc.plant.d(t[i]) if sc.disturbance else np.zeros(n)
        c4[i] = c4_margin(ei, d_i, sc.design, sc.norm)

    Msym = 0.5 * (M + np.transpose(M, (0, 2, 1)))
    lam_M = np.linalg.eigvalsh(Msym)[:, 0]
    rank_M = np.array([numerical_rank(m, RANK_RTOL) for m in M], dtype=float)
    lam_gram = np.linalg.eigvalsh(0.5 * (gram + np.transpose(gram, (0, 2, 1))))[:, 0]
    NTh = np.einsum("rij,rj->ri", N, th)
    MTh = np.einsum("rij,rj->ri", M, th)
    d_bar = scal[_kernel.D_BAR]
    cols = [t[:, None], x, xm, e, np.linalg.norm(e, axis=1)[:, None], th,
            np.linalg.norm(th - theta, axis=1)[:, None], u[:, None], V[:, None],
            (~direct).astype(float)[:, None], lam_M[:, None], rank_M[:, None], c4[:, None],
            np.linalg.norm(G - NTh, axis=1)[:, None], np.linalg.norm(H - MTh, axis=1)[:, None],
            lam_gram[:, None],
            np.linalg.norm(G - N @ theta, axis=1)[:, None],
            np.linalg.norm(H - M @ theta, axis=1)[:, None],
            np.linalg.norm(G1 - G1d, axis=1)[:, None],
            (d_bar / k * (1.0 - np.exp(-k * t)))[:, None], w1[:, None],
            np.linalg.norm(N.reshape(nrow, -1), axis=1)[:, None], r[:, None], Kd]
    return np.hstack(cols)


def _summary(sc, traj):
    t = traj.t
    err = traj["theta_err_norm"]
    en = traj["e_norm"]
    V = traj["V"]
    indirect = traj["phase"] > 0.5
    t_detect, gam = detect_excitation(t, traj["lambda_min_M"], sc.gamma_target)
    t_detect_g, gam_g = detect_excitation(t, traj["lambda_min_gram"], sc.gamma_target)
    mu = mu_floor(gam, sc.k, t_detect, sc.q) if np.isfinite(t_detect) and t_detect > 0 \
        else float("nan")
    after_final = t >= sc.T_final if np.isfinite(sc.T_final) else np.zeros(len(t), bool)
    c4_rows = indirect & (en > 0)
    upsilon = sc.design.upsilon
    i5 = int(np.searchsorted(t, 5.0 - 1e-12))
    tail = t >= t[-1] - 5.0
    out = {
        "n_rows": len(t),
        "t_end": float(t[-1]),
        "dt": sc.dt,
        "estimator": sc.estimator.kind,
        "disturbance": sc.disturbance,
        "seed": sc.seed,
        "k": sc.k,
        "T_switch": sc.controller.T_switch,
        "T_switch_snapped": sc.switch_step * sc.dt,
        "T_max_formula": sc.T_max,
        "T_final": sc.T_final,
        "settle_tol": SETTLE_TOL,
        "settle_time": _settle_time(t, err, SETTLE_TOL),
        "time_to_V_level": _settle_time(t, V, upsilon),
        "upsilon": upsilon,
        "max_V_after_T_final": float(V[after_final].max()) if after_final.any() else None,
        "max_V_after_switch": float(V[indirect].max()) if indirect.any() else None,
        "c4_fraction": float(np.mean(traj["c4_margin"][c4_rows] >= 0)) if c4_rows.any()
        else None,
        "excitation": {
            "gamma_target": sc.gamma_target,
            "T_detect_M": t_detect,
            "gamma_M": gam,
            "T_detect_gram": t_detect_g,
            "gamma_gram": gam_g,
            "mu": mu,
            "rank_M_final": int(traj["rank_M"][-1]),
        },
        "terminal": {"theta_err_norm": float(err[-1]), "e_norm": float(en[-1])},
        "at_5s": {"theta_err_norm": float(err[i5]), "e_norm": float(en[i5])}
        if i5 < len(t) else None,
        "tail_5s_max": {"theta_err_norm": float(err[tail].max()),
                        "e_norm": float(en[tail].max())},
        "max": {"theta_err_norm": float(err.max()), "e_norm": float(en.max()),
                "K_d_norm": float(np.linalg.norm(traj.block("K_d"), axis=1).max())},
    }
    return out


def run(scenario):
    """Integrate ``scenario`` and return its :class:`Trajectory`.

    Raises
    ------
    SimulationBlowUp
        If the state becomes non-finite; ``row`` is the logged row index and
        ``t`` the time of the failing step.
    """
    sc = scenario
    s0 = initial_state(sc)
    log, nrow, status = _kernel.integrate(s0, sc.dt, sc.n_steps, sc.switch_step, sc.log_every,
                                          *_kernel_inputs(sc))
    if status:
        raise SimulationBlowUp(
            f"non-finite state at t={status * sc.dt:.6g} (logged row {nrow - 1})",
            row=nrow - 1, t=status * sc.dt)
    traj = Trajectory(columns=_column_names(sc.n), data=_rows(sc, log))
    traj.summary = _summary(sc, traj)
    return traj


def sweep_initial_conditions(scenario, theta0_list, workers=1):
    """Run one scenario per initial estimate and collect the summaries.

    ``all_settled_before_switch`` is True when every run reached
    ``||theta_err|| <= 1e-3`` no later than ``T_switch``.
    """
    theta0_list = [np.asarray(th, dtype=float).reshape(-1) for th in theta0_list]
    if not theta0_list:
        raise InvalidInputError("need at least one initial estimate")
    scenarios = [replace(scenario, theta0=th) for th in theta0_list]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = [tr.summary for tr in pool.map(run, scenarios)]
    else:
        summaries = [run(s).summary for s in scenarios]
    times = np.array([s["settle_time"] for s in summaries])
    ok = bool(np.all(np.isfinite(times)) and np.all(times <= scenario.controller.T_switch))
    finite = times[np.isfinite(times)]
    spread = float(finite.max() / finite.min()) if finite.size and finite.min() > 0 \
        else float("nan")
    return {"theta0": [th.tolist() for th in theta0_list], "runs": summaries,
            "settle_times": times.tolist(), "all_settled_before_switch": ok,
            "spread_ratio": spread}


def scenario_from_config(cfg, report=None, **overrides):
    """Build a :class:`Scenario` (and the design, unless ``report`` is given)."""
    from .config import build_design, build_models

    if report is None:
        report = build_design(cfg)
    plant, ref = build_models(cfg)
    est = cfg["estimator"]
    ctl = cfg["controller"]
    sim = cfg["simulation"]
    n = plant.n
    state = ControllerState(K_d=ctl.get("K_d0", np.zeros(n)), Gamma_d=ctl["Gamma_d"],
                            P_1=report.P_1, T_switch=float(ctl["T_switch"]),
                            sigma=float(ctl.get("sigma", 0.1)),
                            kd_sign=float(ctl.get("kd_sign", -1.0)))
    kw = dict(
        plant=plant, reference=ref, k=float(cfg["filter"]["k"]),
        estimator=EstimatorConfig(kind=est["kind"], kappa=float(est["kappa"]),
                                  gamma=float(est["gamma"]), alpha=float(est["alpha"])),
        design=report.design, norm=report.norm, controller=state,
        x0=sim["x0"], x_m0=sim.get("x_m0", np.zeros(n)), theta0=est["theta0"],
        dt=float(sim["dt"]), t_end=float(sim["t_end"]), log_every=int(sim.get("log_every", 100)),
        seed=int(sim.get("seed", 0)), disturbance=bool(sim.get("disturbance", True)),
        gamma_target=float(est.get("gamma_target", 0.25)), q=int(est.get("q", 1)),
        T_final=report.T_final,
        T_max=report.settling.T_max if report.settling is not None else float("nan"))
    kw.update(overrides)
    return Scenario(**kw)
