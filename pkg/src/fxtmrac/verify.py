"""Property suite run by ``fxtmrac verify``.

Each check returns ``(passed, detail)``; an exception inside a check counts
as a failure and its message becomes the detail.
"""

import time
from dataclasses import dataclass

import numpy as np

from ._linalg import is_anti_hurwitz
from .controller import kx_from_estimate, lyapunov_value
from .design import (final_time, gain_from_lmi, lyapunov_solve, verify_lmi)
from .estimator import _baseline_rate, _fxt_rate, settling_bound, signed_power
from .excitation import gain_for_mu, mu_floor
from .homogeneity import CanonicalNorm, Dilation, ExplicitNorm, homogeneity_degree_check
from .model import controllability_matrix, regressor, unvectorize_params, vectorize_params


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def as_dict(self):
        return dict(self.__dict__)


def _fd_grad(f, e, h=1e-6):
    g = np.zeros_like(e)
    for i in range(e.size):
        d = np.zeros_like(e)
        d[i] = h
        g[i] = (f(e + d) - f(e - d)) / (2 * h)
    return g


class _Context:
    """Lazily built objects shared between checks."""

    def __init__(self, cfg, generator=None):
        self.cfg = cfg
        self._generator = generator
        self._report = None
        self._short = None
        self.rng = np.random.default_rng(cfg["simulation"].get("seed", 0))

    @property
    def report(self):
        if self._report is None:
            from .config import build_design
            self._report = build_design(self.cfg)
        return self._report

    @property
    def generator(self):
        if self._generator is not None:
            return np.asarray(self._generator, dtype=float)
        return self.report.design.G_d

    @property
    def dilation(self):
        return Dilation(self.generator)

    @property
    def short_run(self):
        if self._short is None:
            from .sim import run, scenario_from_config
            sc = scenario_from_config(self.cfg, self.report, t_end=1.0, disturbance=False)
            self._short = (sc, run(sc))
        return self._short

    @property
    def A(self):
        return np.asarray(self.cfg["plant"]["A"], dtype=float)

    @property
    def A_m(self):
        return np.asarray(self.cfg["reference"]["A_m"], dtype=float)

    @property
    def B(self):
        return np.asarray(self.cfg["plant"]["B"], dtype=float)


CHECKS = []


def check(name):
    def deco(fn):
        CHECKS.append((name, fn))
        return fn
    return deco


@check("model.regressor_identity")
def _(ctx):
    worst = 0.0
    for _ in range(20):
        x = ctx.rng.normal(size=ctx.A.shape[0])
        worst = max(worst, np.abs(regressor(x) @ vectorize_params(ctx.A) - ctx.A @ x).max())
    return worst <= 1e-12, f"max |Phi theta - A x| = {worst:.3g}"


@check("model.vectorize_roundtrip")
def _(ctx):
    ok = np.array_equal(unvectorize_params(vectorize_params(ctx.A)), ctx.A)
    return ok, "vec/unvec round trip"


@check("model.controllable")
def _(ctx):
    c = controllability_matrix(ctx.A, ctx.B)
    r = np.linalg.matrix_rank(c)
    return r == ctx.A.shape[0], f"rank of controllability matrix {r}"


@check("model.reference_hurwitz")
def _(ctx):
    w = np.linalg.eigvals(ctx.A_m)
    return bool(np.all(w.real < 0)), f"eigenvalues {np.round(w, 6).tolist()}"


@check("filters.g1_by_parts_matches_direct_filter")
def _(ctx):
    gap = ctx.short_run[1]["g1_gap"].max()
    return gap <= 1e-6, f"max gap {gap:.3g}"


@check("filters.g_identity_disturbance_free")
def _(ctx):
    v = ctx.short_run[1]["g_identity"].max()
    return v <= 1e-6, f"max ||G - N theta|| {v:.3g}"


@check("filters.h_identity_disturbance_free")
def _(ctx):
    v = ctx.short_run[1]["h_identity"].max()
    return v <= 1e-6, f"max ||H - M theta|| {v:.3g}"


@check("filters.M_positive_semidefinite")
def _(ctx):
    v = ctx.short_run[1]["lambda_min_M"].min()
    return v >= -1e-10, f"min lambda_min(M) {v:.3g}"


@check("homogeneity.generator_anti_hurwitz")
def _(ctx):
    g = ctx.generator
    w = np.linalg.eigvals(g)
    return is_anti_hurwitz(g), f"generator eigenvalues {np.round(w, 6).tolist()}"


@check("homogeneity.group_law")
def _(ctx):
    dil = ctx.dilation
    worst = 0.0
    for a, b in ctx.rng.uniform(-2, 2, size=(20, 2)):
        worst = max(worst, np.abs(dil(a) @ dil(b) - dil(a + b)).max())
    return worst <= 1e-10, f"max group-law error {worst:.3g}"


@check("homogeneity.monotonicity")
def _(ctx):
    dil = ctx.dilation
    taus = np.linspace(-2, 2, 41)
    ok = True
    for _ in range(10):
        e = ctx.rng.normal(size=dil.n)
        vals = [np.sqrt((dil(t) @ e) @ dil.P @ (dil(t) @ e)) for t in taus]
        ok &= bool(np.all(np.diff(vals) > 0))
    return ok and dil.lyapunov_margin() > 0, f"P G + G^T P margin {dil.lyapunov_margin():.3g}"


@check("homogeneity.monotonicity_envelopes")
def _(ctx):
    dil = ctx.dilation
    worst = 0.0
    for tau in ctx.rng.uniform(0, 3, size=100):
        pn = dil.p_norm(tau)
        worst = max(worst, np.exp(dil.kappa2 * tau) - pn, pn - np.exp(dil.kappa1 * tau))
    return worst <= 1e-10, f"max envelope violation {worst:.3g}"


@check("homogeneity.explicit_degree_one")
def _(ctx):
    norm = ExplicitNorm(ctx.A.shape[0], 2.0, ctx.cfg["design"]["nu"])
    worst = 0.0
    for _ in range(50):
        e = ctx.rng.normal(size=norm.n)
        tau = ctx.rng.uniform(-2, 2)
        worst = max(worst, abs(norm(norm.dilation(tau) @ e) - np.exp(tau) * norm(e))
                    / (np.exp(tau) * norm(e)))
    return worst <= 1e-12, f"max relative scaling error {worst:.3g}"


@check("homogeneity.canonical_residual")
def _(ctx):
    norm = CanonicalNorm(ctx.dilation)
    worst = max(norm.residual(ctx.rng.normal(size=norm.n) * 10 ** ctx.rng.uniform(-3, 3))
                for _ in range(50))
    return worst <= 1e-10, f"max residual {worst:.3g}"


@check("homogeneity.gradients_match_finite_differences")
def _(ctx):
    worst = 0.0
    for norm in (ExplicitNorm(ctx.A.shape[0], 2.0, ctx.cfg["design"]["nu"]),
                 CanonicalNorm(ctx.dilation)):
        for _ in range(20):
            e = ctx.rng.normal(size=norm.n)
            g = norm.gradient(e)
            fd = _fd_grad(norm, e)
            worst = max(worst, np.linalg.norm(g - fd) / np.linalg.norm(fd))
    return worst <= 1e-5, f"max relative error {worst:.3g}"


@check("homogeneity.linear_field_degree_zero")
def _(ctx):
    g = ctx.generator
    rep = homogeneity_degree_check(lambda x: g @ x, ctx.dilation, 0.0, samples=50)
    return rep.passed, f"max violation {rep.max_violation:.3g}"


@check("design.lyapunov_residual_random")
def _(ctx):
    worst = 0.0
    for _ in range(20):
        n = int(ctx.rng.integers(1, 6))
        a = ctx.rng.normal(size=(n, n))
        a -= (np.abs(np.linalg.eigvals(a).real).max() + 0.5) * np.eye(n)
        p = lyapunov_solve(a)
        worst = max(worst, np.abs(a.T @ p + p @ a + np.eye(n)).max())
    return worst <= 1e-10, f"max residual {worst:.3g}"


@check("design.lmi_verified")
def _(ctx):
    d = ctx.report.design
    return d.verified, "; ".join(d.lmi.reasons) or "all LMI blocks negative semidefinite"


@check("design.gain_consistent_with_lmi")
def _(ctx):
    d = ctx.report.design
    K, P = gain_from_lmi(d.X, d.Y_lmi)
    err = max(np.abs(K @ d.X - d.Y_lmi).max(), np.abs(P @ d.X - np.eye(d.n)).max())
    return err <= 1e-10, f"max |K X - Y|, |P X - I| {err:.3g}"


@check("design.c3_precondition_rejected")
def _(ctx):
    d = ctx.report.design
    rep = verify_lmi(ctx.A_m, ctx.B, d.K_0, d.G_d, d.beta, d.X, d.Y_lmi, d.chi, d.eta,
                     d.zeta, d.zeta)
    ok = not rep.feasible and any("C3 precondition" in r for r in rep.reasons)
    return ok, "iota = zeta is rejected" if ok else "iota = zeta was accepted"


@check("design.final_time_closed_form")
def _(ctx):
    got = final_time(0.5, 2.0, 0.5, 1.0, 0.5, 1.0, 3.0)
    return abs(got - 11.0) <= 1e-12, f"final_time(0.5, 2, 0.5, 1, 0.5, 1, 3) = {got}"


@check("estimator.settling_bound_constants")
def _(ctx):
    e = ctx.cfg["estimator"]
    sb = settling_bound(e["alpha"], e.get("mu", 0.022), e["gamma"], ctx.A.shape[0],
                        e.get("c", 0.8), e.get("z", 0.6), e.get("q", 1),
                        e.get("T_excitation", 0.5))
    recomputed = 2 / sb.alpha * (1 / sb.kappa1 + 1 / sb.kappa2) + sb.q * sb.T
    ok = sb.p > 0 and abs(recomputed - sb.T_max) <= 1e-9 * sb.T_max
    return ok, f"p={sb.p:.6g} T_max={sb.T_max:.6g}"


@check("estimator.rates_vanish_at_truth")
def _(ctx):
    n = ctx.A.shape[0]
    p = n * n
    N = ctx.rng.normal(size=(n, p))
    M = N.T @ N
    th = vectorize_params(ctx.A)
    G, H = N @ th, M @ th
    v = max(np.abs(_fxt_rate(th, N, G, M, H, 25.0, 50.0, 2 / 3)).max(),
            np.abs(_baseline_rate(th, N, G, M, H, 25.0, 50.0)).max())
    return v <= 1e-12, f"max rate at the true parameters {v:.3g}"


@check("estimator.signed_power_odd")
def _(ctx):
    v = ctx.rng.normal(size=10)
    err = np.abs(signed_power(-v, 0.4) + signed_power(v, 0.4)).max()
    err = max(err, np.abs(signed_power(v, 1.0) - v).max())
    return err <= 1e-15, f"max error {err:.3g}"


@check("excitation.mu_gain_inverse")
def _(ctx):
    k = gain_for_mu(0.25, 0.022, 0.5)
    mu = mu_floor(0.25, k, 0.5, 1)
    return abs(mu - 0.022) <= 1e-12, f"k={k:.6g} mu={mu:.6g}"


@check("controller.indirect_gain_matches_reference")
def _(ctx):
    kx = kx_from_estimate(ctx.A, ctx.A_m, ctx.B)
    err = np.abs(ctx.A + np.outer(ctx.B, kx) - ctx.A_m).max()
    return err <= 1e-12, f"K_x={kx.tolist()} residual {err:.3g}"


@check("controller.lyapunov_value_positive")
def _(ctx):
    rep = ctx.report
    ok = lyapunov_value(np.zeros(rep.design.n), rep.design, rep.norm) == 0.0
    for _ in range(20):
        ok &= lyapunov_value(ctx.rng.normal(size=rep.design.n), rep.design, rep.norm) > 0
    return bool(ok), "V(0) = 0 and V(e) > 0 on samples"


@check("controller.canonical_value_equals_norm")
def _(ctx):
    dil = ctx.dilation
    norm = CanonicalNorm(dil)
    d = ctx.report.design
    from dataclasses import replace
    d = replace(d, G_d=dil.generator, P=dil.P)
    worst = 0.0
    for _ in range(20):
        e = ctx.rng.normal(size=dil.n)
        worst = max(worst, abs(lyapunov_value(e, d, norm) - norm(e)) / norm(e))
    return worst <= 1e-9, f"max relative |V - phi| {worst:.3g}"


@check("sim.deterministic")
def _(ctx):
    from .sim import run
    sc, tr = ctx.short_run
    again = run(sc)
    return np.array_equal(tr.data, again.data), "repeat run is bit-identical"


def run_suite(cfg, generator=None, only=None):
    """Run every check (or those named in ``only``). ``generator`` overrides
    the dilation generator taken from the design."""
    ctx = _Context(cfg, generator)
    out = []
    for name, fn in CHECKS:
        if only is not None and name not in only:
            continue
        t0 = time.perf_counter()
        try:
            passed, detail = fn(ctx)
        except Exception as exc:  # a crashing check is a failing check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(passed), str(detail), time.perf_counter() - t0))
    return out
