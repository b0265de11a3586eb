"""JSON configuration: schema validation, preset merging and assembly of the
design and scenario objects."""

import copy
import json
from dataclasses import dataclass

import jsonschema
import numpy as np

from .design import (HomogeneousDesign, c1_from_preset, delta_bounds, estimate_beta,
                     final_time, gain_from_lmi, lyapunov_check, lyapunov_solve, search_lmi,
                     solve_c1, verify_lmi)
from .estimator import settling_bound
from .exceptions import InvalidAuxiliaryConstants, InvalidInputError, SynthesisFailed
from .homogeneity import CanonicalNorm, Dilation, ExplicitNorm
from .model import PlantModel, ReferenceModel, SignalSpec, SineTerm
from .presets import get_preset

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MAT = {"type": "array", "items": _VEC, "minItems": 1}
_NULL_MAT = {"anyOf": [_MAT, {"type": "null"}]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_TERM = _obj({"amplitude": _NUM, "omega": _NUM, "phase": _NUM, "t_on": _NUM,
              "channel": {"type": "integer", "minimum": 0}}, ("amplitude", "omega"))
_SIGNAL = _obj({"offset": _VEC, "terms": {"type": "array", "items": _TERM}}, ("offset",))

SCHEMA = _obj({
    "preset": {"type": "string"},
    "version": {"type": "string"},
    "plant": _obj({"A": _MAT, "B": _VEC, "disturbance": _SIGNAL}, ("A", "B")),
    "reference": _obj({"A_m": _MAT, "r": _SIGNAL}, ("A_m", "r")),
    "filter": _obj({"k": _POS}, ("k",)),
    "estimator": _obj({
        "kind": {"enum": ["fxt", "baseline", "off"]},
        "kappa": _POS, "gamma": _POS,
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "theta0": _VEC, "gamma_target": _POS, "T_excitation": _POS,
        "q": {"type": "number", "minimum": 1}, "mu": _POS, "c": _POS, "z": _POS,
    }, ("kind", "kappa", "gamma", "alpha", "theta0")),
    "design": _obj({
        "epsilon": _POS, "nu": _POS, "exponent": _NUM,
        "beta": {"anyOf": [_POS, {"type": "null"}]},
        "zeta": _POS, "upsilon": _POS,
        "psi": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "K_0": _VEC, "L": _NULL_MAT,
        "norm": _obj({"kind": {"enum": ["explicit", "canonical"]}, "rho": _POS}, ("kind",)),
        "lmi": {"anyOf": [{"type": "null"}, _obj({
            "chi": _NUM, "eta": _NUM, "iota": _NUM, "X": _MAT, "Y": _VEC, "K": _VEC,
        }, ("chi", "eta", "iota", "X"))]},
        "samples": {"type": "integer", "minimum": 100},
    }, ("epsilon", "nu", "zeta", "upsilon", "psi", "norm")),
    "controller": _obj({
        "Gamma_d": _MAT, "sigma": {"type": "number", "minimum": 0},
        "kd_sign": {"enum": [-1, 1, -1.0, 1.0]}, "T_switch": {"type": "number", "minimum": 0},
        "P_1": _NULL_MAT, "Q_1": _NULL_MAT, "K_d0": _VEC,
    }, ("Gamma_d", "T_switch")),
    "simulation": _obj({
        "x0": _VEC, "x_m0": _VEC, "dt": _POS, "t_end": _POS,
        "log_every": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0}, "disturbance": {"type": "boolean"},
    }, ("x0", "dt", "t_end")),
    "printed": {"type": "object"},
}, ("plant", "reference", "filter", "estimator", "design", "controller", "simulation"))


def deep_merge(base, override):
    """Recursive dict merge; ``override`` wins, lists and scalars are replaced."""
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _shape_errors(cfg):
    A = np.asarray(cfg["plant"]["A"], dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return ["plant.A must be square"]
    n = A.shape[0]
    errs = []

    def want(path, value, shape):
        arr = np.asarray(value, dtype=float) if value is not None else None
        if arr is not None and arr.shape != shape:
            errs.append(f"{path} has shape {arr.shape}, expected {shape}")

    want("plant.B", cfg["plant"]["B"], (n,))
    want("reference.A_m", cfg["reference"]["A_m"], (n, n))
    want("estimator.theta0", cfg["estimator"]["theta0"], (n * n,))
    d = cfg["design"]
    want("design.K_0", d.get("K_0"), (n,))
    want("design.L", d.get("L"), (n, n))
    if d.get("lmi"):
        want("design.lmi.X", d["lmi"]["X"], (n, n))
        want("design.lmi.Y", d["lmi"].get("Y"), (n,))
        want("design.lmi.K", d["lmi"].get("K"), (n,))
    c = cfg["controller"]
    want("controller.Gamma_d", c["Gamma_d"], (n, n))
    want("controller.P_1", c.get("P_1"), (n, n))
    want("controller.Q_1", c.get("Q_1"), (n, n))
    want("controller.K_d0", c.get("K_d0"), (n,))
    s = cfg["simulation"]
    want("simulation.x0", s["x0"], (n,))
    want("simulation.x_m0", s.get("x_m0"), (n,))
    for name, sig, ch in (("plant.disturbance", cfg["plant"].get("disturbance"), n),
                          ("reference.r", cfg["reference"]["r"], 1)):
        if sig is None:
            continue
        want(f"{name}.offset", sig["offset"], (ch,))
        for t in sig.get("terms", []):
            if t.get("channel", 0) >= ch:
                errs.append(f"{name} term channel {t['channel']} out of range")
    return errs


def validate_config(cfg):
    """Schema plus dimension checks. Raises :class:`InvalidInputError`."""
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidInputError(f"invalid config at {where}: {exc.message}") from None
    errs = _shape_errors(cfg)
    if errs:
        raise InvalidInputError("invalid config: " + "; ".join(errs))
    return cfg


def load_config(preset=None, path=None, overrides=None):
    """Merge ``preset``, the JSON file at ``path`` and ``overrides`` (in that
    order), then validate.  A ``preset`` key inside the file is honoured when
    no preset is given explicitly."""
    doc = {}
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read config {path}: {exc}") from None
        if not isinstance(doc, dict):
            raise InvalidInputError("config root must be an object")
    name = preset or doc.get("preset")
    cfg = get_preset(name) if name else {}
    cfg = deep_merge(cfg, doc)
    if overrides:
        cfg = deep_merge(cfg, overrides)
    return validate_config(cfg)


def _signal(spec, channels):
    if spec is None:
        return SignalSpec.zero(channels)
    terms = tuple(SineTerm(**t) for t in spec.get("terms", []))
    return SignalSpec(offset=tuple(spec["offset"]), terms=terms)


def build_models(cfg):
    n = len(cfg["plant"]["A"])
    plant = PlantModel(cfg["plant"]["A"], cfg["plant"]["B"],
                       _signal(cfg["plant"].get("disturbance"), n))
    ref = ReferenceModel(cfg["reference"]["A_m"], cfg["plant"]["B"],
                         _signal(cfg["reference"]["r"], 1))
    return plant, ref


def build_norm(cfg, G_d=None):
    d = cfg["design"]
    n = len(cfg["plant"]["A"])
    spec = d["norm"]
    if spec["kind"] == "explicit":
        return ExplicitNorm(n, rho=spec.get("rho", 2.0), nu=d["nu"])
    return CanonicalNorm(Dilation(G_d))


@dataclass(frozen=True)
class DesignReport:
    """Design plus the derived numbers a report or audit needs."""

    design: HomogeneousDesign
    norm: object
    settling: object
    delta: tuple
    T_final: float
    beta_raw: float
    P_1: np.ndarray
    P_1_eigs: np.ndarray
    lmi_source: str

    def as_dict(self):
        d = self.design
        out = {
            "verified": d.verified,
            "lmi_source": self.lmi_source,
            "norm": self.norm.variant,
            "L": d.L.tolist(), "Y_c1": d.Y_c1.tolist(), "G_d": d.G_d.tolist(),
            "K_0": d.K_0.tolist(), "residual_c1": d.residual_c1,
            "X": d.X.tolist(), "Y_lmi": d.Y_lmi.tolist(),
            "chi": d.chi, "eta": d.eta, "iota": d.iota, "zeta": d.zeta,
            "K": d.K.tolist(), "P": d.P.tolist(), "beta": d.beta,
            "beta_sampled": self.beta_raw,
            "lmi": d.lmi.as_dict() if d.lmi is not None else None,
            "P_1": self.P_1.tolist(),
            "P_1_lyapunov_eigs": self.P_1_eigs.tolist(),
            "settling": self.settling.as_dict() if self.settling is not None else None,
            "delta": list(self.delta),
            "T_final": self.T_final,
            "notes": list(d.notes),
        }
        return out


def build_design(cfg, seed=None):
    """Run the C1 solve, beta estimate, LMI ingestion/synthesis and the bounds.

    An infeasible LMI does not raise; ``report.design.verified`` is False and
    the reasons are kept in ``design.lmi``.  Only a failed synthesis (no
    solution supplied and none found) raises :class:`SynthesisFailed`.
    """
    seed = cfg["simulation"].get("seed", 0) if seed is None else seed
    A_m = np.asarray(cfg["reference"]["A_m"], dtype=float)
    B = np.asarray(cfg["plant"]["B"], dtype=float)
    d = cfg["design"]
    notes = []
    if d.get("L") is not None:
        if d.get("K_0") is None:
            raise InvalidInputError("design.L requires design.K_0")
        c1 = c1_from_preset(A_m, B, d["L"], d["K_0"], d["epsilon"], d["nu"])
    else:
        c1 = solve_c1(A_m, B, d["epsilon"], d["nu"])
        if d.get("K_0") is not None and not np.allclose(d["K_0"], c1.K_0):
            notes.append(f"configured K_0 {d['K_0']} replaced by C1 solution {c1.K_0.tolist()}")
    if not c1.exact:
        notes.append(f"C1 residual {c1.residual:.4g} (equation not satisfied exactly)")
    if c1.lb_residual > 1e-9:
        notes.append(f"L B = 0 violated by {c1.lb_residual:.4g}")
    norm = build_norm(cfg, c1.G_d)
    samples = d.get("samples", 2000)
    beta_raw = float("nan")
    if d.get("beta") is None:
        beta, beta_raw = estimate_beta(norm, samples=samples, seed=seed)
    else:
        beta = float(d["beta"])
        _, beta_raw = estimate_beta(norm, samples=samples, seed=seed)
    zeta = float(d["zeta"])
    lmi = d.get("lmi")
    if lmi is not None:
        X = np.asarray(lmi["X"], dtype=float)
        if lmi.get("Y") is not None:
            Y = np.asarray(lmi["Y"], dtype=float)
            source = "supplied"
        elif lmi.get("K") is not None:
            # only K is available, so Y is reconstructed from K = Y X^{-1}
            Y = np.asarray(lmi["K"], dtype=float) @ X
            source = "supplied (Y = K X)"
        else:
            raise InvalidInputError("design.lmi needs Y or K")
        report = verify_lmi(A_m, B, c1.K_0, c1.G_d, beta, X, Y, lmi["chi"], lmi["eta"],
                            lmi["iota"], zeta)
        chi, eta, iota = float(lmi["chi"]), float(lmi["eta"]), float(lmi["iota"])
    else:
        sol = search_lmi(A_m, B, c1.K_0, c1.G_d, beta, zeta)
        X, Y, chi, eta, iota, report = sol.X, sol.Y, sol.chi, sol.eta, sol.iota, sol.report
        source = "synthesised"
    K, P = gain_from_lmi(X, Y)
    design = HomogeneousDesign(
        L=c1.L, Y_c1=c1.Y, epsilon=float(d["epsilon"]), nu=float(d["nu"]), G_d=c1.G_d,
        K_0=c1.K_0, X=X, Y_lmi=np.asarray(Y, dtype=float).reshape(-1), chi=chi, eta=eta,
        iota=iota, zeta=zeta, K=K, P=P, beta=beta, psi=float(d["psi"]),
        upsilon=float(d["upsilon"]), exponent=float(d.get("exponent", d["epsilon"])),
        residual_c1=c1.residual, lmi=report, notes=tuple(notes))

    est = cfg["estimator"]
    try:
        sb = settling_bound(est["alpha"], est.get("mu", 0.022), est["gamma"], A_m.shape[0],
                            est.get("c", 0.8), est.get("z", 0.6), est.get("q", 1),
                            est.get("T_excitation", 0.5))
        t_max = sb.T_max
    except InvalidAuxiliaryConstants as exc:
        sb, t_max = None, float("nan")
        notes.append(str(exc))
    delta = delta_bounds(X, norm, samples=samples, seed=seed)
    t_final = final_time(delta[0], delta[1], design.psi, iota, design.nu, design.upsilon,
                         cfg["controller"]["T_switch"])
    c = cfg["controller"]
    if c.get("P_1") is not None:
        P_1 = np.asarray(c["P_1"], dtype=float)
    else:
        P_1 = lyapunov_solve(A_m, c.get("Q_1"))
    eigs, _ = lyapunov_check(A_m, P_1)
    if eigs[0] <= 0:
        notes.append("P_1 is not a Lyapunov matrix for A_m")
    design = HomogeneousDesign(**{**design.__dict__, "notes": tuple(notes)})
    return DesignReport(design=design, norm=norm, settling=sb, delta=delta, T_final=t_final,
                        beta_raw=beta_raw, P_1=P_1, P_1_eigs=eigs, lmi_source=source)


def audit(cfg, report):
    """Compare printed values with what the formulas give. Returns a list of dicts."""
    printed = cfg.get("printed", {})
    A_m = np.asarray(cfg["reference"]["A_m"], dtype=float)
    B = np.asarray(cfg["plant"]["B"], dtype=float)
    d = cfg["design"]
    items = []
    if d.get("L") is not None:
        c1 = c1_from_preset(A_m, B, d["L"], d["K_0"], d["epsilon"], d["nu"])
        exact = solve_c1(A_m, B, d["epsilon"], d["nu"])
        items.append({"item": "C1 residual", "computed": c1.residual,
                      "expected": 0.0, "discrepancy": c1.residual > 1e-9,
                      "detail": f"exact solution L={exact.L.round(12).tolist()} "
                                f"gives K_0={exact.K_0.round(12).tolist()}"})
    if "P_1" in printed:
        eigs, _ = lyapunov_check(A_m, printed["P_1"])
        items.append({"item": "P_1 Lyapunov check", "computed": eigs.tolist(),
                      "expected": "all eigenvalues of -(A_m^T P_1 + P_1 A_m) positive",
                      "discrepancy": bool(eigs[0] <= 0), "detail": ""})
    if "T_max" in printed and report.settling is not None:
        sb = report.settling
        items.append({"item": "T_max formula", "computed": sb.T_max,
                      "expected": printed["T_max"],
                      "discrepancy": abs(sb.T_max - printed["T_max"]) > 1e-2,
                      "detail": f"p={sb.p:.6g} kappa1={sb.kappa1:.6g} kappa2={sb.kappa2:.6g}"})
    if "T_final" in printed:
        items.append({"item": "T_final formula", "computed": report.T_final,
                      "expected": printed["T_final"],
                      "discrepancy": abs(report.T_final - printed["T_final"]) > 1e-1,
                      "detail": f"delta={list(report.delta)} psi={d['psi']} "
                                "(psi is not stated in the source)"})
    if "K" in printed:
        items.append({"item": "K from LMI", "computed": report.design.K.tolist(),
                      "expected": printed["K"],
                      "discrepancy": not np.allclose(report.design.K, printed["K"], atol=0.01),
                      "detail": f"Y_lmi source: {report.lmi_source}"})
    items.append({"item": "Gamma ambiguity", "computed": None, "expected": None,
                  "discrepancy": True,
                  "detail": "gamma is stated for lambda_min(M); this package checks it "
                            "against M and reports the regressor Gram matrix separately"})
    items.append({"item": "unstated constants", "computed": {
        "k": cfg["filter"]["k"], "sigma": cfg["controller"].get("sigma"), "psi": d["psi"],
        "kd_sign": cfg["controller"].get("kd_sign")}, "expected": None, "discrepancy": True,
        "detail": "filter gain, leakage, psi and the adaptive-gain sign are chosen here"})
    return items
