"""Versioned, immutable scenario presets.

``paper-sec5`` holds the numerical study inputs exactly as printed, in the
``printed`` block, plus the values this package adds because the source
leaves them open (filter gain, leakage, switching constants, see README).
"""

import copy
import json

from .exceptions import InvalidInputError

PRESET_VERSION = "1"

_REFERENCE_PRESET = {
    "preset": "paper-sec5",
    "version": PRESET_VERSION,
    "plant": {
        "A": [[0.0, 1.0], [-5.0, -6.0]],
        "B": [0.0, 1.0],
        "disturbance": {
            "offset": [0.0, 0.0],
            "terms": [
                {"amplitude": 0.5, "omega": 50.0, "phase": 0.0, "t_on": 0.0, "channel": 0},
                {"amplitude": 1.0, "omega": 50.0, "phase": 0.0, "t_on": 0.0, "channel": 1},
            ],
        },
    },
    "reference": {
        "A_m": [[0.0, 1.0], [-7.0, -10.0]],
        "r": {
            "offset": [5.0],
            "terms": [
                {"amplitude": 3.0, "omega": 1.0, "phase": 0.0, "t_on": 0.0, "channel": 0},
                {"amplitude": 5.0, "omega": 2.0, "phase": 0.0, "t_on": 5.0, "channel": 0},
            ],
        },
    },
    "filter": {"k": 1.25},
    "estimator": {
        "kind": "fxt",
        "kappa": 25.0,
        "gamma": 50.0,
        "alpha": 2.0 / 3.0,
        "theta0": [0.0, 0.0, 0.0, 0.0],
        "gamma_target": 0.25,
        "T_excitation": 0.5,
        "q": 1.0,
        "mu": 0.022,
        "c": 0.8,
        "z": 0.6,
    },
    "design": {
        "epsilon": 0.5,
        "nu": 0.2,
        "exponent": 0.5,
        "beta": 1.5,
        "zeta": 0.1,
        "upsilon": 0.1,
        "psi": 0.5,
        "K_0": [7.0, 10.0],
        "L": [[2.0, 0.0], [1.0, 0.0]],
        "norm": {"kind": "explicit", "rho": 2.0},
        "lmi": {
            "chi": 12.6,
            "eta": 0.14,
            "iota": 0.25,
            "X": [[14.5, -6.0], [-6.0, 5.0]],
            "K": [-1.26, -2.71],
        },
        "samples": 2000,
    },
    "controller": {
        "Gamma_d": [[10.0, 0.0], [0.0, 10.0]],
        "sigma": 0.1,
        "kd_sign": -1.0,
        "T_switch": 4.35,
        "P_1": None,
        "Q_1": [[1.0, 0.0], [0.0, 1.0]],
        "K_d0": [0.0, 0.0],
    },
    "simulation": {
        "x0": [5.0, 8.0],
        "x_m0": [0.0, 0.0],
        "dt": 1e-4,
        "t_end": 10.0,
        "log_every": 100,
        "seed": 0,
        "disturbance": True,
    },
    "printed": {
        "P_1": [[0.3025, -0.5], [-0.5, 1.05]],
        "T_max": 4.35,
        "T_final": 29.6,
        "mu": 0.022,
        "gamma": 0.25,
        "K": [-1.26, -2.71],
    },
}

PRESETS = {"paper-sec5": json.dumps(_REFERENCE_PRESET)}


def preset_names():
    return sorted(PRESETS)


def get_preset(name):
    """A fresh deep copy of the named preset; the stored copy never changes."""
    try:
        return copy.deepcopy(json.loads(PRESETS[name]))
    except KeyError:
        raise InvalidInputError(f"unknown preset {name!r}; known: {preset_names()}") from None
