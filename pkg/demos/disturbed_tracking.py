"""Tracking and estimation under the 50 rad/s disturbance.

Writes the full trajectory to ``disturbed_tracking.csv``.
"""

# %%
import numpy as np

from fxtmrac import build_design, load_config, run, scenario_from_config

cfg = load_config("paper-sec5")
rep = build_design(cfg)
tr = run(scenario_from_config(cfg, rep, t_end=30.0))
s = tr.summary

# %% Errors stay bounded; the estimate carries a disturbance-sized bias
print("at 5 s     ", s["at_5s"])
print("last 5 s   ", s["tail_5s_max"])
print("C4 holds on", f"{100 * s['c4_fraction']:.1f}% of indirect-phase samples")

# %% The closed-loop Lyapunov value after the switch
t, V = tr.t, tr["V"]
for t_probe in (4.4, 5.0, 10.0, 20.0, 30.0):
    i = min(np.searchsorted(t, t_probe), len(t) - 1)
    print(f"V({t[i]:5.2f}) = {V[i]:.3e}")

# %%
tr.to_csv("disturbed_tracking.csv")
