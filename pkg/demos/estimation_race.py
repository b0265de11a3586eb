"""Fixed-time versus exponential parameter estimation on the reference example.

Writes ``estimation_race.csv`` (time, both error norms) next to the script's
working directory for plotting elsewhere.
"""

# %%
from dataclasses import replace

import numpy as np

from fxtmrac import build_design, load_config, run, scenario_from_config, \
    sweep_initial_conditions

cfg = load_config("paper-sec5")
rep = build_design(cfg)
sc = scenario_from_config(cfg, rep, t_end=10.0, disturbance=False)

# %% Several initial estimates: the settling time barely moves
sweep = sweep_initial_conditions(sc, [np.full(4, v) for v in (0.0, 10.0, 100.0)])
for th0, ts in zip((0, 10, 100), sweep["settle_times"]):
    print(f"theta_hat(0) = {th0:>3} * 1  ->  ||theta_err|| <= 1e-3 from t = {ts:.2f} s")
print("all before the switch at 4.35 s:", sweep["all_settled_before_switch"])

# %% Same scenario with both exponents set to one
fxt = run(sc)
base = run(replace(sc, estimator=replace(sc.estimator, kind="baseline")))
print(f"fixed-time {fxt.summary['settle_time']:.2f} s, "
      f"exponential {base.summary['settle_time']:.2f} s")

# %%
out = np.column_stack([fxt.t, fxt["theta_err_norm"], base["theta_err_norm"]])
np.savetxt("estimation_race.csv", out, delimiter=",", header="t,fxt,baseline", comments="")
