"""Walk through the controller design for the reference example.

Run with ``python3 demos/design_walkthrough.py``.
"""

# %% The example plant, reference model and printed design inputs
import numpy as np

from fxtmrac import (Dilation, audit, build_design, c1_from_preset, load_config, solve_c1)

cfg = load_config("paper-sec5")
A_m = np.array(cfg["reference"]["A_m"])
B = np.array(cfg["plant"]["B"])
print("A_m =\n", A_m)

# %% C1: the printed L does not solve the Sylvester-type equation
printed = c1_from_preset(A_m, B, cfg["design"]["L"], cfg["design"]["K_0"], 0.5, 0.2)
exact = solve_c1(A_m, B, 0.5, 0.2)
print(f"printed L residual   {printed.residual:.4f}, G_d =\n{printed.G_d}")
print(f"exact L = {exact.L.round(12).tolist()}, K_0 = {exact.K_0.round(12).tolist()}")

# %% The dilation generated by G_d and its monotonicity constants
dil = Dilation(printed.G_d)
print(f"kappa1 = {dil.kappa1:.4f}, kappa2 = {dil.kappa2:.4f}")

# %% Full design chain: LMI check, gain, Lyapunov matrix, level-set bounds
rep = build_design(cfg)
d = rep.design
print("LMI feasible:", d.verified, " margins:", round(d.lmi.main_margin, 4),
      round(d.lmi.decay_margin, 4))
print("K =", d.K.round(4).tolist())
print("delta bounds:", np.round(rep.delta, 4).tolist(), " T_final(psi=0.5) =",
      round(rep.T_final, 2))

# %% What the printed values imply when recomputed
for item in audit(cfg, rep):
    flag = "DISCREPANCY" if item["discrepancy"] else "ok"
    print(f"{flag:12s} {item['item']}: computed {item['computed']} expected {item['expected']}")
