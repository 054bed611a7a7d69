"""Economic dispatch at forecast wind and the price-based range weights."""

import numpy as np

from dne.ded import sigma_from_lmps, solve_ded
from dne.system import Bus, Line, SystemCase, ThermalUnit, TimeGrid, WindFarm

# a cheap unit behind a 15 MW line, an expensive one at the load bus
case = SystemCase(
    (Bus(1), Bus(2, is_slack=True)), (Line("L", 1, 2, 0.1, 15),),
    (ThermalUnit("cheap", 1, 0, 100, np.inf, 10, initial_output=30),
     ThermalUnit("dear", 2, 0, 100, np.inf, 20, initial_output=30)),
    (WindFarm("A", 2, (0.0,) * 2, (10.0,) * 2, (5.0,) * 2),
     WindFarm("B", 1, (0.0,) * 2, (10.0,) * 2, (5.0,) * 2)),
    {2: (40.0, 40.0)}, TimeGrid(2), name="congested")

ded = solve_ded(case)
print("dispatch per period:", ded.ddp.tolist())
print("LMP per period and bus:", np.round(ded.lmp, 6).tolist())
sigma = sigma_from_lmps(ded, case)
print("weights (farm A sits at the dearer bus):", np.round(sigma, 4).tolist())
