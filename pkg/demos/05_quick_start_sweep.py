"""How quick-start recourse changes the limits: none, then all units."""

from dne.cases import random_small_case, two_bus_qsu_case
from dne.nccg import SolverConfig, solve_dne

for case in (two_bus_qsu_case(), random_small_case(1), random_small_case(2)):
    row = []
    for qsus in ("none", "all"):
        sol = solve_dne(case, SolverConfig(recourse_qsus=qsus), audit=False)
        row.append(f"{qsus}: {sol.objective:8.4f}")
    print(f"{case.name:16s}", "   ".join(row))
