"""Per-period limits ignore ramping between periods; a trajectory shows the cost."""

from dne.cases import ramp_limited_case
from dne.ded import solve_ded
from dne.feasibility import check_scenario, find_violating_trajectory
from dne.nccg import solve_dne, solve_single_period

case = ramp_limited_case()
ded = solve_ded(case)
multi = solve_dne(case, ded=ded, audit=False)
singles = [solve_single_period(case, t, ded=ded, audit=False) for t in range(case.n_periods)]
for t, s in enumerate(singles):
    print(f"period {t + 1}: single {s.box.lower[0].tolist()}..{s.box.upper[0].tolist()}"
          f"   multi {multi.box.lower[t].tolist()}..{multi.box.upper[t].tolist()}")

traj = find_violating_trajectory(case, [s.box for s in singles], multi.box, ded.ddp)
print("trajectory inside every single-period box:", traj.mw.tolist())
res = check_scenario(case, ded.ddp, traj)
print(f"feasible: {res.feasible}, total slack {res.total_slack:.4f} MW")
print("violated rows:", ", ".join(res.violated_rows))
