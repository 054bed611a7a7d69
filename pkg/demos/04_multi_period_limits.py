"""Multi-period limits on a ramp-limited case, iteration by iteration."""

from dne.cases import ramp_limited_case
from dne.nccg import solve_dne

case = ramp_limited_case()
sol = solve_dne(case, callback=lambda r: print(
    f"k={r.k}  MP={r.mp_objective:.4f}  Q={r.q:.4f}  vertex={r.vertex}  inner={r.inner_iterations}"))
print(f"objective {sol.objective:.4f}")
for t in range(case.n_periods):
    print(f"period {t + 1}: lower {sol.box.lower[t].tolist()}  upper {sol.box.upper[t].tolist()}")
print("audit:", sol.audit.to_dict())
