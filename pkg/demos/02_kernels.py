"""The LP and MILP kernels on small problems, with their certificates."""

import numpy as np

from dne.lp import LinearProgram, dual_objective, solve_lp
from dne.milp import MixedIntegerProgram, solve_milp

# max 3x + 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x <= 3
lp = LinearProgram([3, 2], [[1, 1], [1, 3], [1, 0]], ["<="] * 3, [4, 6, 3], maximize=True)
sol = solve_lp(lp)
print("LP optimum", sol.objective, "at", sol.x)
print("row duals", sol.duals, "dual objective", dual_objective(lp, sol))

# the same problem with integer x, y and a fractional right-hand side
mip = MixedIntegerProgram(LinearProgram([3, 2], [[1, 1], [1, 3], [2, 0]], ["<="] * 3,
                                        [4.5, 6, 5], [0, 0], [10, 10], maximize=True), [0, 1])
res = solve_milp(mip)
print("MILP optimum", res.objective, "at", res.x, "after", res.nodes, "nodes")
print("bound history is non-increasing:", bool(np.all(np.diff(res.bound_history) <= 1e-9)))
