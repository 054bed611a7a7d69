"""The 30-bus case end to end, with timing. Takes a minute or two."""

import time

from dne.cases import synthetic_30_bus_case
from dne.nccg import solve_dne

start = time.perf_counter()
sol = solve_dne(synthetic_30_bus_case(),
                callback=lambda r: print(f"k={r.k}  MP={r.mp_objective:.4f}  Q={r.q:.4f}  "
                                         f"{time.perf_counter() - start:6.1f} s", flush=True))
print(f"rows after screening: {sol.system.n_rows}")
print(f"objective {sol.objective:.4f}, audit passed: {sol.audit.passed}, "
      f"total {time.perf_counter() - start:.1f} s")
