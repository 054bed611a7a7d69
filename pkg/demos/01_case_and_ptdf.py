"""Load a case, look at its network sensitivities and write it back out."""

import numpy as np

from dne.cases import ramp_limited_case
from dne.system import compute_ptdf, load_case, serialize_case

case = ramp_limited_case()
print(f"{case.name}: {len(case.buses)} buses, {len(case.lines)} lines, "
      f"{len(case.units)} units, {len(case.wind_farms)} farms, {case.n_periods} periods")

ptdf = compute_ptdf(case)
np.set_printoptions(precision=3, suppress=True)
print("PTDF (lines x buses); the slack bus column is zero:")
print(ptdf)

text = serialize_case(case)
again = load_case(text, name=case.name)
print("JSON round trip preserved the case:", serialize_case(again) == text)
