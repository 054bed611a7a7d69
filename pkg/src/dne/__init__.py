"""Multi-period do-not-exceed limits for wind farms with quick-start recourse."""

from .ded import DedInfeasibleError, DedResult, sigma_from_lmps, solve_ded
from .feasibility import (ScenarioCheck, WindTrajectory, check_scenario,
                          find_violating_trajectory, trajectory_from_csv, trajectory_to_csv)
from .formulation import (DneBox, Label, StackedSystem, apply_uncertainty, build_coupling_blocks,
                          build_period_blocks, build_stacked_system, restrict_to_period,
                          stack_system)
from .lp import LinearProgram, LpConfig, LpSolution, solve_lp
from .milp import MipConfig, MipSolution, MixedIntegerProgram, NodeLimitExceeded, solve_milp
from .nccg import (DneError, DneSolution, ForecastInfeasibleError, IterationLimitError,
                   SolverConfig, evaluate_recourse, solve_dne, solve_master,
                   solve_single_period, solve_subproblem)
from .report import emit_plot_csv
from .system import (Bus, CaseError, Line, SystemCase, ThermalUnit, TimeGrid, WindFarm,
                     compute_ptdf, load_case, read_case, serialize_case)

__version__ = "0.1.0"
