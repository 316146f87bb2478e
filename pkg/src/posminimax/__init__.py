"""Minimax optimal control of positive linear systems.

Value iteration on a linear value vector, synthesis of sparse optimal
feedback and worst-case disturbance gains, closed-loop simulation, DC
network problem assembly, and a brute-force dynamic-programming oracle.
"""

from .bellman import (GainMatrix, IterationResult, Status, ValueVector,
                      adversary_gain, bellman_residual, bellman_step,
                      optimal_cost, residual_bound, synthesize_gain,
                      value_iterate)
from .dcnet import (DcNetwork, assemble_problem, build_laplacian,
                    check_network_condition, discretize, max_step_size)
from .exceptions import (DimensionError, InfeasibleProblemError,
                         InvariantViolation, LimitExceeded, ProblemFormatError,
                         StructuralInfeasibilityError)
from .model import (ProblemInstance, ValidationReport,
                    check_cost_condition, check_positivity_condition,
                    dump_problem, load_problem, validate)
from .oracle import finite_horizon_dp, stage_minimax, verify_linear_value
from .simulate import (RandomAdmissible, Trajectory, WorstCase,
                       ZeroDisturbance, accumulated_cost,
                       check_positive_invariance, closed_loop_step)
# the rollout function stays at posminimax.simulate.simulate so the
# submodule is not shadowed
from . import simulate

__version__ = '0.1.0'
