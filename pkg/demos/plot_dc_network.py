"""
Voltage control on a three-bus DC line
======================================

Three buses in a row, unit capacitances and unit line resistances. Each
bus has a controller bounded by ``|u_i| <= e x_i`` and a disturbance
bounded by ``|w_i| <= g x_i``. The explicit Euler step must be short
enough for the discretized system to stay positive.
"""

import numpy as np

from posminimax.bellman import value_iterate, synthesize_gain
from posminimax.dcnet import (DcNetwork, assemble_problem, discretize,
                              max_step_size)
from posminimax.exceptions import InfeasibleProblemError

net = DcNetwork(capacitances=[1, 1, 1], lines=[(0, 1, 1.0), (1, 2, 1.0)])
E = 0.5 * np.eye(3)
G = 0.2 * np.eye(3)

###############################################################################
# The middle bus has two lines, so it sets the step limit

h_max = max_step_size(net, E, G)
print("h_max =", h_max)
print(discretize(net, h_max).A)

###############################################################################
# Any longer step breaks positivity

try:
    assemble_problem(net, 1.01 * h_max, E, G, s=np.ones(3), r=np.zeros(3),
                     gamma=np.zeros(3))
except InfeasibleProblemError as exc:
    print(exc, exc.report.min_margins)

###############################################################################
# At ``h_max`` the problem is well posed. Every controller pushes its own
# bus down, ``K = E``.

inst = assemble_problem(net, h_max, E, G, s=np.ones(3), r=np.zeros(3),
                        gamma=np.zeros(3))
result = value_iterate(inst)
print(result.status, result.p)
print(synthesize_gain(result.p, inst).matrix)
