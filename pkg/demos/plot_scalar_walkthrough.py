"""
A scalar minimax problem, step by step
======================================

A single state ``x >= 0`` evolves as ``x+ = 0.9 x + 0.2 u + 0.1 w`` with
the input bounded by ``|u| <= x`` and the disturbance by ``|w| <= x``.
The stage cost is ``x + 0.1 u - 0.05 w``. The worst-case cost-to-go turns
out to be linear, ``J(x) = p x``, and here ``p = 4.25``.
"""

import numpy as np

from posminimax import ProblemInstance, validate
from posminimax.bellman import (iterates, synthesize_gain, adversary_gain,
                                value_iterate)
from posminimax.oracle import finite_horizon_dp

inst = ProblemInstance.scalar(a=0.9, b=0.2, f=0.1, e=1, g=1, s=1, r=0.1,
                              gamma=0.05)

###############################################################################
# Both standing conditions hold, with room to spare

report = validate(inst)
print(report.ok, report.min_margins)

###############################################################################
# The first few value-iteration steps. Each one is the minimax value of a
# one-step-longer horizon, so the sequence only grows.

for k, p in zip(range(6), iterates(inst)):
    print(k, p)

###############################################################################
# Run to convergence and read off the gains: ``u = -K x``, ``w = L x``

result = value_iterate(inst)
print(result.status, result.p, result.value.iterations)
K = synthesize_gain(result.p, inst)
L = adversary_gain(result.p, inst)
print("K =", K.matrix, "L =", L.matrix)

###############################################################################
# The brute-force recursion over box vertices agrees with ``p_3 x``

p3 = next(p for k, p in enumerate(iterates(inst)) if k == 3)
dp = finite_horizon_dp(inst, 3, [2.0])
print(dp.value, p3[0] * 2.0, dp.minimizer, dp.maximizer)
assert np.isclose(dp.value, p3[0] * 2.0)
