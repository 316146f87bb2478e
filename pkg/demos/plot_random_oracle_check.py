"""
Certifying a random instance against brute force
================================================

Draw a small random instance that meets the standing conditions, solve it
by value iteration, and compare the finite-horizon values with an
exhaustive min-max recursion at random nonnegative states.
"""

import numpy as np

from posminimax import validate
from posminimax.bellman import value_iterate, synthesize_gain
from posminimax.generate import random_instance
from posminimax.oracle import verify_linear_value

rng = np.random.default_rng(7)
inst = random_instance(rng, n=3, m=2, l=1)
print(validate(inst).min_margins)

###############################################################################
# Horizons 1 to 4; each step multiplies the tree by ``2 ** (m + l) = 8``

states = rng.uniform(0, 1, size=(10, inst.n))
for k in range(1, 5):
    check = verify_linear_value(inst, k, states)
    print(f"k={k}  passed={check.passed}  max deviation={check.max_deviation:.1e}")

###############################################################################
# The infinite-horizon solution and its feedback gain

result = value_iterate(inst)
print(result.status, result.p)
print(synthesize_gain(result.p, inst).matrix)
