import numpy as np

from posminimax.generate import random_instance


def random_instances(seed, count, max_n=4, max_m=3, max_l=3, **kw):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        m = int(rng.integers(1, max_m + 1))
        l = int(rng.integers(1, max_l + 1))
        yield random_instance(rng, n, m, l, **kw)
