"""Random problem instances and networks satisfying the standing conditions."""

import numpy as np

from .dcnet import DcNetwork
from .model import ProblemInstance

__all__ = ['random_instance', 'random_network']


def _sparse_nonneg(rng, shape, density):
    return rng.uniform(0.0, 1.0, shape) * (rng.uniform(size=shape) < density)


def random_instance(rng, n, m, l, density=0.6, radius=0.9):
    """Random instance meeting the positivity and cost conditions.

    ``E`` and ``G`` are sparse and nonnegative, ``B`` and ``F`` signed,
    ``A`` is ``|B| E + |F| G`` plus a sparse nonnegative remainder, and
    ``s`` exceeds ``E'|r| - G'|gamma|`` by a strictly positive amount.

    Parameters
    ----------
    rng : numpy.random.Generator
    n, m, l : int
    density : float
        Fraction of nonzeros in ``E``, ``G`` and the remainder of ``A``.
    radius : float or None
        ``A``, ``B`` and ``F`` are rescaled together so that
        ``A + |B| E + |F| G`` has this spectral radius, which bounds every
        closed loop and makes value iteration converge. ``None`` skips the
        rescaling.
    """
    E = _sparse_nonneg(rng, (m, n), density)
    G = _sparse_nonneg(rng, (l, n), density)
    B = rng.normal(size=(n, m))
    F = rng.normal(size=(n, l))
    rest = _sparse_nonneg(rng, (n, n), density)
    if radius is not None:
        bound = np.abs(B) @ E + np.abs(F) @ G
        rho = np.max(np.abs(np.linalg.eigvals(2 * bound + rest)))
        if rho > 0:
            c = radius / rho
            B, F, rest = c * B, c * F, c * rest
    # formed last so that A - |B| E - |F| G >= 0 holds in floating point
    A = np.abs(B) @ E + np.abs(F) @ G + rest
    r = rng.normal(size=m)
    gamma = rng.normal(size=l)
    s = (E.T @ np.abs(r) - G.T @ np.abs(gamma)
         + rng.uniform(0.05, 1.0, size=n))
    return ProblemInstance(A, B, F, E, G, s, r, gamma)


def random_network(rng, n, extra_edges=2, R_range=(0.5, 2.0),
                   C_range=(0.5, 2.0)):
    """Random connected network: a random tree plus ``extra_edges`` chords."""
    edges = set()
    order = rng.permutation(n)
    for k in range(1, n):
        parent = order[rng.integers(k)]
        edges.add(frozenset((int(order[k]), int(parent))))
    candidates = [frozenset((i, j)) for i in range(n) for j in range(i + 1, n)
                  if frozenset((i, j)) not in edges]
    if candidates and extra_edges:
        picks = rng.choice(len(candidates),
                           size=min(extra_edges, len(candidates)),
                           replace=False)
        edges.update(candidates[k] for k in picks)
    lines = [(min(e), max(e), float(rng.uniform(*R_range)))
             for e in sorted(edges, key=sorted)]
    C = rng.uniform(*C_range, size=n)
    return DcNetwork(tuple(C), tuple(lines))
