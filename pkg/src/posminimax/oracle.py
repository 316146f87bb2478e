"""Brute-force finite-horizon minimax dynamic programming.

This module recomputes ``J_k(x)`` by plain backward recursion

    J_0 = 0,    J_k(x) = min_u max_w [ g(x, u, w) + J_{k-1}(f(x, u, w)) ]

enumerating admissible inputs on a grid over the boxes ``|u| <= E x`` and
``|w| <= G x``. Nothing here uses the closed-form value vector or the
sign formulas for the gains; the recursion tree is evaluated in full. It is
exponential in ``k (m + l)`` on purpose and only meant to certify small
instances.

With the default two-point grid the search runs over box vertices. That is
exact as long as every ``J_{k-1}`` is affine on the reachable set, which is
what the closed-form solution asserts; the three-point grid (adds the box
centres) is a weaker cross-check of that argument.
"""

import itertools
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, LimitExceeded

__all__ = ['DpResult', 'LinearValueCheck', 'stage_minimax',
           'finite_horizon_dp', 'finite_horizon_values', 'verify_linear_value',
           'MAX_BITS', 'MAX_HORIZON', 'MAX_LEAVES']

MAX_BITS = 12
MAX_HORIZON = 8
MAX_LEAVES = 2 ** 26

# states evaluated per vectorized chunk
_CHUNK_STATES = 2 ** 18


@dataclass(frozen=True)
class DpResult:
    """Value of the ``horizon``-stage problem at one state.

    ``minimizer`` and ``maximizer`` are the root-stage ``u*`` and ``w*``
    (``None`` for horizon 0).
    """

    horizon: int
    value: float
    minimizer: np.ndarray = None
    maximizer: np.ndarray = None


LinearValueCheck = namedtuple('LinearValueCheck', ['passed', 'max_deviation'])


def _coefficients(dim, grid):
    if grid == 2:
        axis = (-1.0, 1.0)
    elif grid == 3:
        axis = (-1.0, 0.0, 1.0)
    else:
        raise ValueError(f"grid must be 2 or 3, got {grid!r}")
    return np.array(list(itertools.product(axis, repeat=dim))).reshape(-1, dim)


def _check_bits(inst, max_bits):
    if inst.m + inst.l > max_bits:
        raise LimitExceeded(
            f"enumeration needs m + l = {inst.m + inst.l} sign bits, above the "
            f"limit of {max_bits}; the brute-force oracle only certifies "
            "small instances")


def _as_states(x, inst):
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.ndim != 2 or X.shape[1] != inst.n:
        raise DimensionError(
            f"state has shape {np.shape(x)}, expected ({inst.n},)", ('x', 'A'))
    if np.any(X < 0):
        raise ValueError("states must be nonnegative")
    return X, single


def _stage(X, next_value, inst, cu, cw):
    """Vectorized min-max over the enumerated inputs for states ``X``."""
    N = X.shape[0]
    u = cu[None, :, :] * (X @ inst.E.T)[:, None, :]          # (N, Pu, m)
    w = cw[None, :, :] * (X @ inst.G.T)[:, None, :]          # (N, Pw, l)
    g = ((X @ inst.s)[:, None, None]
         + (u @ inst.r)[:, :, None]
         - (w @ inst.gamma)[:, None, :])                      # (N, Pu, Pw)
    total = g
    if next_value is not None:
        x_next = ((X @ inst.A.T)[:, None, None, :]
                  + (u @ inst.B.T)[:, :, None, :]
                  + (w @ inst.F.T)[:, None, :, :])            # (N, Pu, Pw, n)
        total = g + np.asarray(next_value(x_next.reshape(-1, inst.n)),
                               dtype=float).reshape(g.shape)
    iw = np.argmax(total, axis=2)                             # (N, Pu)
    worst = np.take_along_axis(total, iw[:, :, None], axis=2)[:, :, 0]
    iu = np.argmin(worst, axis=1)                             # (N,)
    rows = np.arange(N)
    value = worst[rows, iu]
    return u[rows, iu], w[rows, iw[rows, iu]], value


def stage_minimax(x, next_value, inst, grid=2, max_bits=MAX_BITS):
    """One minimax stage by exhaustive enumeration.

    Parameters
    ----------
    x : (n,) or (N, n) array_like
        Nonnegative state(s).
    next_value : callable or None
        Maps an ``(M, n)`` array of successor states to ``(M,)`` values.
        ``None`` stands for the zero terminal value.
    inst : ProblemInstance
    grid : {2, 3}
        Points per input axis: box vertices, or vertices plus centre.
    max_bits : int
        Refuse instances with ``m + l`` above this.

    Returns
    -------
    u_star, w_star, value
        Root minimizer, the maximizer answering it, and the stage value.
        Batched inputs give batched outputs. Ties resolve to the first
        enumerated point.
    """
    _check_bits(inst, max_bits)
    X, single = _as_states(x, inst)
    u, w, value = _stage(X, next_value, inst, _coefficients(inst.m, grid),
                         _coefficients(inst.l, grid))
    if single:
        return u[0], w[0], float(value[0])
    return u, w, value


class _Recursion:
    def __init__(self, inst, grid):
        self.inst = inst
        self.cu = _coefficients(inst.m, grid)
        self.cw = _coefficients(inst.l, grid)
        self.branching = len(self.cu) * len(self.cw)

    def values(self, X, k):
        if k == 0:
            return np.zeros(X.shape[0])
        per_state = self.branching ** k
        chunk = max(1, _CHUNK_STATES // per_state)
        out = np.empty(X.shape[0])
        for start in range(0, X.shape[0], chunk):
            part = X[start:start + chunk]
            out[start:start + chunk] = self._stage(part, k)[2]
        return out

    def _stage(self, X, k):
        next_value = None if k == 1 else (lambda Y: self.values(Y, k - 1))
        return _stage(X, next_value, self.inst, self.cu, self.cw)


def _check_limits(inst, k, grid, max_bits, max_horizon, max_leaves):
    if int(k) != k or k < 0:
        raise ValueError(f"horizon must be a nonnegative integer, got {k!r}")
    if k > max_horizon:
        raise LimitExceeded(
            f"horizon {k} exceeds the limit of {max_horizon}; raise "
            "max_horizon explicitly if the enumeration is affordable")
    _check_bits(inst, max_bits)
    leaves = (grid ** (inst.m + inst.l)) ** k
    if leaves > max_leaves:
        raise LimitExceeded(
            f"horizon {k} with m + l = {inst.m + inst.l} enumerates {leaves} "
            f"leaves per state, above the limit of {max_leaves}; use a "
            "shorter horizon")


def finite_horizon_values(inst, k, states, grid=2, max_bits=MAX_BITS,
                          max_horizon=MAX_HORIZON, max_leaves=MAX_LEAVES):
    """``J_k`` at each row of ``states`` by full tree recursion."""
    _check_limits(inst, k, grid, max_bits, max_horizon, max_leaves)
    X, _ = _as_states(states, inst)
    return _Recursion(inst, grid).values(X, int(k))


def finite_horizon_dp(inst, k, x, grid=2, max_bits=MAX_BITS,
                      max_horizon=MAX_HORIZON, max_leaves=MAX_LEAVES):
    """Value of the ``k``-stage minimax problem at state ``x``.

    Examples
    --------
    >>> from posminimax.model import ProblemInstance
    >>> inst = ProblemInstance.scalar(0.5, 0.3, 0.2, 0, 0, 1, 0, 0)
    >>> finite_horizon_dp(inst, 2, [1.0]).value
    1.5
    """
    _check_limits(inst, k, grid, max_bits, max_horizon, max_leaves)
    X, single = _as_states(x, inst)
    if not single:
        raise DimensionError("finite_horizon_dp takes a single state; "
                             "use finite_horizon_values for batches", ('x', 'A'))
    if k == 0:
        return DpResult(0, 0.0)
    rec = _Recursion(inst, grid)
    u, w, value = rec._stage(X, int(k))
    return DpResult(int(k), float(value[0]), u[0], w[0])


def verify_linear_value(inst, k, samples, tol=1e-9, p=None, **limits):
    """Compare brute-force ``J_k`` with the linear value ``p_k'x``.

    ``p_k`` comes from ``k`` value-iteration steps unless ``p`` is given.
    A sample passes when ``|J_k(x) - p'x| <= tol (1 + |J_k(x)|)``.

    Returns
    -------
    LinearValueCheck
        ``passed`` and the largest normalized deviation
        ``|J_k(x) - p'x| / (1 + |J_k(x)|)`` over the samples.
    """
    from .bellman import iterates

    if p is None:
        p = next(itertools.islice(iterates(inst), int(k), None))
    p = np.asarray(p, dtype=float)
    X, _ = _as_states(samples, inst)
    J = finite_horizon_values(inst, k, X, **limits)
    dev = np.abs(J - X @ p) / (1.0 + np.abs(J))
    worst = float(np.max(dev)) if dev.size else 0.0
    return LinearValueCheck(bool(worst <= tol), worst)
