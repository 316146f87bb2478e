"""Value iteration for the linear value vector and gain synthesis.

Under the positivity and cost conditions the optimal cost-to-go is linear,
``J(x) = p'x``, and value iteration acts directly on ``p``::

    p_{k+1} = s + A'p_k - E'|r + B'p_k| + G'|-gamma + F'p_k|,   p_0 = 0.

The sequence is nondecreasing. If it has a finite limit ``p``, the optimal
feedback is ``u = -K x`` with row ``i`` of ``K`` equal to
``sign(r_i + p'B_i) E_i`` and the worst disturbance is ``w = L x`` with row
``j`` of ``L`` equal to ``sign(-gamma_j + p'F_j) G_j``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError, InvariantViolation

__all__ = ['Status', 'ValueVector', 'IterationResult', 'GainMatrix',
           'bellman_step', 'bellman_residual', 'value_iterate',
           'iterates', 'synthesize_gain', 'adversary_gain', 'optimal_cost',
           'residual_bound', 'DEFAULT_TOL', 'DEFAULT_MAX_ITER', 'DEFAULT_CAP']

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
DEFAULT_CAP = 1e12

# roundoff allowance for the nonnegativity canary in bellman_step
_NEG_RTOL = 1e-12


class Status(enum.Enum):
    CONVERGED = 'Converged'
    DIVERGED = 'Diverged'
    MAX_ITERATIONS = 'MaxIterationsReached'

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ValueVector:
    """Linear value ``p`` with the iteration that produced it.

    ``residual`` is the infinity norm of the last step change
    ``p_k - p_{k-1}`` (0 for ``iterations == 0``).
    """

    p: np.ndarray
    iterations: int = 0
    residual: float = 0.0

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 1:
            raise DimensionError("p must be a vector", ('p', 'p'))
        p.setflags(write=False)
        object.__setattr__(self, 'p', p)


@dataclass(frozen=True)
class IterationResult:
    status: Status
    value: ValueVector
    tol: float
    cap: float
    history: list = field(default=None)

    @property
    def converged(self):
        return self.status is Status.CONVERGED

    @property
    def p(self):
        return self.value.p

    def to_dict(self):
        out = {'status': str(self.status), 'p': self.value.p.tolist(),
               'iterations': self.value.iterations,
               'residual_inf_norm': self.value.residual,
               'tol': self.tol, 'cap': self.cap}
        if self.history is not None:
            out['history'] = list(self.history)
        return out


@dataclass(frozen=True)
class GainMatrix:
    """A sign-patterned copy of a bound matrix.

    Row ``i`` of ``matrix`` is ``signs[i] * bound[i]``, so ``|matrix|``
    equals the bound matrix exactly and shares its zero pattern.
    """

    matrix: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        for name in ('matrix', 'signs'):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, x):
        return self.matrix @ x

    def to_dict(self):
        return {'matrix': self.matrix.tolist(), 'signs': self.signs.tolist()}


def _as_p(p, inst):
    if isinstance(p, ValueVector):
        p = p.p
    p = np.asarray(p, dtype=float)
    if p.shape != (inst.n,):
        raise DimensionError(
            f"p has shape {p.shape}, expected ({inst.n},) to match A",
            ('p', 'A'))
    return p


def _bellman_map(p, inst):
    return (inst.s + inst.A.T @ p
            - inst.E.T @ np.abs(inst.r + inst.B.T @ p)
            + inst.G.T @ np.abs(-inst.gamma + inst.F.T @ p))


def bellman_step(p, inst):
    """Apply one value-iteration step to ``p``.

    Parameters
    ----------
    p : (n,) array_like or ValueVector
        Current nonnegative value vector.
    inst : ProblemInstance
        Instance satisfying the positivity and cost conditions.

    Returns
    -------
    ndarray
        ``s + A'p - E'|r + B'p| + G'|-gamma + F'p|``.

    Raises
    ------
    InvariantViolation
        If the result has a negative entry beyond roundoff. This only
        happens for instances that fail the standing conditions.
    """
    p = _as_p(p, inst)
    out = _bellman_map(p, inst)
    floor = -_NEG_RTOL * (1.0 + np.max(np.abs(p), initial=0.0)
                          + np.max(np.abs(inst.s)))
    if np.any(out < floor):
        i = int(np.argmin(out))
        raise InvariantViolation(
            f"value iterate became negative (p[{i}] = {out[i]!r}); "
            "the instance probably violates the positivity or cost condition")
    return out


def bellman_residual(p, inst):
    """Return ``p - (s + A'p - E'|r + B'p| + G'|-gamma + F'p|)``.

    The residual vanishes exactly when ``p`` is a fixed point.
    """
    p = _as_p(p, inst)
    return p - _bellman_map(p, inst)


def iterates(inst):
    """Yield the value-iteration sequence ``p_0 = 0, p_1, p_2, ...``.

    The exact sequence is nondecreasing. Once it reaches its floating-point
    fixed point the raw map can wobble by an ulp, so decreases within
    roundoff are clamped to the previous iterate; a larger decrease raises
    :class:`InvariantViolation`.
    """
    p = np.zeros(inst.n)
    while True:
        yield p
        nxt = bellman_step(p, inst)
        drop = p - nxt
        if np.any(drop > 0):
            allowed = _NEG_RTOL * (1.0 + np.max(np.abs(p)))
            if np.max(drop) > allowed:
                i = int(np.argmax(drop))
                raise InvariantViolation(
                    f"value iterate decreased at entry {i} by {drop[i]!r}; "
                    "the instance probably violates a standing condition")
            nxt = np.maximum(nxt, p)
        p = nxt


def value_iterate(inst, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                  cap=DEFAULT_CAP, record_history=False):
    """Iterate :func:`bellman_step` from ``p_0 = 0``.

    Stops when the step change ``||p_k - p_{k-1}||_inf <= tol``
    (converged), when ``||p_k||_inf > cap`` (diverged), or after
    ``max_iter`` steps. Divergence is a legitimate outcome (the problem has
    infinite value) and is reported through ``status``, never raised.

    Parameters
    ----------
    inst : ProblemInstance
    tol : float, optional
        Step-change tolerance, default 1e-10.
    max_iter : int, optional
        Default 100000.
    cap : float, optional
        Divergence threshold on ``||p||_inf``, default 1e12.
    record_history : bool, optional
        Keep the step-change norm of every iteration.

    Returns
    -------
    IterationResult
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if not cap > 0:
        raise ValueError(f"cap must be positive, got {cap!r}")
    if int(max_iter) < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter!r}")

    seq = iterates(inst)
    p = next(seq)
    history = [] if record_history else None
    status = Status.MAX_ITERATIONS
    step = 0.0
    k = 0
    while k < max_iter:
        p_next = next(seq)
        k += 1
        step = float(np.max(p_next - p))
        p = p_next
        if history is not None:
            history.append(step)
        if np.max(p) > cap:
            status = Status.DIVERGED
            break
        if step <= tol:
            status = Status.CONVERGED
            break
    return IterationResult(status, ValueVector(p, k, step), tol, cap, history)


def residual_bound(inst, tol):
    """Acceptance bound on ``||bellman_residual(p)||_inf`` after convergence.

    ``2 tol (1 + ||A|| + ||E|| ||B|| + ||G|| ||F||)`` with infinity norms.
    """
    norm = lambda M: np.linalg.norm(M, np.inf)  # noqa: E731
    return 2.0 * tol * (1.0 + norm(inst.A) + norm(inst.E) * norm(inst.B)
                        + norm(inst.G) * norm(inst.F))


def _signed_rows(arg, bound):
    # sign(0) := +1; both choices are optimal at a tie
    signs = np.where(arg >= 0, 1.0, -1.0)
    return GainMatrix(signs[:, None] * bound, signs)


def synthesize_gain(p, inst):
    """Optimal feedback gain ``K`` for the control ``u = -K x``.

    Row ``i`` is ``sign(r_i + p'B_i) E_i`` with ``sign(0) = +1``.

    Examples
    --------
    >>> from posminimax.model import ProblemInstance
    >>> inst = ProblemInstance.scalar(0.9, 0.2, 0.1, 1, 1, 1, 0.1, 0.05)
    >>> synthesize_gain([4.25], inst).matrix
    array([[1.]])
    """
    p = _as_p(p, inst)
    return _signed_rows(inst.r + inst.B.T @ p, inst.E)


def adversary_gain(p, inst):
    """Worst-case disturbance gain ``L`` for ``w = L x``.

    Row ``j`` is ``sign(-gamma_j + p'F_j) G_j`` with ``sign(0) = +1``.
    """
    p = _as_p(p, inst)
    return _signed_rows(-inst.gamma + inst.F.T @ p, inst.G)


def optimal_cost(p, x0):
    """Optimal worst-case cost ``p'x0`` from a nonnegative initial state."""
    if isinstance(p, ValueVector):
        p = p.p
    p = np.asarray(p, dtype=float)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != p.shape:
        raise DimensionError(f"x0 has shape {x0.shape}, p has {p.shape}",
                             ('x0', 'p'))
    if np.any(x0 < 0):
        raise ValueError("x0 must be nonnegative; the linear value only "
                         "holds on the positive orthant")
    return float(p @ x0)
