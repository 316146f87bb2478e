"""Closed-loop rollouts under ``u = -K x`` and named disturbance policies."""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .bellman import GainMatrix
from .exceptions import DimensionError, InvariantViolation

__all__ = ['WorstCase', 'ZeroDisturbance', 'RandomAdmissible', 'Trajectory',
           'InvarianceReport', 'closed_loop_step', 'simulate',
           'accumulated_cost', 'check_positive_invariance', 'trajectory_csv',
           'stage_cost']

# relative roundoff allowance in the admissibility checks
_ADMISSIBLE_RTOL = 1e-12


@dataclass(frozen=True)
class WorstCase:
    """Disturbance ``w = L x`` from the adversary gain."""

    L: GainMatrix
    name = 'worst'

    def __call__(self, x, inst, rng):
        return _matrix(self.L) @ x


@dataclass(frozen=True)
class ZeroDisturbance:
    name = 'zero'

    def __call__(self, x, inst, rng):
        return np.zeros(inst.l)


@dataclass(frozen=True)
class RandomAdmissible:
    """Each ``w_j`` uniform on ``[-(G x)_j, (G x)_j]``, seeded."""

    seed: int
    name = 'random'

    def __call__(self, x, inst, rng):
        bound = inst.G @ x
        return rng.uniform(-1.0, 1.0, size=inst.l) * bound


def _matrix(gain):
    return gain.matrix if isinstance(gain, GainMatrix) else np.asarray(gain, float)


def stage_cost(inst, x, u, w):
    return float(inst.s @ x + inst.r @ u - inst.gamma @ w)


def _check_admissible(name, v, bound):
    tol = _ADMISSIBLE_RTOL * (1.0 + np.max(np.abs(bound), initial=0.0))
    if np.any(np.abs(v) > bound + tol):
        i = int(np.argmax(np.abs(v) - bound))
        raise InvariantViolation(
            f"inadmissible {name}: |{name}[{i}]| = {abs(v[i])!r} exceeds "
            f"bound {bound[i]!r}")


def closed_loop_step(x, K, w_policy, inst, rng=None):
    """Advance ``x`` one step under ``u = -K x`` and ``w_policy``.

    Returns
    -------
    x_next, u, w, cost
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,):
        raise DimensionError(f"x has shape {x.shape}, expected ({inst.n},)",
                             ('x', 'A'))
    if np.any(x < 0):
        raise ValueError("closed-loop state must be nonnegative")
    if rng is None and isinstance(w_policy, RandomAdmissible):
        rng = np.random.default_rng(w_policy.seed)
    u = -(_matrix(K) @ x)
    w = np.asarray(w_policy(x, inst, rng), dtype=float)
    _check_admissible('u', u, inst.E @ x)
    _check_admissible('w', w, inst.G @ x)
    x_next = inst.A @ x + inst.B @ u + inst.F @ w
    return x_next, u, w, stage_cost(inst, x, u, w)


@dataclass(frozen=True)
class Trajectory:
    """States ``x(0..T)``, inputs, disturbances and stage costs ``(0..T-1)``."""

    states: np.ndarray
    inputs: np.ndarray
    disturbances: np.ndarray
    stage_costs: np.ndarray

    @property
    def horizon(self):
        return len(self.stage_costs)


def simulate(inst, K, w_policy, x0, T):
    """Roll out ``T`` closed-loop steps from ``x0``.

    ``RandomAdmissible`` policies draw from one generator seeded once, so
    a rollout is reproducible from ``(inst, K, policy, x0, T)``.
    """
    if int(T) != T or T < 1:
        raise ValueError(f"T must be a positive integer, got {T!r}")
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.shape != (inst.n,):
        raise DimensionError(f"x0 has shape {x.shape}, expected ({inst.n},)",
                             ('x0', 'A'))
    if np.any(x < 0):
        raise ValueError("x0 must be nonnegative")
    rng = (np.random.default_rng(w_policy.seed)
           if isinstance(w_policy, RandomAdmissible) else None)
    T = int(T)
    states = np.empty((T + 1, inst.n))
    inputs = np.empty((T, inst.m))
    dist = np.empty((T, inst.l))
    costs = np.empty(T)
    states[0] = x
    for t in range(T):
        x, inputs[t], dist[t], costs[t] = closed_loop_step(
            states[t], K, w_policy, inst, rng)
        # roundoff may push an exact zero slightly negative
        if np.any(x < 0):
            floor = -_ADMISSIBLE_RTOL * (1.0 + np.max(np.abs(states[t])))
            if np.any(x < floor):
                raise InvariantViolation(
                    f"state left the positive orthant at t={t + 1}: {x!r}")
            x = np.maximum(x, 0.0)
        states[t + 1] = x
    return Trajectory(states, inputs, dist, costs)


def accumulated_cost(traj):
    return float(np.sum(traj.stage_costs))


@dataclass(frozen=True)
class InvarianceReport:
    passed: bool
    min_entry: float
    trials: int
    steps: int


def check_positive_invariance(inst, x0, T, trials, seed, threshold=-1e-12):
    """Random admissible rollouts, tracking the smallest state entry.

    Inputs and disturbances are drawn uniformly from their boxes
    ``|u| <= E x`` and ``|w| <= G x`` with arbitrary signs, independent of
    any gain. No clipping is applied. Passes iff every state entry stays
    at or above ``threshold``.
    """
    rng = np.random.default_rng(seed)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (inst.n,):
        raise DimensionError(f"x0 has shape {x0.shape}, expected ({inst.n},)",
                             ('x0', 'A'))
    lowest = float(np.min(x0))
    for _ in range(int(trials)):
        x = x0.copy()
        for _ in range(int(T)):
            xp = np.maximum(x, 0.0)
            u = rng.uniform(-1.0, 1.0, size=inst.m) * (inst.E @ xp)
            w = rng.uniform(-1.0, 1.0, size=inst.l) * (inst.G @ xp)
            x = inst.A @ x + inst.B @ u + inst.F @ w
            lowest = min(lowest, float(np.min(x)))
    return InvarianceReport(lowest >= threshold, lowest, int(trials), int(T))


def trajectory_csv(traj):
    """CSV text ``t, x_1..x_n, u_1..u_m, w_1..w_l, stage_cost``.

    The final row carries only the terminal state.
    """
    n = traj.states.shape[1]
    m = traj.inputs.shape[1]
    l = traj.disturbances.shape[1]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(['t'] + [f'x_{i + 1}' for i in range(n)]
                    + [f'u_{i + 1}' for i in range(m)]
                    + [f'w_{i + 1}' for i in range(l)] + ['stage_cost'])
    T = traj.horizon
    for t in range(T + 1):
        row = [t] + [repr(float(v)) for v in traj.states[t]]
        if t < T:
            row += [repr(float(v)) for v in traj.inputs[t]]
            row += [repr(float(v)) for v in traj.disturbances[t]]
            row.append(repr(float(traj.stage_costs[t])))
        else:
            row += [''] * (m + l + 1)
        writer.writerow(row)
    return buf.getvalue()
