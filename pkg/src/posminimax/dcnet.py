"""Voltage control problems on resistive DC networks.

Bus ``i`` has capacitance ``C_i`` and lines carry conductance ``1/R_ij``::

    C dV/dt = -L_R V + u + w

with ``L_R`` the conductance-weighted graph Laplacian. An explicit Euler
step of length ``h`` gives ``A = I - h C^-1 L_R`` and ``B = F = h C^-1``.
Controls and disturbances live on the buses, so ``E`` and ``G`` are
``n x n``.

Node indices are 0-based in Python and 1-based in network files.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (DimensionError, InfeasibleProblemError,
                         ProblemFormatError, StructuralInfeasibilityError)
from .model import (POSITIVITY, ProblemInstance, check_cost_condition,
                    check_positivity_condition, report_from_checks,
                    _evaluate)

__all__ = ['Line', 'DcNetwork', 'DiscretizedSystem', 'build_laplacian',
           'discretize', 'max_step_size', 'structural_violations',
           'check_network_condition', 'assemble_problem', 'load_network',
           'dump_network']


@dataclass(frozen=True)
class Line:
    i: int
    j: int
    R: float


@dataclass(frozen=True)
class DcNetwork:
    """Buses with capacitances and resistive lines between them.

    Parallel lines are rejected rather than merged; combine them into one
    equivalent resistance before building the network.
    """

    capacitances: tuple
    lines: tuple = ()

    def __post_init__(self):
        C = tuple(float(c) for c in np.atleast_1d(self.capacitances))
        if not C:
            raise ValueError("network needs at least one bus")
        if any(not (c > 0 and math.isfinite(c)) for c in C):
            raise ValueError("capacitances must be positive and finite")
        lines = []
        seen = set()
        for line in self.lines:
            i, j, R = (line.i, line.j, line.R) if isinstance(line, Line) else line
            if int(i) != i or int(j) != j:
                raise ValueError(f"line endpoints must be integers: {(i, j)}")
            i, j, R = int(i), int(j), float(R)
            if not (0 <= i < len(C) and 0 <= j < len(C)):
                raise ValueError(f"line ({i}, {j}) refers to a missing bus")
            if i == j:
                raise ValueError(f"self-loop at bus {i}")
            if not (R > 0 and math.isfinite(R)):
                raise ValueError(f"line ({i}, {j}) needs a positive resistance")
            key = frozenset((i, j))
            if key in seen:
                raise ValueError(
                    f"parallel line between buses {i} and {j}; combine "
                    "parallel lines into one equivalent resistance")
            seen.add(key)
            lines.append(Line(i, j, R))
        object.__setattr__(self, 'capacitances', C)
        object.__setattr__(self, 'lines', tuple(lines))

    @property
    def n(self):
        return len(self.capacitances)

    def adjacency(self):
        """Conductance matrix ``1/R_ij`` (0 where no line)."""
        W = np.zeros((self.n, self.n))
        for line in self.lines:
            W[line.i, line.j] = W[line.j, line.i] = 1.0 / line.R
        return W


@dataclass(frozen=True)
class DiscretizedSystem:
    A: np.ndarray
    B: np.ndarray
    F: np.ndarray
    h: float


def build_laplacian(net):
    """Conductance-weighted Laplacian of the line graph.

    >>> build_laplacian(DcNetwork([1, 1], [(0, 1, 2.0)]))
    array([[ 0.5, -0.5],
           [-0.5,  0.5]])
    """
    W = net.adjacency()
    return np.diag(W.sum(axis=1)) - W


def _step_matrices(net, h):
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"step size must be positive and finite, got {h!r}")
    scale = h / np.asarray(net.capacitances)
    A = np.eye(net.n) - scale[:, None] * build_laplacian(net)
    return A, scale


def discretize(net, h):
    """Explicit Euler discretization with step ``h``."""
    A, scale = _step_matrices(net, h)
    B = np.diag(scale)
    return DiscretizedSystem(A, B, B.copy(), float(h))


def _square(net, E, G):
    E = np.asarray(E, dtype=float)
    G = np.asarray(G, dtype=float)
    for name, M in (('E', E), ('G', G)):
        if M.shape != (net.n, net.n):
            raise DimensionError(
                f"{name} must be {net.n}x{net.n} for a network with "
                f"{net.n} buses, got {M.shape}", (name, 'capacitances'))
        if np.any(M < 0):
            raise ValueError(f"{name} must be elementwise nonnegative")
    return E, G


def structural_violations(net, E, G):
    """Off-diagonal entries with ``e_ij + g_ij > 1/R_ij``.

    Where no line joins ``i`` and ``j`` the bound is 0, so any nonzero
    entry there is reported. These conditions do not depend on ``h``.

    Returns
    -------
    list of (i, j, value, bound), 0-based
    """
    E, G = _square(net, E, G)
    W = net.adjacency()
    total = E + G
    bad = []
    for i in range(net.n):
        for j in range(net.n):
            if i != j and total[i, j] > W[i, j]:
                bad.append((i, j, float(total[i, j]), float(W[i, j])))
    return bad


def max_step_size(net, E, G):
    """Largest ``h`` satisfying the diagonal positivity conditions.

    ``h_max = min_i C_i / (e_ii + g_ii + sum_j 1/R_ij)``; ``inf`` when every
    denominator vanishes (isolated buses with ``E = G = 0``).

    Raises
    ------
    StructuralInfeasibilityError
        If an off-diagonal entry of ``E + G`` exceeds the line conductance,
        in which case no step size helps.
    """
    E, G = _square(net, E, G)
    bad = structural_violations(net, E, G)
    if bad:
        listing = ', '.join(f"({i + 1},{j + 1})" for i, j, _, _ in bad)
        raise StructuralInfeasibilityError(
            f"E + G must inherit the zero pattern of the network Laplacian "
            f"and stay below the line conductances; failing entries "
            f"(1-based): {listing}", bad)
    denom = np.diag(E) + np.diag(G) + net.adjacency().sum(axis=1)
    C = np.asarray(net.capacitances)
    with np.errstate(divide='ignore'):
        bounds = np.where(denom > 0, C / np.where(denom > 0, denom, 1.0), np.inf)
    return float(np.min(bounds))


def check_network_condition(net, h, E, G, slack=0.0):
    """Evaluate ``I - h C^-1 L_R >= h C^-1 E + h C^-1 G`` elementwise.

    Computed from the network data directly; it agrees with
    :func:`~posminimax.model.check_positivity_condition` on the assembled
    instance.
    """
    E, G = _square(net, E, G)
    lhs, scale = _step_matrices(net, h)
    rhs = scale[:, None] * E + scale[:, None] * G
    return report_from_checks(_evaluate(POSITIVITY, lhs, rhs, slack))


def assemble_problem(net, h, E, G, s, r, gamma, slack=0.0):
    """Problem instance for voltage control on ``net`` with step ``h``.

    Raises
    ------
    InfeasibleProblemError
        If the positivity or the cost condition fails; the merged report is
        attached.
    """
    E, G = _square(net, E, G)
    sysd = discretize(net, h)
    inst = ProblemInstance(sysd.A, sysd.B, sysd.F, E, G, s, r, gamma)
    report = report_from_checks(check_positivity_condition(inst, slack),
                                check_cost_condition(inst, slack))
    if not report.ok:
        failed = [name for name, ok in (('positivity', report.positivity_ok),
                                        ('cost', report.cost_ok)) if not ok]
        raise InfeasibleProblemError(
            f"assembled problem violates the {' and '.join(failed)} "
            "condition", report)
    return inst


# -- file format -------------------------------------------------------------

def network_from_dict(data):
    if not isinstance(data, dict):
        raise ProblemFormatError("network must be a JSON object")
    for key in ('capacitances', 'lines'):
        if key not in data:
            raise ProblemFormatError(f"missing field {key!r}", field=key)
    if not isinstance(data['lines'], list):
        raise ProblemFormatError("'lines' must be an array", field='lines')
    lines = []
    for k, entry in enumerate(data['lines']):
        if not isinstance(entry, dict) or not {'i', 'j', 'R'} <= set(entry):
            raise ProblemFormatError(
                f"line {k} must be an object with keys i, j, R", field='lines')
        i, j = entry['i'], entry['j']
        if not (isinstance(i, int) and isinstance(j, int)) or i < 1 or j < 1:
            raise ProblemFormatError(
                f"line {k}: bus indices are 1-based integers", field='lines')
        lines.append((i - 1, j - 1, entry['R']))
    try:
        return DcNetwork(tuple(data['capacitances']), tuple(lines))
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(str(exc)) from None


def load_network(text):
    """Parse network-file text (1-based bus indices)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}",
            line=exc.lineno) from None
    return network_from_dict(data)


def dump_network(net):
    return json.dumps({
        'capacitances': list(net.capacitances),
        'lines': [{'i': ln.i + 1, 'j': ln.j + 1, 'R': ln.R} for ln in net.lines],
    })
