"""Problem data, standing-condition checks and the JSON problem file format.

A problem instance collects the data of the minimax control problem

    inf_mu max_w  sum_t  s'x(t) + r'u(t) - gamma'w(t)
    x(t+1) = A x(t) + B u(t) + F w(t),   |u| <= E x,   |w| <= G x

with ``A`` (n x n), ``B`` (n x m), ``F`` (n x l), ``E`` (m x n) and
``G`` (l x n). Column ``i`` of ``B`` multiplies ``u_i``; row ``i`` of ``E``
bounds it.

Two conditions make the problem tractable and are checked here:

* positivity: ``A - |B| E - |F| G >= 0`` (the positive orthant is invariant
  under every admissible input and disturbance), and
* cost: ``s - E'|r| + G'|gamma| >= 0`` (worst-case stage cost is
  nonnegative).

Validation is never automatic. Instances violating either condition can be
built and serialized; solvers that need the conditions say so.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError, ProblemFormatError

__all__ = ['ProblemInstance', 'Violation', 'ConditionCheck',
           'ValidationReport', 'check_positivity_condition',
           'check_cost_condition', 'validate', 'load_problem',
           'dump_problem', 'problem_to_dict', 'problem_from_dict',
           'POSITIVITY', 'COST']

POSITIVITY = 'positivity'
COST = 'cost'

_MATRIX_FIELDS = ('A', 'B', 'F', 'E', 'G')
_VECTOR_FIELDS = ('s', 'r', 'gamma')
FIELDS = _MATRIX_FIELDS + _VECTOR_FIELDS


def _frozen(value, ndim, name):
    arr = np.array(value, dtype=float)
    if arr.ndim != ndim:
        kind = 'matrix' if ndim == 2 else 'vector'
        raise DimensionError(
            f"{name} must be a {kind} (got {arr.ndim}-dimensional data)",
            (name, name))
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Data of one minimax control problem.

    All arrays are copied to read-only float arrays on construction.
    ``E`` and ``G`` must be elementwise nonnegative; shapes must agree.

    Parameters
    ----------
    A : (n, n) array_like
    B : (n, m) array_like
    F : (n, l) array_like
    E : (m, n) array_like, nonnegative
    G : (l, n) array_like, nonnegative
    s : (n,) array_like
    r : (m,) array_like
    gamma : (l,) array_like
    """

    A: np.ndarray
    B: np.ndarray
    F: np.ndarray
    E: np.ndarray
    G: np.ndarray
    s: np.ndarray
    r: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        for name in _MATRIX_FIELDS:
            object.__setattr__(self, name, _frozen(getattr(self, name), 2, name))
        for name in _VECTOR_FIELDS:
            object.__setattr__(self, name, _frozen(getattr(self, name), 1, name))
        _check_shapes(self)
        for name in ('E', 'G'):
            bad = np.argwhere(getattr(self, name) < 0)
            if bad.size:
                i, j = bad[0]
                raise ValueError(
                    f"{name} must be elementwise nonnegative "
                    f"({name}[{i}, {j}] = {getattr(self, name)[i, j]!r})")

    @classmethod
    def scalar(cls, a, b, f, e, g, s, r, gamma):
        """Build an instance with n = m = l = 1 from plain numbers."""
        return cls([[a]], [[b]], [[f]], [[e]], [[g]], [s], [r], [gamma])

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def l(self):  # noqa: E743
        return self.F.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in FIELDS)

    __hash__ = None

    def __repr__(self):
        return f"ProblemInstance(n={self.n}, m={self.m}, l={self.l})"


def _check_shapes(inst):
    n = inst.A.shape[0]
    if n < 1 or inst.A.shape != (n, n):
        raise DimensionError(f"A must be square and nonempty, got {inst.A.shape}",
                             ('A', 'A'))
    m = inst.B.shape[1]
    l = inst.F.shape[1]
    if m < 1 or l < 1:
        raise DimensionError("B and F need at least one column", ('B', 'F'))
    expected = {
        'B': (('A', 'B'), (n, m), inst.B.shape),
        'F': (('A', 'F'), (n, l), inst.F.shape),
        'E': (('B', 'E'), (m, n), inst.E.shape),
        'G': (('F', 'G'), (l, n), inst.G.shape),
        's': (('A', 's'), (n,), inst.s.shape),
        'r': (('B', 'r'), (m,), inst.r.shape),
        'gamma': (('F', 'gamma'), (l,), inst.gamma.shape),
    }
    for name, (pair, want, got) in expected.items():
        if want != got:
            raise DimensionError(
                f"{pair[0]} and {pair[1]} are inconsistent: "
                f"{name} has shape {got}, expected {want}", pair)


@dataclass(frozen=True)
class Violation:
    """One entry where a condition fails.

    ``lhs`` is the entry of ``A`` (resp. ``s``) and ``bound`` the value it
    must dominate; ``margin = lhs - bound`` is negative.
    """

    condition: str
    index: tuple
    lhs: float
    bound: float

    @property
    def margin(self):
        return self.lhs - self.bound

    def to_dict(self):
        return {'condition': self.condition, 'index': list(self.index),
                'lhs': self.lhs, 'bound': self.bound, 'margin': self.margin}


@dataclass(frozen=True)
class ConditionCheck:
    """Elementwise evaluation of one condition with its margins."""

    condition: str
    margins: np.ndarray
    slack: float
    violations: tuple

    @property
    def ok(self):
        return not self.violations

    @property
    def min_margin(self):
        return float(np.min(self.margins)) if self.margins.size else np.inf


def _evaluate(condition, lhs, bound, slack):
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    margins = lhs - bound
    margins.setflags(write=False)
    violations = tuple(
        Violation(condition, tuple(int(i) for i in idx),
                  float(lhs[tuple(idx)]), float(bound[tuple(idx)]))
        for idx in np.argwhere(margins < -slack))
    return ConditionCheck(condition, margins, float(slack), violations)


def check_positivity_condition(inst, slack=0.0):
    """Evaluate ``A >= |B| E + |F| G`` elementwise.

    Parameters
    ----------
    inst : ProblemInstance
    slack : float, optional
        Absolute tolerance; an entry fails only if its margin is below
        ``-slack``.

    Returns
    -------
    ConditionCheck
        Margins ``A - |B| E - |F| G`` and the list of failing entries.
    """
    bound = np.abs(inst.B) @ inst.E + np.abs(inst.F) @ inst.G
    return _evaluate(POSITIVITY, np.array(inst.A), bound, slack)


def check_cost_condition(inst, slack=0.0):
    """Evaluate ``s >= E'|r| - G'|gamma|`` elementwise."""
    bound = inst.E.T @ np.abs(inst.r) - inst.G.T @ np.abs(inst.gamma)
    return _evaluate(COST, np.array(inst.s), bound, slack)


@dataclass(frozen=True)
class ValidationReport:
    """Combined outcome of the shape, positivity and cost checks."""

    dim_ok: bool
    positivity_ok: bool
    cost_ok: bool
    violations: list = field(default_factory=list)
    min_margins: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.dim_ok and self.positivity_ok and self.cost_ok

    def to_dict(self):
        return {
            'ok': self.ok,
            'dim_ok': self.dim_ok,
            'positivity_ok': self.positivity_ok,
            'cost_ok': self.cost_ok,
            'min_margins': dict(self.min_margins),
            'violations': [v.to_dict() for v in self.violations],
        }


def report_from_checks(*checks):
    """Merge :class:`ConditionCheck` results into a :class:`ValidationReport`."""
    by_name = {c.condition: c for c in checks}
    violations = [v for c in checks for v in c.violations]
    return ValidationReport(
        dim_ok=True,
        positivity_ok=by_name[POSITIVITY].ok if POSITIVITY in by_name else True,
        cost_ok=by_name[COST].ok if COST in by_name else True,
        violations=violations,
        min_margins={c.condition: c.min_margin for c in checks})


def validate(inst, slack=0.0):
    """Run both standing-condition checks on ``inst``."""
    return report_from_checks(check_positivity_condition(inst, slack),
                              check_cost_condition(inst, slack))


# -- file format -------------------------------------------------------------

def problem_to_dict(inst):
    return {k: getattr(inst, k).tolist() for k in FIELDS}


def problem_from_dict(data):
    """Build an instance from a mapping with the problem-file keys.

    Unknown keys trigger a warning. Missing keys, non-numeric entries and
    ragged rows raise :class:`ProblemFormatError`; shape mismatches raise
    :class:`DimensionError`.
    """
    if not isinstance(data, dict):
        raise ProblemFormatError("problem must be a JSON object")
    for key in sorted(set(data) - set(FIELDS)):
        warnings.warn(f"ignoring unknown problem key {key!r}", stacklevel=3)
    values = {}
    for key in FIELDS:
        if key not in data:
            raise ProblemFormatError(f"missing field {key!r}", field=key)
        ndim = 2 if key in _MATRIX_FIELDS else 1
        values[key] = _parse_array(data[key], ndim, key)
    for key in ('E', 'G'):
        bad = np.argwhere(values[key] < 0)
        if bad.size:
            i, j = bad[0]
            raise ProblemFormatError(
                f"{key} must satisfy {key} >= 0 elementwise; "
                f"{key}[{i}][{j}] = {values[key][i, j]!r}", field=key)
    return ProblemInstance(**values)


def _parse_array(raw, ndim, key):
    kind = 'matrix (array of row arrays)' if ndim == 2 else 'flat array'
    if not isinstance(raw, list):
        raise ProblemFormatError(f"field {key!r} must be a {kind}", field=key)
    rows = raw if ndim == 2 else [raw]
    for row in rows:
        if not isinstance(row, list):
            raise ProblemFormatError(f"field {key!r} must be a {kind}", field=key)
        for v in row:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ProblemFormatError(
                    f"field {key!r} has non-numeric entry {v!r}", field=key)
    if ndim == 2 and len({len(row) for row in rows}) > 1:
        raise ProblemFormatError(f"field {key!r} has rows of unequal length",
                                 field=key)
    arr = np.array(raw, dtype=float)
    if ndim == 2 and arr.ndim == 1:
        arr = arr.reshape(len(raw), 0)
    return arr


def load_problem(text):
    """Parse problem-file text into a :class:`ProblemInstance`.

    The standing conditions are *not* checked; call :func:`validate`.

    Examples
    --------
    >>> inst = load_problem('{"A": [[0.9]], "B": [[0.2]], "F": [[0.1]],'
    ...     ' "E": [[1]], "G": [[1]], "s": [1], "r": [0.1], "gamma": [0.05]}')
    >>> inst.n, inst.m, inst.l
    (1, 1, 1)
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}",
            line=exc.lineno) from None
    return problem_from_dict(data)


def dump_problem(inst, indent=None):
    """Serialize ``inst`` to problem-file text (round-trips exactly)."""
    return json.dumps(problem_to_dict(inst), indent=indent)
