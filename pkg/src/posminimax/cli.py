"""Command-line front end.

Every command prints a JSON report on stdout. Exit codes:

    0  success / converged / check passed
    1  a standing condition or a verification failed
    2  bad input, parse error, or an enumeration limit
    3  value iteration diverged (the problem has infinite value)
    4  value iteration hit max_iter without converging or diverging
"""

import argparse
import json
import sys
import warnings

import numpy as np

from . import bellman, dcnet, model, oracle, simulate as sim
from .exceptions import (DimensionError, InfeasibleProblemError,
                         LimitExceeded, ProblemFormatError,
                         StructuralInfeasibilityError)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_DIVERGED = 3
EXIT_MAX_ITER = 4

_STATUS_EXIT = {
    bellman.Status.CONVERGED: EXIT_OK,
    bellman.Status.DIVERGED: EXIT_DIVERGED,
    bellman.Status.MAX_ITERATIONS: EXIT_MAX_ITER,
}


class InputError(Exception):
    pass


def _emit(report, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(report, sort_keys=True, indent=2) + '\n')


def _read(path):
    try:
        with open(path, encoding='utf-8') as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, text):
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        fh.write(text)


def _load_problem(path):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        inst = model.load_problem(_read(path))
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return inst


def _vector(text, n, name):
    try:
        vals = [float(v) for v in text.split(',')]
    except ValueError:
        raise InputError(f"{name} must be comma-separated numbers") from None
    if len(vals) == 1 and n > 1:
        vals = vals * n
    if len(vals) != n:
        raise InputError(f"{name} needs {n} entries, got {len(vals)}")
    return np.array(vals)


def _positive(kind):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return value
    return parse


def _nonneg_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {text!r}")
    return value


def _solve(inst, args):
    return bellman.value_iterate(inst, tol=args.tol, max_iter=args.max_iter,
                                 cap=args.cap)


# -- commands ----------------------------------------------------------------

def cmd_validate(args):
    report = model.validate(_load_problem(args.problem), slack=args.slack)
    _emit(report.to_dict())
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_synth(args):
    inst = _load_problem(args.problem)
    check = model.validate(inst)
    if not check.ok:
        _emit({'validation': check.to_dict()})
        return EXIT_VIOLATION
    result = _solve(inst, args)
    report = result.to_dict()
    report['K'] = report['L'] = None
    if result.converged:
        report['K'] = bellman.synthesize_gain(result.value, inst).matrix.tolist()
        report['L'] = bellman.adversary_gain(result.value, inst).matrix.tolist()
        if args.x0 is not None:
            x0 = _vector(args.x0, inst.n, '--x0')
            report['x0'] = x0.tolist()
            report['optimal_cost'] = bellman.optimal_cost(result.value, x0)
    if args.out:
        _write(args.out, json.dumps(report, sort_keys=True, indent=2) + '\n')
    _emit(report)
    return _STATUS_EXIT[result.status]


def _gains_from_report(path, inst):
    try:
        data = json.loads(_read(path))
        p = np.array(data['p'], dtype=float)
        K = np.array(data['K'], dtype=float)
        L = np.array(data['L'], dtype=float)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ProblemFormatError(
            f"gain file {path} must be a converged synth report with "
            f"p, K and L ({exc})") from None
    if (p.shape != (inst.n,) or K.shape != (inst.m, inst.n)
            or L.shape != (inst.l, inst.n)):
        raise DimensionError(f"gain file {path} does not match the problem",
                             ('gain', 'problem'))
    return p, K, L


def cmd_simulate(args):
    inst = _load_problem(args.problem)
    if args.horizon < 1:
        raise InputError("--horizon must be at least 1 for simulate")
    if args.policy == 'random' and args.seed is None:
        raise InputError("--seed is required for the random policy")
    if args.gain:
        p, K, L = _gains_from_report(args.gain, inst)
    else:
        check = model.validate(inst)
        if not check.ok:
            _emit({'validation': check.to_dict()})
            return EXIT_VIOLATION
        result = _solve(inst, args)
        if not result.converged:
            _emit({'status': str(result.status),
                   'synth': result.to_dict()})
            return _STATUS_EXIT[result.status]
        p = result.p
        K = bellman.synthesize_gain(p, inst).matrix
        L = bellman.adversary_gain(p, inst).matrix
    policy = {'worst': lambda: sim.WorstCase(L),
              'zero': sim.ZeroDisturbance,
              'random': lambda: sim.RandomAdmissible(args.seed)}[args.policy]()
    x0 = (_vector(args.x0, inst.n, '--x0') if args.x0 is not None
          else np.ones(inst.n))
    traj = sim.simulate(inst, K, policy, x0, args.horizon)
    values = traj.states @ p
    step_err = np.abs(traj.stage_costs + values[1:] - values[:-1])
    total = sim.accumulated_cost(traj)
    summary = {
        'policy': args.policy,
        'horizon': args.horizon,
        'x0': x0.tolist(),
        'accumulated_cost': total,
        'optimal_cost': float(values[0]),
        'terminal_value': float(values[-1]),
        'telescoping_max_error': float(np.max(step_err)),
        'telescoping_total_error': abs(total + float(values[-1])
                                       - float(values[0])),
    }
    if args.out:
        _write(args.out, sim.trajectory_csv(traj))
        summary['csv'] = args.out
    _emit(summary)
    return EXIT_OK


def cmd_oracle_check(args):
    inst = _load_problem(args.problem)
    check = model.validate(inst)
    if not check.ok:
        _emit({'validation': check.to_dict()})
        return EXIT_VIOLATION
    if args.seed is None:
        raise InputError("--seed is required for oracle-check")
    rng = np.random.default_rng(args.seed)
    samples = rng.uniform(0.0, 10.0, size=(args.samples, inst.n))
    result = oracle.verify_linear_value(inst, args.horizon, samples,
                                        tol=args.tol)
    _emit({'passed': result.passed, 'max_deviation': result.max_deviation,
           'horizon': args.horizon, 'samples': args.samples,
           'seed': args.seed, 'tol': args.tol})
    return EXIT_OK if result.passed else EXIT_VIOLATION


def cmd_dcnet(args):
    net = dcnet.load_network(_read(args.network))
    design = {}
    if args.design:
        try:
            design = json.loads(_read(args.design))
        except json.JSONDecodeError as exc:
            raise ProblemFormatError(
                f"{args.design}: line {exc.lineno}, column {exc.colno}: "
                f"{exc.msg}") from None
        if not isinstance(design, dict):
            raise ProblemFormatError("design must be a JSON object")
    zeros = np.zeros((net.n, net.n))
    E = np.array(design.get('E', zeros), dtype=float)
    G = np.array(design.get('G', zeros), dtype=float)
    h = args.h if args.h is not None else design.get('h')

    report = {'n': net.n}
    structural = dcnet.structural_violations(net, E, G)
    report['structural_violations'] = [
        {'index': [i + 1, j + 1], 'value': v, 'bound': b}
        for i, j, v, b in structural]
    if structural:
        report['feasible'] = False
        _emit(report)
        return EXIT_VIOLATION
    if args.hmax:
        h_max = dcnet.max_step_size(net, E, G)
        report['h_max'] = None if np.isinf(h_max) else h_max
        report['h_max_unbounded'] = bool(np.isinf(h_max))
    if h is None:
        if not args.hmax:
            raise InputError("give a step size with --h or in the design "
                             "file, or request --hmax")
        _emit(report)
        return EXIT_OK

    report['h'] = float(h)
    missing = [k for k in ('s', 'r', 'gamma') if k not in design]
    if missing:
        raise ProblemFormatError(
            f"design is missing {', '.join(missing)} needed to assemble "
            "the problem", field=missing[0])
    try:
        inst = dcnet.assemble_problem(net, float(h), E, G, design['s'],
                                      design['r'], design['gamma'])
    except InfeasibleProblemError as exc:
        report['feasible'] = False
        report['validation'] = exc.report.to_dict()
        _emit(report)
        return EXIT_VIOLATION
    report['feasible'] = True
    report['validation'] = model.validate(inst).to_dict()
    text = model.dump_problem(inst, indent=2) + '\n'
    if args.out:
        _write(args.out, text)
        report['problem_file'] = args.out
    else:
        report['problem'] = model.problem_to_dict(inst)
    _emit(report)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _add_solver_flags(p):
    p.add_argument('--tol', type=_positive(float), default=bellman.DEFAULT_TOL)
    p.add_argument('--max-iter', type=_positive(int),
                   default=bellman.DEFAULT_MAX_ITER)
    p.add_argument('--cap', type=_positive(float), default=bellman.DEFAULT_CAP)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='posminimax',
        description="Minimax optimal control of positive linear systems.")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('validate', help="check the standing conditions")
    p.add_argument('problem')
    p.add_argument('--slack', type=float, default=0.0)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser('synth', help="value iteration and gain synthesis")
    p.add_argument('problem')
    _add_solver_flags(p)
    p.add_argument('--x0', help="initial state, comma-separated")
    p.add_argument('--out', help="also write the report to this file")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('simulate', help="closed-loop rollout")
    p.add_argument('problem')
    _add_solver_flags(p)
    p.add_argument('--gain', help="synth report to take p, K and L from")
    p.add_argument('--policy', choices=('worst', 'zero', 'random'),
                   default='worst')
    p.add_argument('--horizon', type=_nonneg_int, default=50)
    p.add_argument('--seed', type=int)
    p.add_argument('--x0', help="initial state, comma-separated (default ones)")
    p.add_argument('--out', help="trajectory CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('oracle-check',
                       help="compare with brute-force dynamic programming")
    p.add_argument('problem')
    p.add_argument('--horizon', type=_nonneg_int, default=4)
    p.add_argument('--samples', type=_positive(int), default=10)
    p.add_argument('--seed', type=int)
    p.add_argument('--tol', type=_positive(float), default=1e-9)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser('dcnet', help="assemble a DC network problem")
    p.add_argument('network')
    p.add_argument('--design', help="JSON with E, G, s, r, gamma and "
                                    "optionally h")
    p.add_argument('--h', type=_positive(float))
    p.add_argument('--hmax', action='store_true',
                   help="report the largest feasible step size")
    p.add_argument('--out', help="problem file path")
    p.set_defaults(func=cmd_dcnet)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ProblemFormatError, DimensionError, LimitExceeded,
            StructuralInfeasibilityError, ValueError) as exc:
        _emit({'error': type(exc).__name__, 'message': str(exc)})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
