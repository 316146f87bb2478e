import csv
import json

import numpy as np
import pytest

from posminimax.cli import main
from posminimax.model import ProblemInstance, dump_problem, load_problem

S1 = ProblemInstance.scalar(0.9, 0.2, 0.1, 1, 1, 1, 0.1, 0.05)
S0 = ProblemInstance.scalar(0.5, 0.3, -0.7, 0, 0, 1, 0, 0)
SD = ProblemInstance.scalar(1.1, 0, 0, 0, 0, 1, 0, 0)
BAD = ProblemInstance.scalar(0.2, 0.2, 0.1, 1, 1, 1, 0, 0)


@pytest.fixture
def write(tmp_path):
    def _write(name, content):
        path = tmp_path / name
        if isinstance(content, ProblemInstance):
            content = dump_problem(content)
        elif not isinstance(content, str):
            content = json.dumps(content)
        path.write_text(content)
        return str(path)
    return _write


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestValidate:
    def test_ok(self, capsys, write):
        code, report = run(capsys, 'validate', write('s1.json', S1))
        assert code == 0
        assert report['positivity_ok'] and report['cost_ok']

    def test_violation(self, capsys, write):
        code, report = run(capsys, 'validate', write('bad.json', BAD))
        assert code == 1
        (v,) = report['violations']
        assert v['condition'] == 'positivity' and v['index'] == [0, 0]
        assert v['margin'] == pytest.approx(-0.1)

    def test_malformed(self, capsys, write):
        code, report = run(capsys, 'validate', write('x.json', '{"A": [[1]'))
        assert code == 2
        assert report['error'] == 'ProblemFormatError'

    def test_missing_file(self, capsys, tmp_path):
        code, _ = run(capsys, 'validate', tmp_path / 'nope.json')
        assert code == 2


class TestSynth:
    def test_S1(self, capsys, write):
        code, report = run(capsys, 'synth', write('s1.json', S1))
        assert code == 0
        assert report['status'] == 'Converged'
        assert report['p'][0] == pytest.approx(4.25, abs=1e-8)
        assert report['K'] == [[1.0]] and report['L'] == [[1.0]]

    def test_diverged(self, capsys, write):
        code, report = run(capsys, 'synth', write('sd.json', SD))
        assert code == 3
        assert report['status'] == 'Diverged'
        assert report['K'] is None

    def test_max_iter(self, capsys, write):
        code, report = run(capsys, 'synth', write('s1.json', S1), '--max-iter', 3)
        assert code == 4
        assert report['status'] == 'MaxIterationsReached'

    def test_cost(self, capsys, write):
        code, report = run(capsys, 'synth', write('s0.json', S0), '--x0', '1')
        assert report['optimal_cost'] == pytest.approx(2.0, abs=1e-9)

    def test_invalid_instance(self, capsys, write):
        code, report = run(capsys, 'synth', write('bad.json', BAD))
        assert code == 1
        assert not report['validation']['ok']

    def test_bad_flag(self, capsys, write):
        assert main(['synth', write('s1.json', S1), '--tol', '-1']) == 2


class TestSimulate:
    def test_telescoping(self, capsys, write, tmp_path):
        out = tmp_path / 'traj.csv'
        code, summary = run(capsys, 'simulate', write('s1.json', S1),
                            '--horizon', 50, '--out', out)
        assert code == 0
        assert summary['telescoping_max_error'] <= 1e-9
        assert summary['accumulated_cost'] + summary['terminal_value'] == \
            pytest.approx(summary['optimal_cost'], abs=1e-9)
        rows = list(csv.reader(out.open()))
        assert rows[0] == ['t', 'x_1', 'u_1', 'w_1', 'stage_cost']
        assert len(rows) == 52

    def test_zero_policy(self, capsys, write):
        code, summary = run(capsys, 'simulate', write('s1.json', S1),
                            '--policy', 'zero', '--horizon', 50)
        assert code == 0
        assert summary['accumulated_cost'] <= summary['optimal_cost']

    def test_zero_horizon(self, capsys, write):
        code, _ = run(capsys, 'simulate', write('s1.json', S1), '--horizon', 0)
        assert code == 2

    def test_random_needs_seed(self, capsys, write):
        code, report = run(capsys, 'simulate', write('s1.json', S1),
                           '--policy', 'random')
        assert code == 2 and 'seed' in report['message']

    def test_gain_from_file(self, capsys, write, tmp_path):
        problem = write('s1.json', S1)
        gains = tmp_path / 'gains.json'
        assert main(['synth', problem, '--out', str(gains)]) == 0
        capsys.readouterr()
        code, summary = run(capsys, 'simulate', problem, '--gain', gains,
                            '--horizon', 20)
        assert code == 0
        assert summary['optimal_cost'] == pytest.approx(4.25, abs=1e-8)

    def test_deterministic(self, capsys, write, tmp_path):
        problem = write('s1.json', S1)
        outputs = []
        for k in range(2):
            out = tmp_path / f'{k}.csv'
            assert main(['simulate', problem, '--policy', 'random', '--seed', '5',
                         '--horizon', '30', '--out', str(out)]) == 0
            outputs.append((capsys.readouterr().out.replace(str(out), ''),
                            out.read_bytes()))
        assert outputs[0] == outputs[1]


class TestOracleCheck:
    def test_S1(self, capsys, write):
        code, report = run(capsys, 'oracle-check', write('s1.json', S1),
                           '--horizon', 4, '--samples', 10, '--seed', 0)
        assert code == 0 and report['passed']

    def test_oversized(self, capsys, write):
        inst = ProblemInstance(np.eye(1), np.zeros((1, 7)), np.zeros((1, 6)),
                               np.zeros((7, 1)), np.zeros((6, 1)), [1.0],
                               np.zeros(7), np.zeros(6))
        code, report = run(capsys, 'oracle-check', write('big.json', inst),
                           '--seed', 0)
        assert code == 2 and report['error'] == 'LimitExceeded'

    def test_edited_problem_still_consistent(self, capsys, write):
        data = json.loads(dump_problem(S1))
        data['A'] = [[0.7]]
        code, report = run(capsys, 'oracle-check', write('e.json', data),
                           '--horizon', 3, '--seed', 1)
        assert code == 0 and report['passed']


NETWORK = {'capacitances': [1, 1, 1],
           'lines': [{'i': 1, 'j': 2, 'R': 1}, {'i': 2, 'j': 3, 'R': 1}]}
DESIGN = {'E': (0.5 * np.eye(3)).tolist(), 'G': (0.5 * np.eye(3)).tolist(),
          's': [1, 1, 1], 'r': [0, 0, 0], 'gamma': [0, 0, 0]}


class TestDcnet:
    def test_emits_problem(self, capsys, write, tmp_path):
        out = tmp_path / 'problem.json'
        code, report = run(capsys, 'dcnet', write('net.json', NETWORK),
                           '--design', write('d.json', DESIGN), '--h', 0.1,
                           '--out', out)
        assert code == 0 and report['feasible']
        inst = load_problem(out.read_text())
        np.testing.assert_allclose(inst.B, 0.1 * np.eye(3))

    def test_output_composes(self, capsys, write, tmp_path):
        # G < E so the closed loop contracts and synth converges
        design = dict(DESIGN, G=(0.2 * np.eye(3)).tolist())
        out = tmp_path / 'problem.json'
        assert main(['dcnet', write('net.json', NETWORK), '--design',
                     write('d.json', design), '--h', '0.1', '--out', str(out)]) == 0
        capsys.readouterr()
        for argv in (['validate'], ['synth'], ['simulate'],
                     ['oracle-check', '--horizon', '1', '--seed', '0']):
            assert main([argv[0], str(out)] + argv[1:]) == 0
            capsys.readouterr()

    def test_undamped_design_has_infinite_value(self, capsys, write, tmp_path):
        # E = G: u and w cancel, A is row-stochastic and p grows linearly
        out = tmp_path / 'problem.json'
        assert main(['dcnet', write('net.json', NETWORK), '--design',
                     write('d.json', DESIGN), '--h', '0.1', '--out', str(out)]) == 0
        capsys.readouterr()
        code, report = run(capsys, 'synth', out, '--max-iter', '2000')
        assert code == 4
        assert report['residual_inf_norm'] == pytest.approx(1.0)

    def test_hmax(self, capsys, write):
        code, report = run(capsys, 'dcnet', write('net.json', NETWORK), '--hmax')
        assert code == 0
        assert report['h_max'] == 0.5

    def test_structural(self, capsys, write):
        design = dict(DESIGN, E=[[0, 0, 0.1], [0, 0, 0], [0, 0, 0]])
        code, report = run(capsys, 'dcnet', write('net.json', NETWORK),
                           '--design', write('d.json', design), '--h', 0.1)
        assert code == 1
        assert report['structural_violations'][0]['index'] == [1, 3]

    def test_step_too_large(self, capsys, write):
        code, report = run(capsys, 'dcnet', write('net.json', NETWORK),
                           '--design', write('d.json', DESIGN), '--h', 0.6)
        assert code == 1 and not report['validation']['positivity_ok']

    def test_unbounded(self, capsys, write):
        code, report = run(capsys, 'dcnet',
                           write('n.json', {'capacitances': [1], 'lines': []}),
                           '--hmax')
        assert report['h_max'] is None and report['h_max_unbounded']
