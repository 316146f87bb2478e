import csv
import io

import numpy as np
import pytest

from helpers import random_instances
from posminimax.bellman import adversary_gain, synthesize_gain, value_iterate
from posminimax.exceptions import InvariantViolation
from posminimax.model import ProblemInstance
from posminimax.simulate import (RandomAdmissible, WorstCase, ZeroDisturbance,
                                 accumulated_cost, check_positive_invariance,
                                 closed_loop_step, simulate, trajectory_csv)


@pytest.fixture
def S1_gains(S1):
    result = value_iterate(S1)
    return (result.p, synthesize_gain(result.value, S1),
            adversary_gain(result.value, S1))


class TestClosedLoopStep:
    def test_S1_worst_case(self, S1, S1_gains):
        _, K, L = S1_gains
        x_next, u, w, g = closed_loop_step([1.0], K, WorstCase(L), S1)
        np.testing.assert_allclose(x_next, [0.8])
        np.testing.assert_array_equal(u, [-1.0])
        np.testing.assert_array_equal(w, [1.0])
        assert g == pytest.approx(0.85)

    @pytest.mark.parametrize('policy', [ZeroDisturbance(), RandomAdmissible(3)])
    def test_origin_is_fixed(self, S1, S1_gains, policy):
        _, K, L = S1_gains
        x_next, u, w, g = closed_loop_step([0.0], K, policy, S1)
        assert x_next[0] == 0 and u[0] == 0 and w[0] == 0 and g == 0

    def test_no_constraints(self):
        A = np.array([[0.5, 0.1], [0.2, 0.3]])
        inst = ProblemInstance(A, np.ones((2, 1)), np.ones((2, 1)),
                               np.zeros((1, 2)), np.zeros((1, 2)), [1.0, 2.0],
                               [0.5], [0.5])
        K = synthesize_gain([1.0, 1.0], inst)
        L = adversary_gain([1.0, 1.0], inst)
        x = np.array([1.0, 3.0])
        x_next, u, w, g = closed_loop_step(x, K, WorstCase(L), inst)
        np.testing.assert_allclose(x_next, A @ x)
        assert g == pytest.approx(7.0)

    def test_inadmissible_gain(self, S1):
        with pytest.raises(InvariantViolation, match='inadmissible u'):
            closed_loop_step([1.0], np.array([[2.0]]), ZeroDisturbance(), S1)


class TestSimulate:
    def test_S1_states(self, S1, S1_gains):
        _, K, L = S1_gains
        traj = simulate(S1, K, WorstCase(L), [1.0], 3)
        np.testing.assert_allclose(traj.states[:, 0], [1, 0.8, 0.64, 0.512])
        assert traj.horizon == 3
        assert traj.inputs.shape == (3, 1) and traj.states.shape == (4, 1)

    def test_S1_accumulated(self, S1, S1_gains):
        _, K, L = S1_gains
        traj = simulate(S1, K, WorstCase(L), [1.0], 3)
        # 0.85 (1 + 0.8 + 0.64)
        assert accumulated_cost(traj) == pytest.approx(2.074, abs=1e-12)
        one = simulate(S1, K, WorstCase(L), [1.0], 1)
        assert accumulated_cost(one) == pytest.approx(0.85)

    def test_zero_state(self, S1, S1_gains):
        _, K, _ = S1_gains
        traj = simulate(S1, K, RandomAdmissible(1), [0.0], 10)
        assert not traj.states.any()
        assert accumulated_cost(traj) == 0.0

    def test_growth(self, SD):
        K = synthesize_gain([0.0], SD)
        traj = simulate(SD, K, ZeroDisturbance(), [1.0], 5)
        np.testing.assert_allclose(traj.states[:, 0], 1.1 ** np.arange(6))
        np.testing.assert_allclose(traj.stage_costs, 1.1 ** np.arange(5))

    def test_horizon_must_be_positive(self, S1, S1_gains):
        with pytest.raises(ValueError):
            simulate(S1, S1_gains[1], ZeroDisturbance(), [1.0], 0)

    def test_negative_x0(self, S1, S1_gains):
        with pytest.raises(ValueError):
            simulate(S1, S1_gains[1], ZeroDisturbance(), [-1.0], 3)

    def test_random_policy_reproducible(self):
        inst = next(random_instances(5, 1))
        result = value_iterate(inst)
        K = synthesize_gain(result.value, inst)
        x0 = np.ones(inst.n)
        a = simulate(inst, K, RandomAdmissible(42), x0, 30)
        b = simulate(inst, K, RandomAdmissible(42), x0, 30)
        c = simulate(inst, K, RandomAdmissible(43), x0, 30)
        np.testing.assert_array_equal(a.states, b.states)
        assert not np.array_equal(a.disturbances, c.disturbances)

    def test_admissible_and_positive(self):
        for inst in random_instances(6, 20):
            result = value_iterate(inst)
            K = synthesize_gain(result.value, inst)
            L = adversary_gain(result.value, inst)
            for policy in (WorstCase(L), ZeroDisturbance(), RandomAdmissible(0)):
                traj = simulate(inst, K, policy, np.ones(inst.n), 40)
                assert np.all(traj.states >= 0)
                for t in range(40):
                    x = traj.states[t]
                    assert np.all(np.abs(traj.inputs[t]) <= inst.E @ x + 1e-12)
                    assert np.all(np.abs(traj.disturbances[t]) <= inst.G @ x + 1e-12)


def _telescoping(inst, policy_factory, T=100):
    result = value_iterate(inst)
    p = result.p
    K = synthesize_gain(result.value, inst)
    L = adversary_gain(result.value, inst)
    x0 = np.random.default_rng(inst.n).uniform(0, 1, inst.n)
    traj = simulate(inst, K, policy_factory(L), x0, T)
    v = traj.states @ p
    return traj, v


def test_telescoping_identity():
    for inst in random_instances(13, 20, max_n=6, max_m=4, max_l=4):
        traj, v = _telescoping(inst, WorstCase)
        step = np.abs(traj.stage_costs + v[1:] - v[:-1])
        assert np.max(step) <= 1e-9 * (1 + v[0])
        assert abs(accumulated_cost(traj) + v[-1] - v[0]) <= 1e-7


def test_suboptimal_adversaries_cost_less():
    for inst in random_instances(14, 20, max_n=5):
        for factory in (lambda L: ZeroDisturbance(),
                        lambda L: RandomAdmissible(7)):
            traj, v = _telescoping(inst, factory, T=60)
            assert accumulated_cost(traj) + v[-1] <= v[0] + 1e-9 * (1 + v[0])
        traj, v = _telescoping(inst, WorstCase, T=60)
        assert accumulated_cost(traj) <= v[0] + 1e-9 * (1 + v[0])


def test_worst_case_cost_converges_to_value(S1, S1_gains):
    p, K, L = S1_gains
    traj = simulate(S1, K, WorstCase(L), [1.0], 200)
    assert accumulated_cost(traj) == pytest.approx(p[0], abs=1e-8)


def test_stage_maximum_nonnegative():
    rng = np.random.default_rng(15)
    for inst in random_instances(15, 20):
        for x in rng.uniform(0, 5, (10, inst.n)):
            u = rng.uniform(-1, 1, inst.m) * (inst.E @ x)
            # stage cost is maximized by w = -sign(gamma) G x
            w = -np.sign(inst.gamma) * (inst.G @ x)
            assert inst.s @ x + inst.r @ u - inst.gamma @ w >= -1e-12


def test_adversary_stage_cost_can_be_negative():
    # L maximizes g + p'x', not g alone: with s at its lower bound the
    # stage cost under w = L x dips below zero while the problem is valid.
    inst = ProblemInstance([[0.5, 0.0], [0.4, 0.5]], [[0.0], [0.0]],
                           [[0.5], [0.0]], [[0.0, 0.0]], [[0.5, 0.0]],
                           [-0.49, 10.0], [0.0], [1.0])
    result = value_iterate(inst)
    np.testing.assert_allclose(result.p, [28.04, 20.0])
    L = adversary_gain(result.value, inst)
    np.testing.assert_array_equal(L.matrix, [[0.5, 0.0]])
    x = np.array([1.0, 0.0])
    assert inst.s @ x - inst.gamma @ (L @ x) == pytest.approx(-0.99)


class TestInvariance:
    def test_validated_instances(self):
        for inst in random_instances(16, 5):
            report = check_positive_invariance(inst, np.ones(inst.n), 30, 20, 0)
            assert report.passed and report.min_entry >= 0

    def test_detects_violation(self):
        # a = 0, b = 1, e = 1: u = -x maps x = 1 to -1
        inst = ProblemInstance.scalar(0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0)
        report = check_positive_invariance(inst, [1.0], 5, 20, 0)
        assert not report.passed
        assert report.min_entry < 0

    def test_origin(self):
        inst = ProblemInstance.scalar(0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0)
        assert check_positive_invariance(inst, [0.0], 5, 3, 0).passed


def test_csv_export(S1, S1_gains):
    _, K, L = S1_gains
    traj = simulate(S1, K, WorstCase(L), [1.0], 3)
    text = trajectory_csv(traj)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ['t', 'x_1', 'u_1', 'w_1', 'stage_cost']
    assert len(rows) == 5
    assert rows[-1][0] == '3' and rows[-1][2:] == ['', '', '']
    assert float(rows[1][-1]) == pytest.approx(0.85)
    assert trajectory_csv(traj) == text
