import json

import numpy as np
import pytest

from splitep.core import ContractError, eval_sum
from splitep.problems import (
    CournotParams,
    OpParams,
    build_cournot,
    build_op,
    build_rotation,
    build_strongly_pseudomonotone,
    cournot_symmetric_solution,
    load_problem,
    problem_from_dict,
)
from splitep.prox import project
from splitep.schedules import step_size
from splitep.verify import brute_force_equilibrium, primal_residual, sample_feasible


def test_cournot_matrices():
    p = CournotParams(n=2, alpha=120, delta=[1, 1], mu=30, xi=0, box_lo=10, box_hi=50,
                      sigma_lo=30, sigma_hi=90)
    np.testing.assert_array_equal(p.B_tilde, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(p.B, np.diag([2, 2]))
    q = CournotParams(n=3, alpha=120, delta=[1, 2, 3], mu=30, xi=0, box_lo=10, box_hi=50,
                      sigma_lo=40, sigma_hi=140)
    np.testing.assert_array_equal(q.B_tilde, [[0, 1, 1], [2, 0, 2], [3, 3, 0]])


def test_cournot_defaults():
    p = CournotParams.default(5)
    assert np.all(p.alpha == 120) and np.all(p.delta == 1) and np.all(p.mu == 30)
    assert np.all(p.box_lo == 10) and np.all(p.box_hi == 50)
    assert (p.sigma_lo, p.sigma_hi) == (60, 240)
    np.testing.assert_array_equal(build_cournot(p).x0, np.full(5, 30.0))


def test_cournot_rejects_bad_params():
    with pytest.raises(ContractError):
        CournotParams(n=2, alpha=-1, delta=1, mu=30, xi=0, box_lo=10, box_hi=50, sigma_lo=0, sigma_hi=100)
    with pytest.raises(ContractError):
        CournotParams(n=1, alpha=1, delta=1, mu=30, xi=0, box_lo=10, box_hi=50, sigma_lo=0, sigma_hi=100)


def test_fixed_cost_does_not_enter():
    a = build_cournot(CournotParams.default(3)).bifunction
    p = CournotParams.default(3)
    p.xi = np.array([1.0, 5.0, 100.0])
    b = build_cournot(p).bifunction
    x, y = np.array([20.0, 25.0, 30.0]), np.array([11.0, 40.0, 33.0])
    assert eval_sum(a, x, y) == eval_sum(b, x, y)


@pytest.mark.parametrize("n, s", [(2, 30.0), (3, 22.5), (4, 18.0), (5, 15.0), (10, 11.0),
                                  (15, 160 / 15), (20, 10.5)])
def test_cournot_symmetric_solution(n, s):
    inst = build_cournot(CournotParams.default(n))
    np.testing.assert_allclose(inst.solution, s, rtol=1e-15)
    assert primal_residual(inst.bifunction, inst.feasible_set, inst.solution) >= -1e-8


@pytest.mark.parametrize("n, step", [(2, 0.5), (3, 2.5)])
def test_cournot_grid_oracle(n, step):
    inst = build_cournot(CournotParams.default(n))
    xg = brute_force_equilibrium(inst.bifunction, inst.feasible_set, step)
    np.testing.assert_allclose(xg, inst.solution, atol=step)


def test_cournot_asymmetric_has_no_closed_form():
    p = CournotParams(n=2, alpha=[120, 100], delta=1, mu=30, xi=0, box_lo=10, box_hi=50,
                      sigma_lo=30, sigma_hi=90)
    assert cournot_symmetric_solution(p) is None


def test_op_log_only_minimizer_is_upper_bound():
    inst = build_op(OpParams(Q=np.zeros((3, 3)), box_lo=0.0, box_hi=1.0))
    F, S = inst.bifunction, inst.feasible_set
    assert primal_residual(F, S, np.ones(3)) == pytest.approx(0.0, abs=1e-12)
    assert primal_residual(F, S, np.full(3, 0.5)) == pytest.approx(-3 * (np.log(2) - np.log(1.5)), abs=1e-9)
    assert eval_sum(F, np.full(3, 0.4), np.full(3, 0.4)) == 0.0


def test_op_one_dimensional_solution():
    inst = build_op(OpParams(Q=2 * np.eye(1), box_lo=0.0, box_hi=2.0))
    xstar = (np.sqrt(3) - 1) / 2
    assert xstar == pytest.approx(0.36603, abs=1e-5)
    xg = brute_force_equilibrium(inst.bifunction, inst.feasible_set, 1e-3)
    assert xg[0] == pytest.approx(0.366, abs=1e-3)
    assert primal_residual(inst.bifunction, inst.feasible_set, [xstar]) >= -1e-12
    assert inst.objective(np.array([xstar])) == pytest.approx(xstar ** 2 - np.log1p(xstar))


def test_op_spec_choice():
    from splitep.core import DiagonalQuadratic, GeneralQuadratic, SeparableLogBarrier

    diag = build_op(OpParams(Q=np.diag([1.0, 2.0]), box_lo=0, box_hi=1)).bifunction
    assert isinstance(diag.prox_spec1(np.zeros(2)), DiagonalQuadratic)
    full = build_op(OpParams(Q=[[2.0, 1.0], [1.0, 2.0]], box_lo=0, box_hi=1)).bifunction
    assert isinstance(full.prox_spec1(np.zeros(2)), GeneralQuadratic)
    assert isinstance(full.prox_spec2(np.zeros(2)), SeparableLogBarrier)
    with pytest.raises(ContractError):
        OpParams(Q=[[1.0, 0.0], [0.0, -1.0]], box_lo=0, box_hi=1)
    with pytest.warns(UserWarning):
        OpParams(Q=np.eye(2), box_lo=-1, box_hi=1)


def test_rotation_instance(rng):
    inst = build_rotation()
    F = inst.bifunction
    assert not inst.paramonotone
    np.testing.assert_array_equal(inst.solution, [0, 0])
    for _ in range(1000):
        x, y = rng.normal(scale=5, size=(2, 2))
        assert eval_sum(F, x, x) == 0.0
        assert abs(eval_sum(F, x, y) + eval_sum(F, y, x)) <= 1e-12 * (1 + np.dot(x - y, x - y))


def test_strongly_pseudomonotone_instance(rng):
    inst = build_strongly_pseudomonotone(3, 2.0, -1.0, 1.0)
    F, S = inst.bifunction, inst.feasible_set
    for x, y in zip(sample_feasible(S, rng, 200), sample_feasible(S, rng, 200)):
        assert eval_sum(F, x, y) + eval_sum(F, y, x) == pytest.approx(-2.0 * np.sum((x - y) ** 2), abs=1e-12)
        assert eval_sum(F, np.zeros(3), y) == 0.0
    x0 = np.array([0.9, -0.5, 0.2])
    eta, lam = step_size(1.0, F.diag_subgrad1(x0), F.diag_subgrad2(x0))
    from splitep.solver import SolverState, iterate_once

    _, rec = iterate_once(F, S, SolverState.initial(x0), 1.0)
    np.testing.assert_allclose(rec.x_next, project(S, (1 - 2.0 * lam) * x0), rtol=1e-14)
    with pytest.raises(ContractError):
        build_strongly_pseudomonotone(2, 1.0, 0.0, 1.0)


def test_spm_grid_oracle():
    inst = build_strongly_pseudomonotone(2, 1.0, -1.0, 1.0)
    np.testing.assert_allclose(brute_force_equilibrium(inst.bifunction, inst.feasible_set, 0.1), 0, atol=1e-12)


def test_problem_files(tmp_path):
    path = tmp_path / "q.json"
    path.write_text(json.dumps({"kind": "op", "Q": [[2.0, 0.5], [0.5, 1.0]], "box_lo": 0, "box_hi": [1, 2]}))
    inst = load_problem(path)
    assert inst.name == "op" and inst.n == 2
    np.testing.assert_array_equal(inst.feasible_set.hi, [1, 2])

    inst = problem_from_dict({"kind": "cournot", "n": 3, "mu": [30, 31, 32]})
    np.testing.assert_array_equal(inst.params.mu, [30, 31, 32])
    assert inst.params.sigma_lo == 40
    assert inst.solution is None

    assert problem_from_dict({"kind": "rotation"}).name == "rotation"
    assert problem_from_dict({"kind": "spm", "n": 4}).n == 4
    with pytest.raises(ContractError):
        problem_from_dict({"kind": "cournot", "n": 2, "gamma": 1})
    with pytest.raises(ContractError):
        problem_from_dict({"kind": "nash"})
