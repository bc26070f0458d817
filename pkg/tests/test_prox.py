import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitep.core import Box, BoxSum, InfeasibleError, WholeSpace, contains_point
from splitep.prox import (
    ConvergenceError,
    prox_affine,
    prox_diag_quad,
    prox_generic,
    prox_log1d,
    project,
    project_box,
    separable_qp_sum_box,
)

from oracles import active_set_qp_sum_box, grid_log1d, grid_qp_sum_box, random_qp_instance


def test_project_box_examples():
    np.testing.assert_array_equal(project_box([0.5], [0], [1]), [0.5])
    np.testing.assert_array_equal(project_box([-1, 2], [0, 0], [1, 1]), [0, 1])
    np.testing.assert_array_equal(project_box([30, 30], [10, 10], [50, 50]), [30, 30])


def test_separable_qp_examples():
    y = separable_qp_sum_box([1, 1], [0.5, 0.5], [0, 0], [1, 1], 0, 2)
    np.testing.assert_allclose(y, [0.5, 0.5])
    y = separable_qp_sum_box([1, 1], [1, 1], [0, 0], [1, 1], 0, 1)
    np.testing.assert_allclose(y, [0.5, 0.5], atol=1e-12)
    y, nu, _ = separable_qp_sum_box([1, 2], [1, 1], [0, 0], [1, 1], 0, 1, full_output=True)
    np.testing.assert_allclose(y, [1 / 3, 2 / 3], atol=1e-12)
    assert nu == pytest.approx(2 / 3, abs=1e-12)


def test_separable_qp_example_against_grid():
    d, t, lo, hi = np.array([1.0, 2.0]), np.ones(2), np.zeros(2), np.ones(2)
    ref = grid_qp_sum_box(d, t, lo, hi, 0.0, 1.0)
    np.testing.assert_allclose(ref, [1 / 3, 2 / 3], atol=1e-6)


def test_separable_qp_infeasible():
    with pytest.raises(InfeasibleError):
        separable_qp_sum_box([1, 1], [0, 0], [0, 0], [1, 1], 3, 4)


def test_separable_qp_unbounded_box_sides():
    # lower bounds at -inf: the bracket has to be grown
    y = separable_qp_sum_box([1, 1], [5, 5], [-np.inf, -np.inf], [np.inf, np.inf], -np.inf, 2.0)
    np.testing.assert_allclose(y, [1, 1], atol=1e-12)
    y = separable_qp_sum_box([1, 3], [-5, -5], [-np.inf, -np.inf], [np.inf, np.inf], 2.0, np.inf)
    np.testing.assert_allclose(y.sum(), 2.0, atol=1e-10)


@pytest.mark.parametrize("seed", range(20))
def test_separable_qp_matches_active_set_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    d, t, lo, hi, slo, shi = random_qp_instance(rng, n)
    y = separable_qp_sum_box(d, t, lo, hi, slo, shi)
    np.testing.assert_allclose(y, active_set_qp_sum_box(d, t, lo, hi, slo, shi), atol=1e-8)


def test_prox_affine_examples():
    np.testing.assert_allclose(prox_affine([0, -1], 1.0, [1, 0], WholeSpace(2)), [1, 1])
    S = Box([0, 0], [1, 1])
    np.testing.assert_array_equal(prox_affine([5, 5], 0.0, [0.2, 0.3], S), [0.2, 0.3])
    np.testing.assert_array_equal(prox_affine([5, 5], 0.0, [2, 0.3], S), [1, 0.3])

    omega = BoxSum(np.full(2, 10.0), np.full(2, 50.0), 30.0, 90.0)
    lam = 10 / (60 * np.sqrt(2))
    y = prox_affine([-60, -60], lam, [30, 30], omega)
    np.testing.assert_allclose(y, 30 + 60 * lam, rtol=1e-14)
    np.testing.assert_allclose(y, [37.071, 37.071], atol=1e-3)
    assert contains_point(omega, y, 0.0)


def test_prox_diag_quad_examples():
    S = Box([0, 0], [1, 1])
    np.testing.assert_array_equal(prox_diag_quad([1, 1], 0.0, [0.5, 2], S), [0.5, 1])
    np.testing.assert_allclose(prox_diag_quad([1, 1], 0.5, [2, 2], WholeSpace(2)), [1, 1])
    S = BoxSum([0, 0], [10, 10], 3, 10)
    np.testing.assert_allclose(prox_diag_quad([1, 1], 0.5, [2, 2], S), [1.5, 1.5], atol=1e-12)


def test_prox_log1d_examples():
    assert prox_log1d(0.0, 3.0, -1.0, 2.0) == 2.0
    assert prox_log1d(0.0, 0.25, -1.0, 2.0) == 0.25
    assert prox_log1d(2.0, 0.0, -1.0, 1.0) == 1.0
    assert prox_log1d(1.0, -1.0, -2.0, 0.0) == -1.0
    assert grid_log1d(2.0, 0.0, -1.0, 1.0) == pytest.approx(1.0, abs=1e-6)
    assert grid_log1d(1.0, -1.0, -2.0, 0.0) == pytest.approx(-1.0, abs=1e-6)


@pytest.mark.parametrize("seed", range(10))
def test_prox_log1d_matches_grid(seed):
    rng = np.random.default_rng(100 + seed)
    lam = rng.uniform(0, 3)
    z = rng.uniform(-3, 3)
    lo = rng.uniform(-2, 1)
    hi = lo + rng.uniform(0.1, 3)
    assert prox_log1d(lam, z, lo, hi) == pytest.approx(grid_log1d(lam, z, lo, hi), abs=1e-6)


def test_prox_generic_examples():
    S = Box([0, 0], [10, 10])
    zero = lambda y: np.zeros_like(y)
    np.testing.assert_allclose(prox_generic(zero, 0.0, 1.0, [11, 3], S), [10, 3])

    Q = 2 * np.eye(2)
    y = prox_generic(lambda y: Q @ y, 2.0, 0.5, [2, 2], S)
    np.testing.assert_allclose(y, [1, 1], atol=1e-9)
    np.testing.assert_allclose(y, prox_diag_quad([1, 1], 0.5, [2, 2], S), atol=1e-9)

    Q = np.array([[2.0, 1.0], [1.0, 2.0]])
    y = prox_generic(lambda y: Q @ y, 3.0, 1.0, [3, 0], S)
    np.testing.assert_allclose(y, [1, 0], atol=1e-9)


def test_prox_generic_reports_nonconvergence():
    Q = np.array([[2.0, 1.0], [1.0, 2.0]])
    with pytest.raises(ConvergenceError) as exc:
        prox_generic(lambda y: Q @ y, 3.0, 1.0, [3, 0.5], WholeSpace(2), tol=1e-14, max_iter=3)
    assert exc.value.residual > 0


def _sets():
    return [
        WholeSpace(3),
        Box([-1, 0, 0.5], [1, 2, 3]),
        BoxSum([-1, 0, 0.5], [1, 2, 3], 1.0, 2.5),
    ]


@pytest.mark.parametrize("S", _sets(), ids=["whole", "box", "boxsum"])
def test_prox_outputs_feasible_and_optimal(S, rng):
    Q = np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 1.5]])
    delta = np.array([0.5, 1.0, 2.0])
    c = np.array([1.0, -2.0, 0.5])
    for _ in range(20):
        a = rng.normal(scale=3, size=3)
        lam = rng.uniform(0, 1)
        cases = [
            (prox_affine(c, lam, a, S), lambda y: c @ y),
            (prox_diag_quad(delta, lam, a, S), lambda y: delta @ (y * y)),
            (prox_generic(lambda y: Q @ y, np.linalg.norm(Q, 2), lam, a, S), lambda y: 0.5 * y @ Q @ y),
        ]
        for y, f in cases:
            assert contains_point(S, y, 1e-8)
            obj = lam * f(y) + 0.5 * np.sum((y - a) ** 2)
            for _ in range(100):
                w = project(S, rng.normal(scale=3, size=3))
                assert obj <= lam * f(w) + 0.5 * np.sum((w - a) ** 2) + 1e-8


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_prox_nonexpansive_in_anchor(seed):
    rng = np.random.default_rng(seed)
    S = BoxSum([-1, 0, 0.5], [1, 2, 3], 1.0, 2.5)
    a, b = rng.normal(scale=3, size=(2, 3))
    lam = rng.uniform(0, 1)
    delta = np.array([0.5, 1.0, 2.0])
    for p in (lambda v: prox_affine([1.0, 2.0, -1.0], lam, v, S),
              lambda v: prox_diag_quad(delta, lam, v, S),
              lambda v: project(S, v)):
        assert np.linalg.norm(p(a) - p(b)) <= np.linalg.norm(a - b) + 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_prox_affine_is_shifted_projection(seed):
    rng = np.random.default_rng(seed)
    c, a = rng.normal(size=(2, 3))
    lam = rng.uniform(0, 2)
    lo = np.array([-1.0, 0.0, 0.5])
    hi = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(prox_affine(c, lam, a, Box(lo, hi)), np.clip(a - lam * c, lo, hi))
    y = prox_affine(c, lam, a, BoxSum(lo, hi, 1.0, 2.5))
    np.testing.assert_allclose(y, separable_qp_sum_box(np.ones(3), a - lam * c, lo, hi, 1.0, 2.5), atol=0)
