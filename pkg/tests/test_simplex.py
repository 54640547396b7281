import numpy as np
import pytest

from vpmnsim.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, solve

from oracles import random_bounded_lp, vertex_enumeration_max


def _lp(c, rows):
    coeffs = np.array([r[0] for r in rows], dtype=float)
    rels = tuple(r[1] for r in rows)
    rhs = np.array([r[2] for r in rows], dtype=float)
    return LpProblem(objective=np.array(c, dtype=float), coeffs=coeffs, relations=rels, rhs=rhs)


def test_simple_box():
    p = _lp([1, 1], [([1, 0], "<=", 1), ([0, 1], "<=", 2)])
    sol = solve(p)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(3.0)
    np.testing.assert_allclose(sol.x, [1.0, 2.0])


def test_infeasible():
    p = _lp([1], [([1], ">=", 1), ([1], "<=", 0)])
    assert solve(p).status == INFEASIBLE


def test_polytope_vertex():
    p = _lp([1, 2], [([1, 1], "<=", 4), ([1, 0], "<=", 3), ([0, 1], "<=", 3)])
    sol = solve(p)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(7.0)
    np.testing.assert_allclose(sol.x, [1.0, 3.0])


def test_unbounded():
    p = _lp([1], [([1], ">=", 1)])
    assert solve(p).status == UNBOUNDED


def test_equality_constraint():
    p = _lp([1, 1], [([1, -1], "=", 0), ([1, 0], "<=", 2)])
    sol = solve(p)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(4.0)
    np.testing.assert_allclose(sol.x, [2.0, 2.0])


def test_negative_rhs_normalization():
    # -x1 <= -1  is  x1 >= 1
    p = _lp([-1], [([-1], "<=", -1), ([1], "<=", 5)])
    sol = solve(p)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-1.0)


def test_degenerate_all_zero_optimum():
    # equal-split rows with no usable capacity: optimum is the zero vertex
    p = _lp(
        [1, 1],
        [([1, -1], "=", 0), ([1, 0], "<=", 0), ([0, 1], "<=", 3)],
    )
    sol = solve(p)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(0.0)


def test_no_constraints():
    p = LpProblem(
        objective=np.array([-1.0, -2.0]),
        coeffs=np.empty((0, 2)),
        relations=(),
        rhs=np.empty(0),
    )
    sol = solve(p)
    assert sol.status == OPTIMAL and sol.objective == 0.0
    p2 = LpProblem(
        objective=np.array([1.0]), coeffs=np.empty((0, 1)), relations=(), rhs=np.empty(0)
    )
    assert solve(p2).status == UNBOUNDED


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        _lp([1, 2], [([1], "<=", 1)])
    with pytest.raises(ValueError):
        LpProblem(
            objective=np.array([1.0]),
            coeffs=np.array([[1.0]]),
            relations=("<=", "<="),
            rhs=np.array([1.0]),
        )
    with pytest.raises(ValueError):
        _lp([1], [([1], "<", 1)])


def test_text_round_trip():
    p = _lp([1, 2.5], [([1, 1], "<=", 4), ([1, -1], ">=", -2), ([0.5, 0], "=", 1)])
    q = LpProblem.from_text(p.to_text())
    np.testing.assert_array_equal(q.objective, p.objective)
    np.testing.assert_array_equal(q.coeffs, p.coeffs)
    np.testing.assert_array_equal(q.rhs, p.rhs)
    assert q.relations == p.relations


def test_from_text_rejects_garbage():
    with pytest.raises(ValueError):
        LpProblem.from_text("min 1 2\n1 1 <= 4\n")
    with pytest.raises(ValueError):
        LpProblem.from_text("max 1\n1 ?? 4\n")


def _recheck_feasible(p, x, tol=1e-8):
    assert np.all(x >= -1e-9)
    lhs = p.coeffs @ x
    for val, rel, b in zip(lhs, p.relations, p.rhs):
        if rel == "<=":
            assert val <= b + tol
        elif rel == ">=":
            assert val >= b - tol
        else:
            assert abs(val - b) <= tol


def test_matches_vertex_enumeration():
    rng = np.random.default_rng(31415)
    n_feasible = 0
    for _ in range(150):
        p = random_bounded_lp(rng)
        sol = solve(p)
        oracle = vertex_enumeration_max(p)
        if oracle is None:
            assert sol.status == INFEASIBLE
            continue
        n_feasible += 1
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(oracle, abs=1e-7)
        _recheck_feasible(p, sol.x)
    assert n_feasible > 30  # the generator must actually exercise the solver


def test_weak_duality_bound():
    # max x1+x2 s.t. x1+2x2 <= 4, 3x1+x2 <= 6: dual y=(2/5, 1/5) gives bound 14/5
    p = _lp([1, 1], [([1, 2], "<=", 4), ([3, 1], "<=", 6)])
    sol = solve(p)
    assert sol.status == OPTIMAL
    y = np.array([2.0 / 5.0, 1.0 / 5.0])
    dual_bound = float(y @ np.array([4.0, 6.0]))
    assert sol.objective <= dual_bound + 1e-9
    assert sol.objective == pytest.approx(dual_bound)  # this dual is optimal
