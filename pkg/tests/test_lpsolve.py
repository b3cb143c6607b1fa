import numpy as np
import pytest
import scipy.sparse as sp

from rosteropt import ObjectiveWeights, build_milp, solve_lp, toy_instance
from rosteropt.milp import MilpModel

W = ObjectiveWeights()


def tiny_model(c, A, row_lb, row_ub, var_lb, var_ub):
    c = np.asarray(c, dtype=float)
    return MilpModel(len(c), c, 0.0, sp.csr_matrix(np.asarray(A, dtype=float)),
                     np.asarray(row_lb, dtype=float), np.asarray(row_ub, dtype=float),
                     np.asarray(var_lb, dtype=float), np.asarray(var_ub, dtype=float),
                     np.zeros(len(c), dtype=bool))


def test_backends_agree_on_textbook_lp():
    # min -x - 2y s.t. x + y <= 4, x <= 3, y <= 3
    model = tiny_model([-1, -2], [[1, 1]], [-np.inf], [4], [0, 0], [3, 3])
    for backend in ("highs", "simplex"):
        sol = solve_lp(model, backend=backend)
        assert sol.status == "optimal"
        assert abs(sol.objective - (-7.0)) < 1e-8  # x=1, y=3


def test_backends_detect_infeasibility():
    model = tiny_model([1], [[1], [1]], [2, -np.inf], [np.inf, 1], [0], [10])
    for backend in ("highs", "simplex"):
        assert solve_lp(model, backend=backend).status == "infeasible"


def test_bounded_variables_at_upper():
    # min -x with x <= 5: optimum sits at the upper bound
    model = tiny_model([-1], np.zeros((0, 1)), [], [], [0], [5])
    for backend in ("highs", "simplex"):
        sol = solve_lp(model, backend=backend)
        assert sol.status == "optimal" and abs(sol.objective + 5) < 1e-9


def test_ranged_rows():
    # min x + y with 2 <= x + y <= 6
    model = tiny_model([1, 1], [[1, 1]], [2], [6], [0, 0], [10, 10])
    for backend in ("highs", "simplex"):
        sol = solve_lp(model, backend=backend)
        assert abs(sol.objective - 2.0) < 1e-8


def test_backends_agree_on_roster_relaxations():
    for seed in range(4):
        model, _ = build_milp(toy_instance(seed), W)
        a = solve_lp(model, backend="highs")
        b = solve_lp(model, backend="simplex")
        assert a.status == b.status == "optimal"
        assert abs(a.objective - b.objective) < 1e-6


def test_unknown_backend_rejected():
    model = tiny_model([1], np.zeros((0, 1)), [], [], [0], [1])
    with pytest.raises(ValueError):
        solve_lp(model, backend="nope")


def test_solution_satisfies_model():
    model, _ = build_milp(toy_instance(1), W)
    sol = solve_lp(model)
    assert model.check_point(sol.x, tol=1e-6)
