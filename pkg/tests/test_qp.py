"""Active-set QP solver tests.

Oracles: closed forms for unconstrained and equality-constrained
problems, a brute-force feasible-grid search for low dimensions, and
first-order optimality probes along random feasible directions.
"""

import numpy as np
import pytest

from capacity_studio.qp import (
    QPInputError,
    QPProblem,
    _active_set_min,
    dump_problem,
    load_problem,
    solve_qp,
)

from oracles import grid_minimize


def random_spd(rng, m, scale=1.0):
    A = rng.normal(size=(m, m))
    return A @ A.T + scale * np.eye(m)


def random_feasible_instance(rng, m):
    """A bounded instance with a known strictly feasible point."""
    D = random_spd(rng, m, scale=0.5)
    c = rng.normal(size=m)
    x_feas = rng.uniform(-0.5, 0.5, size=m)
    k = int(rng.integers(1, 2 * m + 1))
    A = rng.normal(size=(k, m))
    b = -(A @ x_feas) - rng.uniform(0.05, 0.5, size=k)
    lb = np.full(m, -2.0)
    ub = np.full(m, 2.0)
    return QPProblem(D=D, c=c, A=A, b=b, lb=lb, ub=ub), x_feas


def test_single_variable_clipped_at_bound():
    # min 0.5 x^2 - x has its free minimum at 1; the bound stops it at 0.5
    prob = QPProblem(D=[[1.0]], c=[-1.0], ub=[0.5])
    sol = solve_qp(prob)
    assert sol.status == "optimal"
    assert abs(sol.x[0] - 0.5) < 1e-9
    assert abs(sol.objective - (-0.375)) < 1e-9
    assert ("ub", 0) in sol.active
    assert "ub[0]" in sol.active_labels


def test_unconstrained_matches_linear_solve():
    rng = np.random.default_rng(3)
    for m in (1, 2, 5, 12):
        D = random_spd(rng, m)
        c = rng.normal(size=m)
        sol = solve_qp(QPProblem(D=D, c=c))
        exact = np.linalg.solve(D, -c)
        assert sol.status == "optimal"
        assert np.abs(sol.x - exact).max() < 1e-8


def test_equality_projection():
    # nearest point to the origin on x1 + x2 = 1
    prob = QPProblem(
        D=np.eye(2), c=np.zeros(2), E=[[1.0, 1.0]], d=[-1.0],
        eq_labels=("sum-to-one",),
    )
    sol = solve_qp(prob)
    assert np.abs(sol.x - 0.5).max() < 1e-9
    assert ("eq", 0) in sol.active
    assert "sum-to-one" in sol.active_labels


def test_simplex_projection_oracle():
    # projecting a onto {x >= 0, sum x = 1} has a classic thresholding form
    rng = np.random.default_rng(11)
    for _ in range(25):
        m = int(rng.integers(2, 8))
        a = rng.normal(size=m)
        prob = QPProblem(
            D=np.eye(m),
            c=-a,
            E=np.ones((1, m)),
            d=np.array([-1.0]),
            lb=np.zeros(m),
        )
        sol = solve_qp(prob)
        u = np.sort(a)[::-1]
        css = np.cumsum(u) - 1.0
        rho = np.nonzero(u - css / np.arange(1, m + 1) > 0)[0][-1]
        tau = css[rho] / (rho + 1.0)
        expected = np.maximum(a - tau, 0.0)
        assert sol.status == "optimal"
        assert np.abs(sol.x - expected).max() < 1e-7


def test_infeasible_conflicting_bounds():
    prob = QPProblem(
        D=np.eye(1),
        c=np.zeros(1),
        A=[[-1.0], [1.0]],
        b=[1.0, 0.0],  # x >= 1 and x <= 0
        ineq_labels=("x >= 1", "x <= 0"),
    )
    sol = solve_qp(prob)
    assert sol.status == "infeasible"
    assert sol.max_violation > 0.4
    labels = [lbl for lbl, _ in sol.violated]
    assert set(labels) == {"x >= 1", "x <= 0"}


def test_infeasible_inconsistent_equalities():
    prob = QPProblem(
        D=np.eye(2),
        c=np.zeros(2),
        E=[[1.0, 0.0], [1.0, 0.0]],
        d=[0.0, -1.0],
    )
    sol = solve_qp(prob)
    assert sol.status == "infeasible"


def test_rank_deficient_objective_tolerated():
    # flat direction x2: regularization pins it near zero without drama
    prob = QPProblem(
        D=np.diag([1.0, 0.0]), c=[-1.0, 0.0], lb=[0.0, 0.0], ub=[1.0, 1.0]
    )
    sol = solve_qp(prob)
    assert sol.status == "optimal"
    assert abs(sol.objective - (-0.5)) < 1e-8
    assert abs(sol.x[0] - 1.0) < 1e-8
    assert sol.kkt.max_residual() < 1e-6


def test_slightly_indefinite_clipped():
    prob = QPProblem(D=[[-5e-9]], c=[0.0], lb=[-1.0], ub=[1.0])
    sol = solve_qp(prob)
    assert sol.status == "optimal"
    assert abs(sol.x[0]) < 1e-3


def test_clearly_indefinite_rejected():
    with pytest.raises(QPInputError):
        solve_qp(QPProblem(D=[[-1.0]], c=[0.0]))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(D=[[1.0, 0.5], [0.0, 1.0]], c=[0.0, 0.0]),  # asymmetric
        dict(D=[[float("nan")]], c=[0.0]),
        dict(D=[[1.0]], c=[0.0, 0.0]),  # dim mismatch
        dict(D=[[1.0]], c=[0.0], A=[[1.0, 2.0]], b=[0.0]),
        dict(D=[[1.0]], c=[0.0], A=[[1.0]], b=None),
        dict(D=[[1.0]], c=[0.0], lb=[0.0, 0.0]),
        dict(D=[[1.0]], c=[0.0], A=[[1.0]], b=[0.0], ineq_labels=("a", "b")),
    ],
)
def test_input_validation(kwargs):
    with pytest.raises(QPInputError):
        QPProblem(**kwargs)


def test_bad_x0_shape():
    with pytest.raises(QPInputError):
        solve_qp(QPProblem(D=[[1.0]], c=[0.0]), x0=[0.0, 0.0])


def test_feasible_x0_short_circuits_phase1():
    prob = QPProblem(D=np.eye(2), c=[-1.0, -1.0], lb=np.zeros(2), ub=np.ones(2))
    sol = solve_qp(prob, x0=[1.0, 1.0])
    assert sol.status == "optimal"
    assert np.abs(sol.x - 1.0).max() < 1e-9


def test_determinism():
    rng = np.random.default_rng(5)
    prob, _ = random_feasible_instance(rng, 5)
    a = solve_qp(prob)
    b = solve_qp(prob)
    assert np.array_equal(a.x, b.x)
    assert a.objective == b.objective
    assert a.active == b.active
    assert a.iterations == b.iterations


def test_random_instances_kkt():
    rng = np.random.default_rng(2024)
    for trial in range(200):
        m = int(rng.integers(1, 7))
        prob, x_feas = random_feasible_instance(rng, m)
        sol = solve_qp(prob)
        assert sol.status == "optimal", f"trial {trial}: {sol.status}"
        assert sol.kkt.max_residual() < 1e-6, f"trial {trial}: {sol.kkt}"
        assert sol.kkt.primal < 1e-8
        # never worse than the known feasible point
        assert sol.objective <= prob.objective(x_feas) + 1e-9


def test_first_order_probe():
    rng = np.random.default_rng(77)
    for _ in range(10):
        m = int(rng.integers(2, 6))
        prob, x_feas = random_feasible_instance(rng, m)
        sol = solve_qp(prob)
        assert sol.status == "optimal"
        grad = prob.D @ sol.x + prob.c
        for _ in range(100):
            # shrink random box points toward the strictly feasible
            # anchor until the row constraints hold
            v = rng.uniform(-2.0, 2.0, size=m)
            for _ in range(60):
                if (prob.A @ v + prob.b <= 0).all():
                    break
                v = x_feas + 0.7 * (v - x_feas)
            else:
                v = x_feas
            # moving toward any feasible v must not descend
            assert grad @ (v - sol.x) >= -1e-6


def grid_instance(rng, m):
    D = random_spd(rng, m, scale=0.3)
    c = rng.normal(size=m)
    A = rng.normal(size=(2, m))
    x_mid = np.full(m, 0.5)
    b = -(A @ x_mid) - rng.uniform(0.1, 0.4, size=2)
    return QPProblem(D=D, c=c, A=A, b=b, lb=np.zeros(m), ub=np.ones(m))


def test_grid_oracle_low_dimensions():
    rng = np.random.default_rng(90)
    for m, step, slack, count in ((1, 1e-3, 1e-5, 3), (2, 1e-3, 1e-4, 3), (3, 4e-3, 2e-3, 2)):
        for _ in range(count):
            prob = grid_instance(rng, m)
            sol = solve_qp(prob)
            assert sol.status == "optimal"
            best = grid_minimize(prob, step)
            # solver must match the best feasible grid point up to grid error
            assert sol.objective <= best + slack
            assert sol.objective >= best - abs(best) - 10.0  # sanity: finite


def test_iteration_cap_reported():
    rng = np.random.default_rng(8)
    prob, _ = random_feasible_instance(rng, 4)
    G = np.vstack([prob.A, -np.eye(4), np.eye(4)])
    h = np.concatenate([prob.b, prob.lb, -prob.ub])
    x0 = np.zeros(4)
    _, _, _, _, iters, hit_cap = _active_set_min(
        prob.D, prob.c, G, h, None, None, x0, max_iter=1
    )
    assert hit_cap and iters == 1


def test_dump_load_round_trip():
    rng = np.random.default_rng(13)
    prob, _ = random_feasible_instance(rng, 4)
    text = dump_problem(prob)
    back = load_problem(text)
    assert np.array_equal(back.D, prob.D)
    assert np.array_equal(back.c, prob.c)
    assert np.array_equal(back.A, prob.A)
    assert np.array_equal(back.b, prob.b)
    assert np.array_equal(back.lb, prob.lb)
    assert np.array_equal(back.ub, prob.ub)
    a, b = solve_qp(prob), solve_qp(back)
    assert np.array_equal(a.x, b.x)


def test_dump_rejects_garbage():
    with pytest.raises(QPInputError):
        load_problem("not a dump\n")
