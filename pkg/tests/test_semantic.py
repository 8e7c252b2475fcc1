"""Semantics-constrained identification tests.

Oracles: hand-derived projections for small systems (KKT verified on
paper), direct row evaluation for constraint satisfaction, and the
variational inequality characterizing Euclidean projections.
"""

import json

import numpy as np
import pytest

from capacity_studio import InfeasibleError, choquet
from capacity_studio.capacity import equidistributed, is_valid
from capacity_studio.fixture_data import fixture_path
from capacity_studio.learning import (
    LearningSample,
    monotonicity_constraints,
    samples_from_json,
)
from capacity_studio.qp import QPProblem, solve_qp
from capacity_studio.semantic import (
    IntervalScore,
    LinguisticConstraint,
    constraints_from_json,
    identify_semantic,
    interval_rows,
    interval_scores_from_json,
    linguistic_to_bounds,
    semantic_constraints,
)
from capacity_studio.subsets import subset_position

from oracles import random_capacity


def load_fixture(name):
    with open(fixture_path(name)) as fh:
        return json.load(fh)


# --- linguistic tables -------------------------------------------------------


def test_importance_terms_exact():
    assert linguistic_to_bounds("importance", "same level") == (0.9, 1.1)
    assert linguistic_to_bounds(
        "importance", "A is a little more important than B"
    ) == (1.1, 1.3)
    assert linguistic_to_bounds(
        "importance", "A is more important than B"
    ) == (1.3, 1.7)
    assert linguistic_to_bounds(
        "importance", "A is quite more important than B"
    ) == (1.7, 1.9)


def test_dependence_terms_exact():
    assert linguistic_to_bounds("dependence", "highly dependent") == (0.0, 0.0)
    assert linguistic_to_bounds("dependence", "Dependent") == (0.0, 0.5)
    assert linguistic_to_bounds("dependence", "a little dependent") == (0.5, 1.0)
    assert linguistic_to_bounds("dependence", "Independent") == (1.0, 1.0)


def test_synergy_terms_exact():
    assert linguistic_to_bounds("synergy", "high support") == (1.0, 1.0)
    assert linguistic_to_bounds("synergy", "Support") == (0.5, 1.0)
    assert linguistic_to_bounds("synergy", "a little support") == (0.0, 0.5)


def test_terms_case_insensitive_and_kind_alias():
    assert linguistic_to_bounds("importance", "SAME LEVEL") == (0.9, 1.1)
    assert linguistic_to_bounds("relative-importance", "same  level") == (0.9, 1.1)
    with pytest.raises(ValueError):
        linguistic_to_bounds("importance", "way more important")
    with pytest.raises(ValueError):
        linguistic_to_bounds("correlation", "same level")


# --- constraint validation ---------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="importance", a=(), b=(1,), term="same level"),
        dict(kind="importance", a=(1,), b=(1,), term="same level"),
        dict(kind="dependence", a=(1, 2), b=(2,), term="Dependent"),
        dict(kind="synergy", a=(1,), b=(1, 3), term="Support"),
        dict(kind="importance", a=(1,), b=(2,), term="same level", lo=1.0, hi=1.1),
        dict(kind="importance", a=(1,), b=(2,)),
        dict(kind="importance", a=(1,), b=(2,), lo=0.5, hi=1.1),
        dict(kind="dependence", a=(1,), b=(2,), lo=0.2, hi=1.5),
        dict(kind="synergy", a=(1,), b=(2,), lo=0.7, hi=0.3),
        dict(kind="importance", a=(1, 1), b=(2,), term="same level"),
    ],
)
def test_constraint_rejections(kwargs):
    with pytest.raises(ValueError):
        LinguisticConstraint(**kwargs)


# --- row algebra -------------------------------------------------------------


def pos(elements, n=5):
    mask = 0
    for e in elements:
        mask |= 1 << (e - 1)
    return subset_position(mask, n) - 1


def test_strict_importance_single_row():
    cons = [
        LinguisticConstraint(
            kind="importance", a=(2,), b=(1,),
            term="A is a little more important than B",
        )
    ]
    A, b, labels, E, d, eq_labels = semantic_constraints(cons, 5)
    assert A.shape == (1, 30)
    row = A[0]
    assert row[pos([2])] == 1.0
    assert row[pos([1])] == pytest.approx(-1.3)
    assert np.count_nonzero(row) == 2
    assert b[0] == 0.0
    assert E is None


def test_same_level_two_rows():
    cons = [LinguisticConstraint(kind="importance", a=(3,), b=(4,), term="same level")]
    A, b, labels, *_ = semantic_constraints(cons, 5)
    assert A.shape[0] == 2
    upper, lower = A[0], A[1]
    assert upper[pos([3])] == 1.0 and upper[pos([4])] == pytest.approx(-1.1)
    assert lower[pos([4])] == pytest.approx(0.9) and lower[pos([3])] == -1.0


def test_explicit_importance_band_is_two_sided():
    cons = [LinguisticConstraint(kind="importance", a=(2,), b=(1,), lo=1.1, hi=1.3)]
    A, b, labels, *_ = semantic_constraints(cons, 5)
    assert A.shape[0] == 2


def test_dependence_band_rows():
    cons = [
        LinguisticConstraint(
            kind="dependence", a=(2,), b=(3,), term="a little dependent"
        )
    ]
    A, b, labels, E, d, eq_labels = semantic_constraints(cons, 5)
    assert A.shape[0] == 2 and E is None
    lower, upper = A[0], A[1]
    # mu2 + 0.5 mu3 <= mu23
    assert lower[pos([2])] == 1.0
    assert lower[pos([3])] == pytest.approx(0.5)
    assert lower[pos([2, 3])] == -1.0
    # mu23 <= mu2 + mu3
    assert upper[pos([2, 3])] == 1.0
    assert upper[pos([2])] == -1.0 and upper[pos([3])] == pytest.approx(-1.0)
    assert not b.any()


def test_point_dependence_is_equality():
    cons = [LinguisticConstraint(kind="dependence", a=(1,), b=(2,), term="Independent")]
    A, b, labels, E, d, eq_labels = semantic_constraints(cons, 3)
    assert A.shape[0] == 0
    assert E.shape[0] == 1
    row = E[0]
    assert row[pos([1], 3)] == 1.0
    assert row[pos([2], 3)] == 1.0
    assert row[pos([1, 2], 3)] == -1.0
    assert d[0] == 0.0


def test_synergy_band_rows():
    cons = [LinguisticConstraint(kind="synergy", a=(1,), b=(4,), lo=0.3, hi=0.7)]
    A, b, labels, *_ = semantic_constraints(cons, 5)
    assert A.shape[0] == 2
    lower, upper = A[0], A[1]
    assert lower[pos([1])] == pytest.approx(0.7)
    assert lower[pos([4])] == pytest.approx(0.7)
    assert lower[pos([1, 4])] == -1.0
    assert b[0] == pytest.approx(0.3)
    assert upper[pos([1, 4])] == 1.0
    assert upper[pos([1])] == pytest.approx(-0.3)
    assert upper[pos([4])] == pytest.approx(-0.3)
    assert b[1] == pytest.approx(-0.7)


def test_full_set_folds_to_constant():
    cons = [
        LinguisticConstraint(
            kind="dependence", a=(1, 2, 3, 4), b=(5,), term="a little dependent"
        )
    ]
    A, b, labels, *_ = semantic_constraints(cons, 5)
    lower = A[0]
    # mu(1234) + 0.5 mu(5) <= mu(N) = 1
    assert lower[pos([1, 2, 3, 4])] == 1.0
    assert lower[pos([5])] == pytest.approx(0.5)
    assert b[0] == pytest.approx(-1.0)


def test_duplicate_rows_ingested_once():
    con = LinguisticConstraint(kind="importance", a=(1,), b=(5,), term="same level")
    A, b, labels, *_ = semantic_constraints([con, con], 5)
    assert A.shape[0] == 2  # not 4


def test_published_constraint_set_row_count():
    cons = constraints_from_json(load_fixture("table12-constraints.json"))
    assert len(cons) == 15
    A, b, labels, E, d, eq_labels = semantic_constraints(cons, 5)
    # 4 one-sided strict importance + 3 two-sided "same level" = 10 rows,
    # 5 dependence bands = 10 rows, 3 synergy bands = 6 rows
    assert A.shape == (26, 30)
    assert E is None


def test_widening_bounds_never_shrinks_feasible_set():
    rng = np.random.default_rng(23)
    narrow = [LinguisticConstraint(kind="synergy", a=(1,), b=(2,), lo=0.4, hi=0.6),
              LinguisticConstraint(kind="dependence", a=(2,), b=(3,), lo=0.5, hi=0.7),
              LinguisticConstraint(kind="importance", a=(1,), b=(3,), lo=1.1, hi=1.3)]
    wide = [LinguisticConstraint(kind="synergy", a=(1,), b=(2,), lo=0.2, hi=0.9),
            LinguisticConstraint(kind="dependence", a=(2,), b=(3,), lo=0.3, hi=0.9),
            LinguisticConstraint(kind="importance", a=(1,), b=(3,), lo=0.9, hi=1.7)]
    An, bn, *_ = semantic_constraints(narrow, 4)
    Aw, bw, *_ = semantic_constraints(wide, 4)
    A_mono, b_mono, _ = monotonicity_constraints(4)
    A = np.vstack([A_mono, An])
    b = np.concatenate([b_mono, bn])
    m = An.shape[1]
    checked = 0
    for _ in range(25):
        target = rng.uniform(0.0, 1.0, size=m)
        sol = solve_qp(
            QPProblem(D=np.eye(m), c=-target, A=A, b=b,
                      lb=np.zeros(m), ub=np.ones(m)),
            x0=None,
        )
        if sol.status != "optimal":
            continue
        u = sol.x
        if (An @ u + bn).max() > 1e-9:
            continue
        checked += 1
        assert (Aw @ u + bw <= 1e-7).all()
    assert checked >= 20


# --- interval rows -----------------------------------------------------------


def test_interval_rows_band_the_choquet_value():
    rng = np.random.default_rng(4)
    samples = [LearningSample((0.2, 0.6, 0.9), 0.5)]
    scores = [IntervalScore(1, 0.1)]
    A, b, labels = interval_rows(samples, scores, 3)
    assert A.shape == (2, 6)
    for _ in range(20):
        cap = random_capacity(rng, 3)
        u = cap.to_vector()
        val = choquet(cap, samples[0].scores)
        inside = (A @ u + b <= 1e-12).all()
        assert inside == (0.4 - 1e-12 <= val <= 0.6 + 1e-12)


def test_interval_score_validation():
    with pytest.raises(ValueError):
        IntervalScore(0)
    with pytest.raises(ValueError):
        IntervalScore(1, 0.0)
    with pytest.raises(ValueError):
        interval_rows([LearningSample((0.5, 0.5), 0.5)], [IntervalScore(2)], 2)


# --- identification ----------------------------------------------------------


def test_no_constraints_returns_equidistributed_exactly():
    result = identify_semantic(n=5)
    expected = equidistributed(5)
    assert np.array_equal(result.capacity.values, expected.values)
    assert result.objective == 0.0
    assert result.status == "optimal"


def test_satisfied_constraints_leave_u0_untouched():
    # u0 has all singletons equal, so "same level" already holds
    cons = [LinguisticConstraint(kind="importance", a=(1,), b=(2,), term="same level")]
    result = identify_semantic(cons, n=4)
    assert np.array_equal(
        result.capacity.values, equidistributed(4).values
    )
    assert result.objective == 0.0


def test_binding_lower_bound_projection_hand_checked():
    # explicit importance band against the full set folds mu(B) to 1:
    # 0.9 <= mu({1}) <= 1.1. KKT done by hand: u* = (0.9, 1/3, 1/3,
    # 0.9, 0.9, 2/3) with the two monotonicity rows mu(1)<=mu(12),
    # mu(1)<=mu(13) active.
    cons = [
        LinguisticConstraint(kind="importance", a=(1,), b=(1, 2, 3), lo=0.9, hi=1.1)
    ]
    result = identify_semantic(cons, n=3)
    u = result.capacity.to_vector()
    expected = np.array([0.9, 1 / 3, 1 / 3, 0.9, 0.9, 2 / 3])
    assert np.abs(u - expected).max() < 1e-7
    assert result.objective == pytest.approx(
        0.5 * float(((expected - equidistributed(3).to_vector()) ** 2).sum()),
        abs=1e-9,
    )


def test_direct_row_projection_matches_spec_example():
    # the projection machinery on the raw row mu({1}) >= 0.5: everything
    # else stays at u0 because monotonicity is slack there
    n = 3
    m = 6
    u0 = equidistributed(n).to_vector()
    A_mono, b_mono, labels = monotonicity_constraints(n)
    row = np.zeros(m)
    row[pos([1], 3)] = -1.0
    A = np.vstack([A_mono, row])
    b = np.concatenate([b_mono, [0.5]])
    sol = solve_qp(
        QPProblem(D=np.eye(m), c=-u0, A=A, b=b, lb=np.zeros(m), ub=np.ones(m)),
        x0=None,
    )
    assert sol.status == "optimal"
    expected = u0.copy()
    expected[pos([1], 3)] = 0.5
    assert np.abs(sol.x - expected).max() < 1e-8


def test_published_constraints_with_intervals_feasible():
    cons = constraints_from_json(load_fixture("table12-constraints.json"))
    samples = samples_from_json(load_fixture("learning-samples.json"))
    scores = interval_scores_from_json(load_fixture("interval-scores.json"))
    result = identify_semantic(cons, scores, samples)
    cap = result.capacity
    assert is_valid(cap)
    u = cap.to_vector()
    A, b, labels, E, d, eq_labels = semantic_constraints(cons, 5)
    assert float((A @ u + b).max()) <= 1e-6
    Ai, bi, _ = interval_rows(samples, scores, 5)
    assert float((Ai @ u + bi).max()) <= 1e-6
    assert result.objective >= 0.0
    assert result.method == "semantic"
    assert result.kkt.max_residual() < 1e-6


def test_projection_variational_inequality():
    cons = constraints_from_json(load_fixture("table12-constraints.json"))
    samples = samples_from_json(load_fixture("learning-samples.json"))
    scores = interval_scores_from_json(load_fixture("interval-scores.json"))
    result = identify_semantic(cons, scores, samples)
    u_star = result.capacity.to_vector()
    u0 = equidistributed(5).to_vector()
    A, b, labels, E, d, eq_labels = semantic_constraints(cons, 5)
    Ai, bi, _ = interval_rows(samples, scores, 5)
    A_mono, b_mono, _ = monotonicity_constraints(5)
    A_all = np.vstack([A_mono, A, Ai])
    b_all = np.concatenate([b_mono, b, bi])

    rng = np.random.default_rng(55)
    prob = QPProblem(
        D=np.eye(30), c=np.zeros(30), A=A_all, b=b_all,
        lb=np.zeros(30), ub=np.ones(30),
    )
    checked = 0
    while checked < 100:
        target = rng.uniform(0.0, 1.0, size=30)
        proj = solve_qp(
            QPProblem(
                D=prob.D, c=-target, A=prob.A, b=prob.b, lb=prob.lb, ub=prob.ub
            ),
            x0=None,
        )
        v = proj.x
        # independent feasibility check before using v as a witness
        if proj.status != "optimal" or float((A_all @ v + b_all).max()) > 1e-9:
            continue
        checked += 1
        assert float((u0 - u_star) @ (v - u_star)) <= 1e-6


def test_ranking_encoded_as_constraints_holds_exactly():
    # disjoint importance bands force a strict singleton order
    cons = [
        LinguisticConstraint(kind="importance", a=(1,), b=(2,), lo=1.3, hi=1.7),
        LinguisticConstraint(kind="importance", a=(2,), b=(3,), lo=1.3, hi=1.7),
    ]
    result = identify_semantic(cons, n=3)
    cap = result.capacity
    mu1, mu2, mu3 = (cap.value([i]) for i in (1, 2, 3))
    assert mu1 >= 1.3 * mu2 - 1e-9
    assert mu2 >= 1.3 * mu3 - 1e-9
    assert mu1 > mu2 > mu3


def test_infeasible_intervals_report_relaxation():
    samples = [
        LearningSample((0.3, 0.8), 0.2, label="first"),
        LearningSample((0.3, 0.8), 0.9, label="second"),
    ]
    scores = [IntervalScore(1, 0.1), IntervalScore(2, 0.1)]
    with pytest.raises(InfeasibleError) as err:
        identify_semantic((), scores, samples)
    report = err.value.report
    assert report.max_violation > 0.1
    assert report.suggested_relaxation
    assert any("interval" in label for label in report.suggested_relaxation)
    # dropping the suggested rows restores feasibility
    keep = [
        s for s in scores
        if not any(f"sample {s.sample} " in lbl for lbl in report.suggested_relaxation)
    ]
    result = identify_semantic((), keep, samples)
    assert result.status == "optimal"


def test_n_limits_and_mismatches():
    with pytest.raises(ValueError):
        identify_semantic(n=9)
    with pytest.raises(ValueError):
        identify_semantic(n=1)
    with pytest.raises(ValueError):
        identify_semantic()
    cons = [LinguisticConstraint(kind="importance", a=(4,), b=(1,), term="same level")]
    with pytest.raises(ValueError):
        identify_semantic(cons, n=3)
    with pytest.raises(ValueError):
        identify_semantic(samples=[LearningSample((0.5, 0.5), 0.5)], n=3)


# --- JSON parsers ------------------------------------------------------------


def test_constraints_from_json_fixture():
    cons = constraints_from_json(load_fixture("table12-constraints.json"))
    kinds = [c.kind for c in cons]
    assert kinds.count("importance") == 7
    assert kinds.count("dependence") == 5
    assert kinds.count("synergy") == 3
    explicit = [c for c in cons if c.kind == "dependence" and c.a == (3,)]
    assert explicit[0].lo == 0.8 and explicit[0].hi == 1.0


def test_constraints_from_json_rejects_bad_records():
    with pytest.raises(ValueError):
        constraints_from_json([{"kind": "importance", "a": [1]}])
    with pytest.raises(ValueError):
        constraints_from_json([{"kind": "importance", "a": [1], "b": [2],
                                "term": "same level", "note": "x"}])
    with pytest.raises(ValueError):
        constraints_from_json({"kind": "importance"})


def test_interval_scores_from_json():
    scores = interval_scores_from_json(load_fixture("interval-scores.json"))
    assert len(scores) == 10
    assert all(s.delta == 0.35 for s in scores)
    assert interval_scores_from_json([{"sample": 3}])[0].delta == 0.35
    with pytest.raises(ValueError):
        interval_scores_from_json([{"sample": 1, "width": 0.3}])
    with pytest.raises(ValueError):
        interval_scores_from_json([{"delta": 0.3}])
