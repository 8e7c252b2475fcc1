"""Least-squares capacity identification from scored examples and
stated preferences.

Each training sample contributes one affine row: sorting its scores
ascending turns the Choquet integral into offset + c'u where u is the
vector of subset values. Squared residuals against the targets build a
convex quadratic, monotonicity of the measure supplies the inequality
rows, and preference statements (score rankings, importance or
interaction orderings and equalities) add further rows on top. The
resulting QP is solved exactly; the fit error E reported back is the
root of the summed squared residuals.
"""

import warnings
from dataclasses import dataclass
from math import comb

import numpy as np

from .capacity import Capacity, as_scores, validate
from .choquet import ascending_order, choquet, tail_masks
from .errors import CycleError, InfeasibilityReport, InfeasibleError, NumericError
from .indices import interaction_expansion, shapley_expansion
from .qp import QPProblem, solve_qp
from .results import IdentificationResult
from .subsets import canonical_masks, format_subset, full_mask, subset_position

DEFAULT_RANK_MARGIN = 0.05
DEFAULT_INDEX_MARGIN = 0.01
ROW_CHECK_TOL = 1e-6


def min_samples(n: int) -> int:
    """Samples needed before the data term can constrain every subset:
    the width of the subset lattice (its largest antichain)."""
    if n < 2:
        raise ValueError("need at least two criteria")
    return comb(n, n // 2)


@dataclass(frozen=True)
class LearningSample:
    """One scored example: criteria scores f and the overall target y."""

    scores: tuple[float, ...]
    target: float
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "scores", as_scores(self.scores))
        y = float(self.target)
        if not 0.0 <= y <= 1.0:
            raise ValueError(f"target must lie in [0, 1], got {y!r}")
        object.__setattr__(self, "target", y)


@dataclass(frozen=True)
class RankingPair:
    """The better alternative must outscore the worse by at least margin."""

    better: tuple[float, ...]
    worse: tuple[float, ...]
    margin: float = DEFAULT_RANK_MARGIN
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "better", as_scores(self.better))
        object.__setattr__(self, "worse", as_scores(self.worse))
        if len(self.better) != len(self.worse):
            raise ValueError("ranked alternatives must score the same criteria")
        if not self.margin >= 0.0:
            raise ValueError("margin must be nonnegative")


@dataclass(frozen=True)
class ShapleyOrder:
    """Criterion `more` carries at least `margin` more importance than
    `less`."""

    more: int
    less: int
    margin: float = DEFAULT_INDEX_MARGIN

    def __post_init__(self):
        if self.more == self.less:
            raise ValueError("ordered criteria must differ")
        if not self.margin >= 0.0:
            raise ValueError("margin must be nonnegative")


@dataclass(frozen=True)
class ShapleyEqual:
    a: int
    b: int

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("equated criteria must differ")


def _norm_pair(pair) -> tuple[int, int]:
    i, j = int(pair[0]), int(pair[1])
    if i == j:
        raise ValueError("interaction pairs need two distinct criteria")
    return (min(i, j), max(i, j))


@dataclass(frozen=True)
class InteractionOrder:
    """Pair `more` interacts at least `margin` more strongly than `less`."""

    more: tuple[int, int]
    less: tuple[int, int]
    margin: float = DEFAULT_INDEX_MARGIN

    def __post_init__(self):
        object.__setattr__(self, "more", _norm_pair(self.more))
        object.__setattr__(self, "less", _norm_pair(self.less))
        if self.more == self.less:
            raise ValueError("ordered pairs must differ")
        if not self.margin >= 0.0:
            raise ValueError("margin must be nonnegative")


@dataclass(frozen=True)
class InteractionEqual:
    a: tuple[int, int]
    b: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "a", _norm_pair(self.a))
        object.__setattr__(self, "b", _norm_pair(self.b))
        if self.a == self.b:
            raise ValueError("equated pairs must differ")


Preference = (
    RankingPair | ShapleyOrder | ShapleyEqual | InteractionOrder | InteractionEqual
)


def choquet_row(f) -> tuple[np.ndarray, float]:
    """Coefficients (c, offset) with choquet(cap, f) == c @ u + offset
    for u = cap.to_vector(). The offset is the smallest score: the full
    set's increment multiplies mu(N) = 1."""
    scores = as_scores(f)
    n = len(scores)
    order = ascending_order(scores)
    tails = tail_masks(order, n)
    c = np.zeros((1 << n) - 2)
    offset = float(scores[order[0] - 1])
    previous = offset
    for crit, mask in zip(order[1:], tails[1:]):
        value = float(scores[crit - 1])
        c[subset_position(mask, n) - 1] += value - previous
        previous = value
    return c, offset


def monotonicity_constraints(n: int):
    """(A, b, labels) with A u + b <= 0 iff u is monotone.

    One row mu(S) <= mu(S + {i}) for every nonempty proper S and i not
    in S, S walked in canonical order; the n rows reaching the full set
    come last, so b ends with exactly n entries of -1."""
    m = (1 << n) - 2
    top = full_mask(n)
    rows, offsets, labels = [], [], []
    for mask in canonical_masks(n):
        pos = subset_position(mask, n) - 1
        for i in range(1, n + 1):
            bit = 1 << (i - 1)
            if mask & bit:
                continue
            grown = mask | bit
            row = np.zeros(m)
            row[pos] = 1.0
            if grown == top:
                offsets.append(-1.0)
            else:
                row[subset_position(grown, n) - 1] = -1.0
                offsets.append(0.0)
            rows.append(row)
            labels.append(
                f"mu({format_subset(mask)}) <= mu({format_subset(grown)})"
            )
    return np.array(rows), np.array(offsets), tuple(labels)


def assemble_objective(samples, n: int):
    """(D, c, const) with sum of squared residuals = 1/2 u'Du + c'u + const."""
    m = (1 << n) - 2
    D = np.zeros((m, m))
    cvec = np.zeros(m)
    const = 0.0
    for sample in samples:
        if len(sample.scores) != n:
            raise ValueError(
                f"sample scores {len(sample.scores)} criteria, expected {n}"
            )
        row, offset = choquet_row(sample.scores)
        resid0 = offset - sample.target
        D += 2.0 * np.outer(row, row)
        cvec += 2.0 * resid0 * row
        const += resid0 * resid0
    return D, cvec, const


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _check_acyclic(kind, strict_edges, equal_edges):
    """Reject order statements that loop, directly or through equalities.

    Order edges count regardless of margin: a zero-margin loop is still
    almost surely a mistake in the stated preferences."""
    uf = _UnionFind()
    for a, b in equal_edges:
        uf.union(a, b)
    adjacency: dict = {}
    for a, b in strict_edges:
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            raise CycleError(
                f"{kind} preferences conflict: {a} > {b} contradicts the "
                f"stated equalities"
            )
        adjacency.setdefault(ra, []).append(rb)
    state: dict = {}

    def visit(node, stack):
        state[node] = 1
        for nxt in adjacency.get(node, ()):
            if state.get(nxt) == 1:
                raise CycleError(
                    f"{kind} preferences contain a cycle through "
                    f"{stack + [node, nxt]}"
                )
            if state.get(nxt) is None:
                visit(nxt, stack + [node])
        state[node] = 2

    for node in list(adjacency):
        if state.get(node) is None:
            visit(node, [])


def preference_constraints(preferences, n: int):
    """Inequality and equality rows for the stated preferences.

    Returns (A, b, labels, E, d, eq_labels); either block may be empty.
    Raises CycleError when the order statements loop."""
    S, s0 = shapley_expansion(n)
    ineq_rows, ineq_offsets, ineq_labels = [], [], []
    eq_rows, eq_offsets, eq_labels = [], [], []
    shapley_strict, shapley_equal = [], []
    inter_strict, inter_equal = [], []
    rank_strict = []

    def check_index(i):
        if not 1 <= i <= n:
            raise ValueError(f"criterion {i} outside 1..{n}")

    for k, pref in enumerate(preferences):
        if isinstance(pref, RankingPair):
            if len(pref.better) != n:
                raise ValueError("ranking vectors must score every criterion")
            cb, ob = choquet_row(pref.better)
            cw, ow = choquet_row(pref.worse)
            ineq_rows.append(cw - cb)
            ineq_offsets.append(ow - ob + pref.margin)
            ineq_labels.append(pref.label or f"rank[{k}]")
            rank_strict.append(
                (tuple(round(v, 12) for v in pref.better),
                 tuple(round(v, 12) for v in pref.worse))
            )
        elif isinstance(pref, ShapleyOrder):
            check_index(pref.more)
            check_index(pref.less)
            ineq_rows.append(S[pref.less - 1] - S[pref.more - 1])
            ineq_offsets.append(s0[pref.less - 1] - s0[pref.more - 1] + pref.margin)
            ineq_labels.append(f"shapley: {pref.more} > {pref.less}")
            shapley_strict.append((pref.more, pref.less))
        elif isinstance(pref, ShapleyEqual):
            check_index(pref.a)
            check_index(pref.b)
            eq_rows.append(S[pref.a - 1] - S[pref.b - 1])
            eq_offsets.append(s0[pref.a - 1] - s0[pref.b - 1])
            eq_labels.append(f"shapley: {pref.a} = {pref.b}")
            shapley_equal.append((pref.a, pref.b))
        elif isinstance(pref, InteractionOrder):
            for idx in pref.more + pref.less:
                check_index(idx)
            qm, rm = interaction_expansion(n, *pref.more)
            ql, rl = interaction_expansion(n, *pref.less)
            ineq_rows.append(ql - qm)
            ineq_offsets.append(rl - rm + pref.margin)
            ineq_labels.append(
                f"interaction: ({pref.more[0]},{pref.more[1]}) > "
                f"({pref.less[0]},{pref.less[1]})"
            )
            inter_strict.append((pref.more, pref.less))
        elif isinstance(pref, InteractionEqual):
            for idx in pref.a + pref.b:
                check_index(idx)
            qa, ra = interaction_expansion(n, *pref.a)
            qb, rb = interaction_expansion(n, *pref.b)
            eq_rows.append(qa - qb)
            eq_offsets.append(ra - rb)
            eq_labels.append(
                f"interaction: ({pref.a[0]},{pref.a[1]}) = "
                f"({pref.b[0]},{pref.b[1]})"
            )
            inter_equal.append((pref.a, pref.b))
        else:
            raise TypeError(f"unrecognized preference {pref!r}")

    _check_acyclic("importance", shapley_strict, shapley_equal)
    _check_acyclic("interaction", inter_strict, inter_equal)
    _check_acyclic("ranking", rank_strict, [])

    m = (1 << n) - 2
    A = np.array(ineq_rows) if ineq_rows else np.zeros((0, m))
    b = np.array(ineq_offsets) if ineq_offsets else np.zeros(0)
    E = np.array(eq_rows) if eq_rows else None
    d = np.array(eq_offsets) if eq_offsets else None
    return A, b, tuple(ineq_labels), E, d, tuple(eq_labels)


def _repair_and_build(n: int, u: np.ndarray) -> Capacity:
    """Round-off repair: clip into [0, 1] and sweep each subset up to its
    largest immediate child. Moves values by solver noise only."""
    size = 1 << n
    vals = np.zeros(size)
    for pos, mask in enumerate(canonical_masks(n)):
        vals[mask] = u[pos]
    vals[size - 1] = 1.0
    np.clip(vals, 0.0, 1.0, out=vals)
    for mask in range(1, size - 1):
        rest = mask
        floor = 0.0
        while rest:
            low = rest & -rest
            child = vals[mask ^ low]
            if child > floor:
                floor = child
            rest ^= low
        if vals[mask] < floor:
            vals[mask] = floor
    return Capacity(n=n, values=vals)


def _infer_n(samples, preferences, n):
    candidates = set()
    for sample in samples:
        candidates.add(len(sample.scores))
    for pref in preferences:
        if isinstance(pref, RankingPair):
            candidates.add(len(pref.better))
    if n is not None:
        candidates.add(int(n))
    if not candidates:
        raise ValueError(
            "criterion count cannot be inferred; pass n explicitly"
        )
    if len(candidates) > 1:
        raise ValueError(f"conflicting criterion counts {sorted(candidates)}")
    return candidates.pop()


def identify_from_data(
    samples,
    preferences=(),
    n: int | None = None,
) -> IdentificationResult:
    """Fit the capacity minimizing the squared target residuals subject
    to monotonicity and every stated preference.

    With no samples the data term vanishes and any feasible capacity is
    returned (flagged underdetermined); below the minimum sample count a
    warning is emitted. Infeasible preference systems raise
    InfeasibleError with the worst offenders."""
    samples = [
        s if isinstance(s, LearningSample) else LearningSample(*s)
        for s in samples
    ]
    preferences = list(preferences)
    n = _infer_n(samples, preferences, n)
    m = (1 << n) - 2

    D, cvec, const = assemble_objective(samples, n)
    A_mono, b_mono, mono_labels = monotonicity_constraints(n)
    A_pref, b_pref, pref_labels, E, d, eq_labels = preference_constraints(
        preferences, n
    )
    A = np.vstack([A_mono, A_pref])
    b = np.concatenate([b_mono, b_pref])
    labels = mono_labels + pref_labels

    problem = QPProblem(
        D=D,
        c=cvec,
        A=A,
        b=b,
        E=E,
        d=d,
        lb=np.zeros(m),
        ub=np.ones(m),
        ineq_labels=labels,
        eq_labels=eq_labels or None,
    )
    u0 = np.array(
        [mask.bit_count() / n for mask in canonical_masks(n)], dtype=float
    )
    solution = solve_qp(problem, x0=u0)
    if solution.status == "infeasible":
        raise InfeasibleError(
            InfeasibilityReport(solution.max_violation, list(solution.violated))
        )
    if solution.status != "optimal":
        raise NumericError(
            f"identification did not converge (status {solution.status}, "
            f"kkt {solution.kkt.to_dict()})"
        )

    cap = _repair_and_build(n, solution.x)
    bad = validate(cap)
    if bad:
        raise NumericError(f"repaired capacity invalid: {bad[0].describe()}")
    u = cap.to_vector()

    # the repair sweep must not have broken any stated preference
    if A_pref.shape[0]:
        worst_pref = float((A_pref @ u + b_pref).max())
        if worst_pref > ROW_CHECK_TOL:
            raise NumericError(
                f"preference row violated by {worst_pref:.3e} after repair"
            )
    if E is not None:
        worst_eq = float(np.abs(E @ u + d).max())
        if worst_eq > ROW_CHECK_TOL:
            raise NumericError(
                f"equality row off by {worst_eq:.3e} after repair"
            )

    sse = max(0.0, float(0.5 * u @ D @ u + cvec @ u + const))
    fit_error = float(np.sqrt(sse))
    residuals = [
        float(choquet(cap, s.scores) - s.target) for s in samples
    ]
    needed = min_samples(n)
    underdetermined = len(samples) < needed
    if underdetermined:
        warnings.warn(
            f"{len(samples)} samples cannot determine all {m} subset "
            f"values for n={n}; at least {needed} are needed",
            stacklevel=2,
        )

    return IdentificationResult(
        method="learn",
        capacity=cap,
        status=solution.status,
        fit_error=fit_error,
        objective=sse,
        kkt=solution.kkt,
        active_constraints=solution.active_labels,
        diagnostics={
            "sample_count": len(samples),
            "min_samples": needed,
            "underdetermined": underdetermined,
            "per_sample_residual": residuals,
            "iterations": solution.iterations,
        },
    )


# --- JSON ingestion ---------------------------------------------------------


def samples_from_json(data) -> list[LearningSample]:
    """Parse [{"f": [...], "y": 0.9, "label": ...}, ...]."""
    if not isinstance(data, list):
        raise ValueError("samples document must be a JSON array")
    out = []
    for k, rec in enumerate(data):
        if not isinstance(rec, dict):
            raise ValueError(f"sample {k} must be an object")
        unknown = set(rec) - {"f", "y", "label"}
        if unknown:
            raise ValueError(f"sample {k} has unknown fields {sorted(unknown)}")
        if "f" not in rec or "y" not in rec:
            raise ValueError(f"sample {k} needs both 'f' and 'y'")
        out.append(
            LearningSample(
                scores=tuple(rec["f"]),
                target=rec["y"],
                label=rec.get("label"),
            )
        )
    return out


def preferences_from_json(data) -> list[Preference]:
    """Parse the preference record list (typed by the 'type' field)."""
    if not isinstance(data, list):
        raise ValueError("preferences document must be a JSON array")
    out: list[Preference] = []
    for k, rec in enumerate(data):
        if not isinstance(rec, dict) or "type" not in rec:
            raise ValueError(f"preference {k} must be an object with a type")
        kind = rec["type"]
        fields = {key: val for key, val in rec.items() if key != "type"}
        try:
            if kind == "ranking":
                out.append(
                    RankingPair(
                        better=tuple(fields.pop("better")),
                        worse=tuple(fields.pop("worse")),
                        **fields,
                    )
                )
            elif kind == "shapley_order":
                out.append(
                    ShapleyOrder(
                        more=int(fields.pop("more")),
                        less=int(fields.pop("less")),
                        **fields,
                    )
                )
            elif kind == "shapley_equal":
                out.append(
                    ShapleyEqual(a=int(fields.pop("a")), b=int(fields.pop("b")))
                )
            elif kind == "interaction_order":
                out.append(
                    InteractionOrder(
                        more=tuple(fields.pop("more")),
                        less=tuple(fields.pop("less")),
                        **fields,
                    )
                )
            elif kind == "interaction_equal":
                out.append(
                    InteractionEqual(
                        a=tuple(fields.pop("a")), b=tuple(fields.pop("b"))
                    )
                )
            else:
                raise ValueError(f"unrecognized preference type {kind!r}")
        except (TypeError, KeyError) as exc:
            raise ValueError(f"preference {k}: {exc!r}") from None
    return out
