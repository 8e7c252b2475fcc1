"""Semantics-constrained identification.

Projects the equidistributed measure u0 (every subset at |A|/n) onto
the polytope cut by linguistic statements about relative importance,
dependence, and synergy, plus optional interval-scored samples. The
objective is the plain squared distance, so the result is the unique
Euclidean projection of u0 onto the feasible set; statements only move
coefficients that they actually constrain.

Linguistic terms translate to the published numeric bands verbatim;
explicit bounds are accepted in the same ranges. A dependence or
synergy band [lo, hi] becomes a two-sided inequality on mu(A + B); a
degenerate band (lo == hi) becomes one equality row.
"""

from dataclasses import dataclass

import numpy as np

from .capacity import Capacity, validate
from .errors import InfeasibilityReport, InfeasibleError, NumericError
from .learning import (
    LearningSample,
    _repair_and_build,
    choquet_row,
    monotonicity_constraints,
)
from .qp import QPProblem, solve_qp
from .results import IdentificationResult
from .subsets import canonical_masks, format_subset, full_mask, mask_of

MAX_SEMANTIC_CRITERIA = 8
ROW_CHECK_TOL = 1e-6
DEFAULT_DELTA = 0.35

LINGUISTIC_IMPORTANCE = {
    "same level": (0.9, 1.1),
    "a is a little more important than b": (1.1, 1.3),
    "a is more important than b": (1.3, 1.7),
    "a is quite more important than b": (1.7, 1.9),
}
LINGUISTIC_DEPENDENCE = {
    "highly dependent": (0.0, 0.0),
    "dependent": (0.0, 0.5),
    "a little dependent": (0.5, 1.0),
    "independent": (1.0, 1.0),
}
LINGUISTIC_SYNERGY = {
    "high support": (1.0, 1.0),
    "support": (0.5, 1.0),
    "a little support": (0.0, 0.5),
}

_TABLES = {
    "importance": LINGUISTIC_IMPORTANCE,
    "dependence": LINGUISTIC_DEPENDENCE,
    "synergy": LINGUISTIC_SYNERGY,
}
_KIND_RANGES = {
    "importance": (0.9, 1.9),
    "dependence": (0.0, 1.0),
    "synergy": (0.0, 1.0),
}


def _normalize_kind(kind: str) -> str:
    k = kind.strip().lower()
    if k == "relative-importance":
        k = "importance"
    if k not in _TABLES:
        raise ValueError(
            f"unknown constraint kind {kind!r}; expected importance, "
            f"dependence, or synergy"
        )
    return k


def linguistic_to_bounds(kind: str, term: str) -> tuple[float, float]:
    """Published numeric band for a linguistic term (case-insensitive)."""
    k = _normalize_kind(kind)
    table = _TABLES[k]
    key = " ".join(term.strip().lower().split())
    if key not in table:
        raise ValueError(
            f"unknown {k} term {term!r}; expected one of "
            f"{sorted(table)}"
        )
    return table[key]


@dataclass(frozen=True)
class LinguisticConstraint:
    """One statement about subsets A and B.

    Importance bounds the ratio mu(A)/mu(B); dependence and synergy
    bound mu(A + B) against mu(A) and mu(B) (A and B disjoint). Either
    a term or explicit (lo, hi) within the kind's range. two_sided
    forces the importance lower row even for a one-sided band."""

    kind: str
    a: tuple[int, ...]
    b: tuple[int, ...]
    term: str | None = None
    lo: float | None = None
    hi: float | None = None
    two_sided: bool = False

    def __post_init__(self):
        kind = _normalize_kind(self.kind)
        object.__setattr__(self, "kind", kind)
        a = tuple(sorted(int(i) for i in self.a))
        b = tuple(sorted(int(i) for i in self.b))
        if not a or not b:
            raise ValueError("constraint subsets must be nonempty")
        if len(set(a)) != len(a) or len(set(b)) != len(b):
            raise ValueError("constraint subsets must not repeat criteria")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if kind == "importance" and a == b:
            raise ValueError("importance needs two different subsets")
        if kind in ("dependence", "synergy") and set(a) & set(b):
            raise ValueError(f"{kind} subsets must be disjoint")
        if self.term is not None:
            if self.lo is not None or self.hi is not None:
                raise ValueError("give either a term or explicit bounds")
            lo, hi = linguistic_to_bounds(kind, self.term)
        else:
            if self.lo is None or self.hi is None:
                raise ValueError("explicit constraints need both lo and hi")
            lo, hi = float(self.lo), float(self.hi)
        kind_lo, kind_hi = _KIND_RANGES[kind]
        if not (kind_lo <= lo <= hi <= kind_hi):
            raise ValueError(
                f"{kind} bounds [{lo}, {hi}] outside [{kind_lo}, {kind_hi}]"
            )
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def describe(self) -> str:
        a, b = format_subset_list(self.a), format_subset_list(self.b)
        if self.kind == "importance":
            return f"importance: mu({a}) vs {self.lo}..{self.hi} mu({b})"
        return f"{self.kind}: mu({a}+{b}) in the {self.lo}..{self.hi} band"


def format_subset_list(elements) -> str:
    return ",".join(str(e) for e in elements)


class _RowBuilder:
    """Accumulates A u + b <= 0 and E u + d = 0 rows, folding the full
    set's fixed value 1 into the offsets and dropping duplicates."""

    def __init__(self, n: int):
        self.n = n
        self.m = (1 << n) - 2
        self.top = full_mask(n)
        self.positions = {
            mask: pos for pos, mask in enumerate(canonical_masks(n))
        }
        self.ineq_rows, self.ineq_offsets, self.ineq_labels = [], [], []
        self.eq_rows, self.eq_offsets, self.eq_labels = [], [], []
        self._seen_ineq: set = set()
        self._seen_eq: set = set()

    def _vector(self, terms, const):
        row = np.zeros(self.m)
        offset = float(const)
        for mask, coeff in terms:
            if mask == self.top:
                offset += coeff
            else:
                row[self.positions[mask]] += coeff
        return row, offset

    def add_ineq(self, terms, const, label):
        row, offset = self._vector(terms, const)
        key = (tuple(np.round(row, 12)), round(offset, 12))
        if key in self._seen_ineq:
            return
        self._seen_ineq.add(key)
        self.ineq_rows.append(row)
        self.ineq_offsets.append(offset)
        self.ineq_labels.append(label)

    def add_eq(self, terms, const, label):
        row, offset = self._vector(terms, const)
        key = (tuple(np.round(row, 12)), round(offset, 12))
        if key in self._seen_eq:
            return
        self._seen_eq.add(key)
        self.eq_rows.append(row)
        self.eq_offsets.append(offset)
        self.eq_labels.append(label)

    def ineq(self):
        if not self.ineq_rows:
            return np.zeros((0, self.m)), np.zeros(0), ()
        return (
            np.array(self.ineq_rows),
            np.array(self.ineq_offsets),
            tuple(self.ineq_labels),
        )

    def eq(self):
        if not self.eq_rows:
            return None, None, ()
        return (
            np.array(self.eq_rows),
            np.array(self.eq_offsets),
            tuple(self.eq_labels),
        )


def semantic_constraints(constraints, n: int):
    """Linear rows for the statements: (A, b, labels, E, d, eq_labels)."""
    builder = _RowBuilder(n)
    for con in constraints:
        if not isinstance(con, LinguisticConstraint):
            raise TypeError(f"expected LinguisticConstraint, got {con!r}")
        mask_a = mask_of(con.a, n)
        mask_b = mask_of(con.b, n)
        a_txt, b_txt = format_subset(mask_a), format_subset(mask_b)
        if con.kind == "importance":
            builder.add_ineq(
                [(mask_a, 1.0), (mask_b, -con.hi)],
                0.0,
                f"importance: mu({a_txt}) <= {con.hi} mu({b_txt})",
            )
            # Term statements of strict importance translate to the upper
            # row alone; explicit numeric bounds are a two-sided band, as
            # is any term band reaching below parity.
            if con.term is None or con.lo < 1.0 or con.two_sided:
                builder.add_ineq(
                    [(mask_b, con.lo), (mask_a, -1.0)],
                    0.0,
                    f"importance: {con.lo} mu({b_txt}) <= mu({a_txt})",
                )
        elif con.kind == "dependence":
            union = mask_a | mask_b
            if con.lo == con.hi:
                builder.add_eq(
                    [(mask_a, 1.0), (mask_b, con.lo), (union, -1.0)],
                    0.0,
                    f"dependence: mu({format_subset(union)}) = mu({a_txt}) "
                    f"+ {con.lo} mu({b_txt})",
                )
            else:
                builder.add_ineq(
                    [(mask_a, 1.0), (mask_b, con.lo), (union, -1.0)],
                    0.0,
                    f"dependence: mu({a_txt}) + {con.lo} mu({b_txt}) <= "
                    f"mu({format_subset(union)})",
                )
                builder.add_ineq(
                    [(union, 1.0), (mask_a, -1.0), (mask_b, -con.hi)],
                    0.0,
                    f"dependence: mu({format_subset(union)}) <= mu({a_txt}) "
                    f"+ {con.hi} mu({b_txt})",
                )
        else:  # synergy: mu(A+B) = mu(A) + mu(B) + gamma (1 - mu(A) - mu(B))
            union = mask_a | mask_b
            u_txt = format_subset(union)
            if con.lo == con.hi:
                g = con.lo
                builder.add_eq(
                    [(union, 1.0), (mask_a, g - 1.0), (mask_b, g - 1.0)],
                    -g,
                    f"synergy: mu({u_txt}) pins gamma = {g} over "
                    f"({a_txt};{b_txt})",
                )
            else:
                builder.add_ineq(
                    [(mask_a, 1.0 - con.lo), (mask_b, 1.0 - con.lo), (union, -1.0)],
                    con.lo,
                    f"synergy: gamma >= {con.lo} over ({a_txt};{b_txt})",
                )
                builder.add_ineq(
                    [(union, 1.0), (mask_a, con.hi - 1.0), (mask_b, con.hi - 1.0)],
                    -con.hi,
                    f"synergy: gamma <= {con.hi} over ({a_txt};{b_txt})",
                )
    A, b, labels = builder.ineq()
    E, d, eq_labels = builder.eq()
    return A, b, labels, E, d, eq_labels


@dataclass(frozen=True)
class IntervalScore:
    """Banded target for one sample: its Choquet score must land within
    delta of the sample's target."""

    sample: int  # 1-based index into the sample list
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if int(self.sample) < 1:
            raise ValueError("sample references are 1-based")
        object.__setattr__(self, "sample", int(self.sample))
        if not float(self.delta) > 0.0:
            raise ValueError("delta must be positive")
        object.__setattr__(self, "delta", float(self.delta))


def interval_rows(samples, interval_scores, n: int):
    """Two rows per interval score: the sample's Choquet value must stay
    within [y - delta, y + delta]."""
    m = (1 << n) - 2
    rows, offsets, labels = [], [], []
    for score in interval_scores:
        if not isinstance(score, IntervalScore):
            raise TypeError(f"expected IntervalScore, got {score!r}")
        if score.sample > len(samples):
            raise ValueError(
                f"interval score references sample {score.sample}, but "
                f"only {len(samples)} samples were given"
            )
        sample = samples[score.sample - 1]
        c, off = choquet_row(sample.scores)
        rows.append(c)
        offsets.append(off - sample.target - score.delta)
        labels.append(f"interval: sample {score.sample} <= y + {score.delta}")
        rows.append(-c)
        offsets.append(sample.target - score.delta - off)
        labels.append(f"interval: sample {score.sample} >= y - {score.delta}")
    if not rows:
        return np.zeros((0, m)), np.zeros(0), ()
    return np.array(rows), np.array(offsets), tuple(labels)


def _solve_projection(n, u0, A, b, labels, E, d, eq_labels):
    m = (1 << n) - 2
    problem = QPProblem(
        D=np.eye(m),
        c=-u0,
        A=A,
        b=b,
        E=E,
        d=d,
        lb=np.zeros(m),
        ub=np.ones(m),
        ineq_labels=labels,
        eq_labels=eq_labels or None,
    )
    return solve_qp(problem, x0=u0)


def identify_semantic(
    constraints=(),
    interval_scores=(),
    samples=(),
    n: int | None = None,
) -> IdentificationResult:
    """Project the equidistributed measure onto the stated constraints.

    With nothing to satisfy beyond monotonicity the result is exactly
    the equidistributed capacity. An infeasible statement set raises
    InfeasibleError whose report carries a greedy relaxation: user rows
    dropped worst-offender-first until the rest fits (monotonicity and
    range bounds are never dropped)."""
    samples = [
        s if isinstance(s, LearningSample) else LearningSample(*s)
        for s in samples
    ]
    if n is None:
        if samples:
            n = len(samples[0].scores)
        else:
            raise ValueError(
                "criterion count cannot be inferred; pass n explicitly"
            )
    n = int(n)
    if not 2 <= n <= MAX_SEMANTIC_CRITERIA:
        raise ValueError(
            f"semantic identification supports 2..{MAX_SEMANTIC_CRITERIA} "
            f"criteria, got {n}"
        )
    for sample in samples:
        if len(sample.scores) != n:
            raise ValueError("sample criterion count disagrees with n")
    for con in constraints:
        top = max(max(con.a), max(con.b))
        if top > n:
            raise ValueError(f"constraint mentions criterion {top} > n={n}")

    m = (1 << n) - 2
    u0 = np.array(
        [mask.bit_count() / n for mask in canonical_masks(n)], dtype=float
    )
    A_mono, b_mono, mono_labels = monotonicity_constraints(n)
    A_sem, b_sem, sem_labels, E, d, eq_labels = semantic_constraints(
        constraints, n
    )
    A_int, b_int, int_labels = interval_rows(samples, interval_scores, n)

    user_ineq = list(zip(list(A_sem) + list(A_int),
                         list(b_sem) + list(b_int),
                         list(sem_labels) + list(int_labels)))
    user_eq = (
        list(zip(list(E), list(d), list(eq_labels))) if E is not None else []
    )

    def assemble(ineq_subset, eq_subset):
        if ineq_subset:
            rows, offs, labs = zip(*ineq_subset)
            A = np.vstack([A_mono, np.array(rows)])
            b = np.concatenate([b_mono, np.array(offs)])
            labels = mono_labels + tuple(labs)
        else:
            A, b, labels = A_mono, b_mono, mono_labels
        if eq_subset:
            eq_rows, eq_offs, eq_labs = zip(*eq_subset)
            Em, dm, elabs = np.array(eq_rows), np.array(eq_offs), tuple(eq_labs)
        else:
            Em, dm, elabs = None, None, ()
        return A, b, labels, Em, dm, elabs

    solution = _solve_projection(n, u0, *assemble(user_ineq, user_eq))
    if solution.status == "infeasible":
        first_report = (solution.max_violation, list(solution.violated))
        dropped: list[str] = []
        ineq_left, eq_left = list(user_ineq), list(user_eq)
        current = solution
        while current.status == "infeasible" and (ineq_left or eq_left):
            violated_labels = [label for label, _ in current.violated]
            target = None
            for label in violated_labels:
                if any(lab == label for _, _, lab in ineq_left) or any(
                    lab == label for _, _, lab in eq_left
                ):
                    target = label
                    break
            if target is None:
                break
            ineq_left = [row for row in ineq_left if row[2] != target]
            eq_left = [row for row in eq_left if row[2] != target]
            dropped.append(target)
            current = _solve_projection(
                n, u0, *assemble(ineq_left, eq_left)
            )
        raise InfeasibleError(
            InfeasibilityReport(
                first_report[0],
                first_report[1],
                suggested_relaxation=dropped if dropped else None,
            )
        )
    if solution.status != "optimal":
        raise NumericError(
            f"projection did not converge (status {solution.status}, "
            f"kkt {solution.kkt.to_dict()})"
        )

    cap = _repair_and_build(n, solution.x)
    bad = validate(cap)
    if bad:
        raise NumericError(f"repaired capacity invalid: {bad[0].describe()}")
    u = cap.to_vector()

    A_all, b_all, labels_all, E_all, d_all, _ = assemble(user_ineq, user_eq)
    worst = float((A_all @ u + b_all).max(initial=0.0))
    if worst > ROW_CHECK_TOL:
        raise NumericError(f"constraint row violated by {worst:.3e}")
    if E_all is not None:
        worst_eq = float(np.abs(E_all @ u + d_all).max(initial=0.0))
        if worst_eq > ROW_CHECK_TOL:
            raise NumericError(f"equality row off by {worst_eq:.3e}")

    distance = float(0.5 * np.dot(u - u0, u - u0))
    return IdentificationResult(
        method="semantic",
        capacity=cap,
        status=solution.status,
        fit_error=None,
        objective=distance,
        kkt=solution.kkt,
        active_constraints=solution.active_labels,
        diagnostics={
            "distance_to_equidistributed": distance,
            "constraint_rows": int(len(user_ineq)),
            "equality_rows": int(len(user_eq)),
            "iterations": solution.iterations,
        },
    )


# --- JSON ingestion ---------------------------------------------------------


def constraints_from_json(data) -> list[LinguisticConstraint]:
    """Parse [{"kind": ..., "a": [...], "b": [...], "term"/"lo"/"hi"...}]."""
    if not isinstance(data, list):
        raise ValueError("constraints document must be a JSON array")
    out = []
    for k, rec in enumerate(data):
        if not isinstance(rec, dict):
            raise ValueError(f"constraint {k} must be an object")
        unknown = set(rec) - {"kind", "a", "b", "term", "lo", "hi", "two_sided"}
        if unknown:
            raise ValueError(
                f"constraint {k} has unknown fields {sorted(unknown)}"
            )
        try:
            out.append(
                LinguisticConstraint(
                    kind=rec.get("kind", ""),
                    a=tuple(rec.get("a", ())),
                    b=tuple(rec.get("b", ())),
                    term=rec.get("term"),
                    lo=rec.get("lo"),
                    hi=rec.get("hi"),
                    two_sided=bool(rec.get("two_sided", False)),
                )
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(f"constraint {k}: {exc}") from None
    return out


def interval_scores_from_json(data) -> list[IntervalScore]:
    """Parse [{"sample": 1, "delta": 0.35}, ...]."""
    if not isinstance(data, list):
        raise ValueError("interval scores document must be a JSON array")
    out = []
    for k, rec in enumerate(data):
        if not isinstance(rec, dict):
            raise ValueError(f"interval score {k} must be an object")
        unknown = set(rec) - {"sample", "delta"}
        if unknown:
            raise ValueError(
                f"interval score {k} has unknown fields {sorted(unknown)}"
            )
        if "sample" not in rec:
            raise ValueError(f"interval score {k} needs a sample reference")
        try:
            if "delta" in rec:
                out.append(IntervalScore(rec["sample"], rec["delta"]))
            else:
                out.append(IntervalScore(rec["sample"]))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"interval score {k}: {exc}") from None
    return out
