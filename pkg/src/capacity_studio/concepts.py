"""Concept evaluation: sub-criterion roll-up, global scores, ranking.

A design concept carries one normalized score per criterion plus binary
constraint-check outcomes. Its global score is the Choquet integral of
the criteria scores gated by the constraint checks: one failed check
zeroes the concept regardless of how well it scores elsewhere.
"""

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .capacity import Capacity, CriteriaVector, as_scores
from .choquet import choquet
from .errors import CapacityStructureError

DEFAULT_CRITERIA = ("MIQ", "RS", "CX", "FX", "CT")

WEIGHT_SUM_TOL = 1e-9


def aggregate_subcriteria(values: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted sum of sub-criterion values under designer weights.

    Weights must be nonnegative and sum to one; values live in [0, 1],
    so the aggregate does too.
    """
    vals = np.asarray(values, dtype=float)
    wts = np.asarray(weights, dtype=float)
    if vals.ndim != 1 or wts.ndim != 1 or vals.size != wts.size:
        raise ValueError(
            f"need matching value/weight vectors, got {vals.shape} and {wts.shape}"
        )
    if vals.size == 0:
        raise ValueError("no sub-criteria to aggregate")
    if not np.isfinite(wts).all() or (wts < 0.0).any():
        raise ValueError("weights must be finite and nonnegative")
    if abs(float(wts.sum()) - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights sum to {float(wts.sum())}, expected 1")
    if not np.isfinite(vals).all() or (vals < 0.0).any() or (vals > 1.0).any():
        raise ValueError("sub-criterion values must lie in [0, 1]")
    return float(np.clip(vals @ wts, 0.0, 1.0))


@dataclass(frozen=True)
class MMPProfile:
    """Sub-criterion breakdown for one concept.

    weights[name] and values[name] hold the weight vector and this
    concept's sub-criterion scores for criterion `name`; criteria fixes
    the roll-up order.
    """

    weights: Mapping[str, tuple[float, ...]]
    values: Mapping[str, tuple[float, ...]]
    criteria: tuple[str, ...] = DEFAULT_CRITERIA

    def __post_init__(self):
        names = tuple(str(c) for c in self.criteria)
        if len(set(names)) != len(names) or not names:
            raise ValueError("criterion names must be nonempty and unique")
        object.__setattr__(self, "criteria", names)
        object.__setattr__(
            self, "weights", {k: tuple(v) for k, v in dict(self.weights).items()}
        )
        object.__setattr__(
            self, "values", {k: tuple(v) for k, v in dict(self.values).items()}
        )
        for name in names:
            if name not in self.weights or name not in self.values:
                raise ValueError(f"criterion {name!r} missing weights or values")
            if len(self.weights[name]) != len(self.values[name]):
                raise ValueError(
                    f"criterion {name!r}: weight/value lengths differ"
                )

    def criterion_scores(self) -> CriteriaVector:
        """Roll each criterion's sub-criteria up into one score."""
        return CriteriaVector(
            tuple(
                aggregate_subcriteria(self.values[c], self.weights[c])
                for c in self.criteria
            )
        )


@dataclass(frozen=True)
class Concept:
    """A named design alternative with per-criterion scores and the
    outcomes of its declared constraint checks."""

    name: str
    values: CriteriaVector
    constraints_met: tuple[bool, ...] = (True,)

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.strip():
            raise ValueError("concept name must be a nonempty string")
        if not isinstance(self.values, CriteriaVector):
            object.__setattr__(self, "values", CriteriaVector(tuple(self.values)))
        gates = self.constraints_met
        if isinstance(gates, bool):
            gates = (gates,)
        checked = []
        for g in gates:
            if isinstance(g, bool):
                checked.append(g)
            elif isinstance(g, int) and g in (0, 1):
                checked.append(bool(g))
            else:
                raise ValueError(f"constraint outcome {g!r} is not binary")
        if not checked:
            raise ValueError("at least one constraint outcome is required")
        object.__setattr__(self, "constraints_met", tuple(checked))

    @property
    def n(self) -> int:
        return self.values.n

    @property
    def feasible(self) -> bool:
        return all(self.constraints_met)


def gcs(cap: Capacity, concept: Concept) -> float:
    """Global score of a concept: Choquet aggregate of its criteria
    scores times the product of its binary constraint outcomes."""
    if concept.n != cap.n:
        raise ValueError(
            f"concept has {concept.n} criteria, capacity expects {cap.n}"
        )
    if not concept.feasible:
        return 0.0
    return choquet(cap, concept.values)


@dataclass(frozen=True)
class RankedConcept:
    rank: int
    concept: Concept
    score: float

    @property
    def name(self) -> str:
        return self.concept.name

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "name": self.name,
            "score": self.score,
            "values": list(self.concept.values.values),
            "constraints_met": list(self.concept.constraints_met),
        }


def rank_concepts(cap: Capacity, concepts: Sequence[Concept]) -> list[RankedConcept]:
    """Score every concept and order best first.

    Ties break on the concept name so reruns and platforms agree.
    """
    pool = list(concepts)
    if not pool:
        raise ValueError("no concepts to rank")
    sizes = {c.n for c in pool}
    if len(sizes) != 1:
        raise ValueError(f"concepts disagree on criterion count: {sorted(sizes)}")
    scored = [(gcs(cap, c), c) for c in pool]
    scored.sort(key=lambda pair: (-pair[0], pair[1].name))
    return [
        RankedConcept(rank=i, concept=c, score=s)
        for i, (s, c) in enumerate(scored, start=1)
    ]


@dataclass(frozen=True)
class ConceptSet:
    """Concepts sharing one criterion space, as loaded from a file."""

    criteria: tuple[str, ...]
    concepts: tuple[Concept, ...]

    def __post_init__(self):
        names = tuple(str(c) for c in self.criteria)
        if not names or len(set(names)) != len(names):
            raise ValueError("criterion names must be nonempty and unique")
        object.__setattr__(self, "criteria", names)
        object.__setattr__(self, "concepts", tuple(self.concepts))
        for c in self.concepts:
            if c.n != len(names):
                raise ValueError(
                    f"concept {c.name!r} has {c.n} values for "
                    f"{len(names)} criteria"
                )

    @property
    def n(self) -> int:
        return len(self.criteria)


def concepts_from_dict(data: object) -> ConceptSet:
    if not isinstance(data, dict):
        raise CapacityStructureError("concepts document must be a JSON object")
    unknown = set(data) - {"criteria", "concepts"}
    if unknown:
        raise CapacityStructureError(f"unknown concepts fields {sorted(unknown)}")
    criteria = data.get("criteria")
    if (
        not isinstance(criteria, list)
        or not criteria
        or not all(isinstance(c, str) for c in criteria)
    ):
        raise CapacityStructureError("criteria must be a list of names")
    records = data.get("concepts")
    if not isinstance(records, list) or not records:
        raise CapacityStructureError("concepts must be a nonempty list")
    concepts = []
    for idx, rec in enumerate(records, start=1):
        if not isinstance(rec, dict):
            raise CapacityStructureError(f"concept {idx} is not an object")
        bad = set(rec) - {"name", "values", "constraints_met"}
        if bad:
            raise CapacityStructureError(
                f"concept {idx}: unknown fields {sorted(bad)}"
            )
        name = rec.get("name")
        values = rec.get("values")
        if not isinstance(name, str) or not name.strip():
            raise CapacityStructureError(f"concept {idx}: missing name")
        if not isinstance(values, list) or len(values) != len(criteria):
            raise CapacityStructureError(
                f"concept {name!r}: expected {len(criteria)} values"
            )
        for v in values:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise CapacityStructureError(
                    f"concept {name!r}: value {v!r} is not a number"
                )
            if not 0.0 <= float(v) <= 1.0:
                raise CapacityStructureError(
                    f"concept {name!r}: value {v} outside [0, 1]"
                )
        gates = rec.get("constraints_met", True)
        if isinstance(gates, list):
            if not all(isinstance(g, bool) for g in gates) or not gates:
                raise CapacityStructureError(
                    f"concept {name!r}: constraints_met must be booleans"
                )
            gates = tuple(gates)
        elif not isinstance(gates, bool):
            raise CapacityStructureError(
                f"concept {name!r}: constraints_met must be a bool or list"
            )
        try:
            concepts.append(
                Concept(name=name, values=CriteriaVector(tuple(values)),
                        constraints_met=gates)
            )
        except ValueError as exc:
            raise CapacityStructureError(f"concept {name!r}: {exc}") from None
    try:
        return ConceptSet(criteria=tuple(criteria), concepts=tuple(concepts))
    except ValueError as exc:
        raise CapacityStructureError(str(exc)) from None


def load_concepts(path: str) -> ConceptSet:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CapacityStructureError(f"{path}: not valid JSON ({exc})") from None
    return concepts_from_dict(data)
