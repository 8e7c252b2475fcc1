"""Capacities (fuzzy measures) on a finite criterion set.

A capacity assigns a weight to every subset of criteria, with the empty set
at 0, the full set at 1, and monotonicity under inclusion: A subset of B
implies mu(A) <= mu(B). The weight of a coalition is read as the joint
importance of its criteria, and it need not be additive.
"""

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityStructureError
from .subsets import (
    MAX_CRITERIA,
    canonical_masks,
    format_subset,
    full_mask,
    parse_subset,
    subset_position,
)

DEFAULT_TOL = 1e-9


def tolerance(default: float = DEFAULT_TOL) -> float:
    """Numeric comparison tolerance, overridable via CAPACITY_STUDIO_TOL."""
    raw = os.environ.get("CAPACITY_STUDIO_TOL")
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise CapacityStructureError(
            f"CAPACITY_STUDIO_TOL is not a number: {raw!r}"
        ) from None
    if not 0 <= value < 1:
        raise CapacityStructureError(
            f"CAPACITY_STUDIO_TOL outside [0, 1): {value}"
        )
    return value


@dataclass(frozen=True)
class CriteriaVector:
    """One alternative's scores, one per criterion, each in [0, 1]."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("criteria vector is empty")
        for i, v in enumerate(vals, start=1):
            if not np.isfinite(v) or not 0.0 <= v <= 1.0:
                raise ValueError(f"score {v!r} at criterion {i} outside [0, 1]")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.values)


def as_scores(f: "CriteriaVector | Sequence[float]") -> tuple[float, ...]:
    """Normalize a scores argument, validating range."""
    if isinstance(f, CriteriaVector):
        return f.values
    return CriteriaVector(tuple(f)).values


@dataclass(frozen=True)
class Capacity:
    """A capacity stored densely: values[mask] = mu(subset)."""

    n: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 2 <= self.n <= MAX_CRITERIA:
            raise CapacityStructureError(
                f"criterion count {self.n} outside 2..{MAX_CRITERIA}"
            )
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.shape != (1 << self.n,):
            raise CapacityStructureError(
                f"expected {1 << self.n} coefficients for n={self.n}, "
                f"got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise CapacityStructureError("capacity has non-finite coefficients")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_vector(cls, n: int, u: Sequence[float]) -> "Capacity":
        """Build from the canonical coefficient vector (length 2**n - 2)."""
        u = np.asarray(u, dtype=float)
        masks = canonical_masks(n)
        if u.shape != (len(masks),):
            raise CapacityStructureError(
                f"expected coefficient vector of length {len(masks)}, "
                f"got shape {u.shape}"
            )
        values = np.zeros(1 << n)
        values[list(masks)] = u
        values[full_mask(n)] = 1.0
        return cls(n, values)

    @classmethod
    def from_subset_values(
        cls, n: int, coefficients: Mapping[frozenset | tuple, float]
    ) -> "Capacity":
        """Build from {iterable-of-criteria: value} for all nonempty proper
        subsets. The full set may be given but must equal 1."""
        from .subsets import mask_of

        values = np.zeros(1 << n)
        top = full_mask(n)
        values[top] = 1.0
        seen = set()
        for key, val in coefficients.items():
            mask = mask_of(sorted(key), n)
            if mask == 0:
                raise CapacityStructureError("empty set must be omitted")
            if mask in seen:
                raise CapacityStructureError(f"subset {sorted(key)} repeated")
            seen.add(mask)
            if mask == top:
                if abs(float(val) - 1.0) > tolerance():
                    raise CapacityStructureError(
                        f"full-set coefficient must equal 1, got {val}"
                    )
                continue
            values[mask] = float(val)
        missing = set(canonical_masks(n)) - seen
        if missing:
            worst = format_subset(min(missing, key=lambda m: subset_position(m, n)))
            raise CapacityStructureError(
                f"{len(missing)} subset coefficients missing, e.g. {{{worst}}}"
            )
        return cls(n, values)

    def value(self, subset: Iterable[int] | int) -> float:
        """mu of a subset given as a mask or an iterable of criteria."""
        if isinstance(subset, (int, np.integer)) and not isinstance(subset, bool):
            mask = int(subset)
            if not 0 <= mask < (1 << self.n):
                raise ValueError(f"mask {mask:#x} outside the subset range")
        else:
            from .subsets import mask_of

            mask = mask_of(subset, self.n)
        return float(self.values[mask])

    def singletons(self) -> tuple[float, ...]:
        return tuple(float(self.values[1 << i]) for i in range(self.n))

    def to_vector(self) -> np.ndarray:
        """Canonical coefficient vector (length 2**n - 2), writable copy."""
        return self.values[list(canonical_masks(self.n))].copy()


@dataclass(frozen=True)
class Violation:
    """One failed capacity axiom: a boundary value off its target or a
    subset pair ordered against inclusion."""

    kind: str  # "boundary" or "monotonicity"
    subset: tuple[int, ...]
    superset: tuple[int, ...] | None
    gap: float

    def describe(self) -> str:
        a = "{" + ",".join(map(str, self.subset)) + "}"
        if self.kind == "boundary":
            return f"boundary: mu({a}) off by {self.gap:.6g}"
        b = "{" + ",".join(map(str, self.superset)) + "}"
        return f"monotonicity: mu({a}) > mu({b}) by {self.gap:.6g}"


def validate(cap: Capacity, tol: float | None = None) -> list[Violation]:
    """All axiom violations beyond tol: boundary values and every adjacent
    subset pair (A, A + {i}) ordered against inclusion. Empty means valid."""
    from .subsets import members

    if tol is None:
        tol = tolerance()
    out: list[Violation] = []
    vals = cap.values
    n = cap.n
    if abs(vals[0]) > tol:
        out.append(Violation("boundary", (), None, abs(float(vals[0]))))
    top = full_mask(n)
    if abs(vals[top] - 1.0) > tol:
        out.append(
            Violation("boundary", members(top), None, abs(float(vals[top] - 1.0)))
        )
    for mask in range(1 << n):
        for i in range(n):
            bit = 1 << i
            if mask & bit:
                continue
            gap = vals[mask] - vals[mask | bit]
            if gap > tol:
                out.append(
                    Violation(
                        "monotonicity",
                        members(mask),
                        members(mask | bit),
                        float(gap),
                    )
                )
    value_min = float(vals.min())
    value_max = float(vals.max())
    # Range violations surface through the adjacent chain to 0 and 1, but a
    # direct check keeps the report sharp when interior values escape [0, 1].
    if value_min < -tol or value_max > 1.0 + tol:
        for mask in range(1, 1 << n):
            if vals[mask] < -tol:
                out.append(
                    Violation("boundary", members(mask), None, float(-vals[mask]))
                )
            elif vals[mask] > 1.0 + tol and mask != top:
                out.append(
                    Violation(
                        "boundary", members(mask), None, float(vals[mask] - 1.0)
                    )
                )
    return out


def is_valid(cap: Capacity, tol: float | None = None) -> bool:
    return not validate(cap, tol)


def equidistributed(n: int) -> Capacity:
    """The additive uniform capacity mu(A) = |A| / n."""
    values = np.array([m.bit_count() / n for m in range(1 << n)])
    return Capacity(n, values)


def additive(weights: Sequence[float]) -> Capacity:
    """Additive capacity from nonnegative weights summing to 1."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise CapacityStructureError("weights must be a nonempty vector")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise CapacityStructureError("weights must be nonnegative and sum to 1")
    n = w.size
    values = np.zeros(1 << n)
    for mask in range(1, 1 << n):
        low = mask & (mask - 1)
        values[mask] = values[low] + w[(mask ^ low).bit_length() - 1]
    values[full_mask(n)] = 1.0
    return Capacity(n, values)


# --- JSON interchange ----------------------------------------------------
#
# {"n": 5, "coefficients": {"1": 0.22, "1,2": 0.46, ...}}
#
# Keys are comma-joined ascending criterion indices. The empty set is
# omitted; the full set is optional on input and must equal 1 when present.


def capacity_to_dict(cap: Capacity) -> dict:
    coeffs = {}
    for mask in canonical_masks(cap.n):
        coeffs[format_subset(mask)] = float(cap.values[mask])
    coeffs[format_subset(full_mask(cap.n))] = 1.0
    return {"n": cap.n, "coefficients": coeffs}


def capacity_from_dict(data: object) -> Capacity:
    if not isinstance(data, dict):
        raise CapacityStructureError("capacity document must be a JSON object")
    unknown = set(data) - {"n", "coefficients"}
    if unknown:
        raise CapacityStructureError(f"unknown capacity fields {sorted(unknown)}")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or not 2 <= n <= MAX_CRITERIA:
        raise CapacityStructureError(
            f"criterion count must be an int in 2..{MAX_CRITERIA}, got {n!r}"
        )
    coeffs = data.get("coefficients")
    if not isinstance(coeffs, dict):
        raise CapacityStructureError("coefficients must be an object")
    values = np.zeros(1 << n)
    values[full_mask(n)] = 1.0
    seen = set()
    for key, val in coeffs.items():
        try:
            mask = parse_subset(key, n)
        except ValueError as exc:
            raise CapacityStructureError(str(exc)) from None
        if mask in seen:
            raise CapacityStructureError(f"subset key {key!r} repeated")
        seen.add(mask)
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise CapacityStructureError(f"coefficient {key!r} is not a number")
        val = float(val)
        if not np.isfinite(val) or not 0.0 <= val <= 1.0:
            raise CapacityStructureError(
                f"coefficient {key!r} = {val} outside [0, 1]"
            )
        values[mask] = val
    top = full_mask(n)
    if top in seen:
        if abs(values[top] - 1.0) > tolerance():
            raise CapacityStructureError(
                f"full-set coefficient must equal 1, got {values[top]}"
            )
        values[top] = 1.0
        seen.remove(top)
    missing = set(canonical_masks(n)) - seen
    if missing:
        worst = format_subset(min(missing, key=lambda m: subset_position(m, n)))
        raise CapacityStructureError(
            f"{len(missing)} subset coefficients missing, e.g. {worst!r}"
        )
    return Capacity(n, values)


def densities_from_dict(data: object) -> tuple[float, ...]:
    """Singleton densities from the capacity format restricted to
    singleton keys. Returns the density of criterion i at index i - 1."""
    if not isinstance(data, dict):
        raise CapacityStructureError("density document must be a JSON object")
    unknown = set(data) - {"n", "coefficients"}
    if unknown:
        raise CapacityStructureError(f"unknown density fields {sorted(unknown)}")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or not 2 <= n <= MAX_CRITERIA:
        raise CapacityStructureError(
            f"criterion count must be an int in 2..{MAX_CRITERIA}, got {n!r}"
        )
    coeffs = data.get("coefficients")
    if not isinstance(coeffs, dict):
        raise CapacityStructureError("coefficients must be an object")
    out = [None] * n
    for key, val in coeffs.items():
        try:
            mask = parse_subset(key, n)
        except ValueError as exc:
            raise CapacityStructureError(str(exc)) from None
        if mask.bit_count() != 1:
            raise CapacityStructureError(
                f"density files carry singleton keys only, got {key!r}"
            )
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise CapacityStructureError(f"density {key!r} is not a number")
        val = float(val)
        if not np.isfinite(val) or not 0.0 <= val <= 1.0:
            raise CapacityStructureError(f"density {key!r} = {val} outside [0, 1]")
        idx = mask.bit_length() - 1
        if out[idx] is not None:
            raise CapacityStructureError(f"density key {key!r} repeated")
        out[idx] = val
    if any(v is None for v in out):
        missing = [str(i + 1) for i, v in enumerate(out) if v is None]
        raise CapacityStructureError(
            f"densities missing for criteria {', '.join(missing)}"
        )
    return tuple(out)


def dumps_capacity(cap: Capacity) -> str:
    """Canonical, byte-stable JSON text for a capacity."""
    return canonical_json(capacity_to_dict(cap))


def canonical_json(obj: object) -> str:
    """Deterministic JSON: preserved key order, two-space indent, repr
    floats, trailing newline."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def load_capacity(path: str) -> Capacity:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CapacityStructureError(f"{path}: not valid JSON ({exc})") from None
    return capacity_from_dict(data)


def load_densities(path: str) -> tuple[float, ...]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CapacityStructureError(f"{path}: not valid JSON ({exc})") from None
    return densities_from_dict(data)


def save_capacity(cap: Capacity, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_capacity(cap))
