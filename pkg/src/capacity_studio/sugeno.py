"""Lambda-measure identification from singleton densities.

Given densities mu_1..mu_n in (0, 1), the measure of every other subset
follows from the single parameter lambda solving

    1 + lambda = prod_i (1 + lambda * mu_i),   lambda > -1.

lambda = 0 is always a root; the informative root is the unique nonzero
one, which exists on the side dictated by the density total: sum > 1
pulls lambda into (-1, 0), sum < 1 pushes it into (0, inf), and sum = 1
collapses to the additive measure lambda = 0. The solver brackets that
root and bisects, then polishes with damped Newton steps.
"""

from dataclasses import dataclass

import numpy as np

from .capacity import Capacity, DEFAULT_TOL, validate
from .errors import CapacityStructureError, ConsistencyError, NumericError
from .results import IdentificationResult

SUM_ONE_TOL = 1e-12
RESIDUAL_TOL = 1e-12
LATTICE_TOP_TOL = 1e-4
BRACKET_CAP = 1e18


@dataclass(frozen=True)
class SingletonDensities:
    """Densities mu_i indexed by criterion, each strictly inside (0, 1)."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise CapacityStructureError("need at least two densities")
        for i, v in enumerate(vals):
            if not np.isfinite(v) or not 0.0 < v < 1.0:
                raise CapacityStructureError(
                    f"density of criterion {i + 1} must lie strictly in "
                    f"(0, 1), got {v!r}"
                )
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def total(self) -> float:
        return float(sum(self.values))


@dataclass(frozen=True)
class LambdaSolution:
    lam: float
    branch: str  # "negative" | "zero" | "positive"
    residual: float
    iterations: int


def _characteristic(densities, lam: float) -> float:
    prod = 1.0
    for v in densities:
        prod *= 1.0 + lam * v
    return prod - (1.0 + lam)


def _characteristic_prime(densities, lam: float) -> float:
    factors = [1.0 + lam * v for v in densities]
    total = 0.0
    for i, v in enumerate(densities):
        prod = v
        for j, f in enumerate(factors):
            if j != i:
                prod *= f
        total += prod
    return total - 1.0


def _deflated(densities, lam: float) -> float:
    # (prod(1 + lam mu_i) - 1) / lam - 1: removes the trivial root at 0
    # and is strictly increasing, so a sign change brackets the answer.
    if lam == 0.0:
        return sum(densities) - 1.0
    prod = 1.0
    for v in densities:
        prod *= 1.0 + lam * v
    return (prod - 1.0) / lam - 1.0


def solve_lambda(densities: SingletonDensities | tuple[float, ...]) -> LambdaSolution:
    """The nonzero root of the characteristic equation (or 0 on the
    additive knife edge |sum mu_i - 1| < 1e-12)."""
    if not isinstance(densities, SingletonDensities):
        densities = SingletonDensities(tuple(densities))
    vals = densities.values
    total = densities.total

    if abs(total - 1.0) < SUM_ONE_TOL:
        return LambdaSolution(0.0, "zero", abs(_characteristic(vals, 0.0)), 0)

    if total > 1.0:
        branch = "negative"
        lo, hi = -1.0, 0.0
        flo = _deflated(vals, lo)
        fhi = total - 1.0
        if not (flo < 0.0 < fhi):
            raise NumericError(
                f"no sign change for lambda in (-1, 0); densities sum to {total}"
            )
    else:
        branch = "positive"
        lo, flo = 0.0, total - 1.0
        hi = 1.0
        fhi = _deflated(vals, hi)
        while fhi < 0.0:
            hi *= 2.0
            if hi > BRACKET_CAP:
                raise NumericError(
                    "failed to bracket lambda below 1e18; densities are "
                    "too close to degenerate"
                )
            fhi = _deflated(vals, hi)

    iterations = 0
    for _ in range(200):
        iterations += 1
        mid = 0.5 * (lo + hi)
        fmid = _deflated(vals, mid)
        if fmid == 0.0:
            lo = hi = mid
            break
        if fmid < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(lo), abs(hi)):
            break

    lam = 0.5 * (lo + hi)
    # Damped Newton polish on the undeflated equation, kept inside the
    # bracket so a flat derivative cannot throw the iterate away.
    for _ in range(8):
        f = _characteristic(vals, lam)
        fp = _characteristic_prime(vals, lam)
        if fp == 0.0:
            break
        step = f / fp
        candidate = lam - step
        damping = 1.0
        while not (lo - 1e-12 <= candidate <= hi + 1e-12) and damping > 1e-6:
            damping *= 0.5
            candidate = lam - damping * step
        if candidate == lam:
            break
        lam = candidate
        iterations += 1
        if abs(_characteristic(vals, lam)) < 1e-16:
            break

    residual = abs(_characteristic(vals, lam)) / (1.0 + abs(lam))
    if residual >= RESIDUAL_TOL:
        raise NumericError(
            f"lambda solve stalled with residual {residual:.3e}"
        )
    if branch == "negative" and not -1.0 < lam < 0.0:
        raise NumericError(f"lambda {lam} escaped (-1, 0)")
    if branch == "positive" and lam <= 0.0:
        raise NumericError(f"lambda {lam} escaped (0, inf)")
    return LambdaSolution(float(lam), branch, float(residual), iterations)


def build_lattice(
    densities: SingletonDensities | tuple[float, ...], lam: float
) -> Capacity:
    """Every subset value from the fold
    mu(A + {i}) = mu(A) + mu_i + lambda mu(A) mu_i, applied in ascending
    criterion order (the result is order independent)."""
    if not isinstance(densities, SingletonDensities):
        densities = SingletonDensities(tuple(densities))
    n = densities.n
    vals = densities.values
    size = 1 << n
    out = np.zeros(size)
    for mask in range(1, size):
        low = mask & -mask
        i = low.bit_length() - 1
        rest = out[mask ^ low]
        out[mask] = rest + vals[i] + lam * rest * vals[i]
    top = out[size - 1]
    if abs(top - 1.0) > LATTICE_TOP_TOL:
        raise ConsistencyError(
            f"lambda-measure reaches mu(N) = {top:.6f}, out of tolerance "
            f"{LATTICE_TOP_TOL} from 1; lambda and densities disagree"
        )
    out[size - 1] = 1.0
    np.clip(out, 0.0, 1.0, out=out)
    return Capacity(n=n, values=out)


def identify_sugeno(
    densities: SingletonDensities | tuple[float, ...],
) -> IdentificationResult:
    """Fit the one-parameter measure through the given densities."""
    if not isinstance(densities, SingletonDensities):
        densities = SingletonDensities(tuple(densities))
    solution = solve_lambda(densities)
    cap = build_lattice(densities, solution.lam)
    violations = validate(cap, tol=DEFAULT_TOL)
    if violations:
        raise ConsistencyError(
            f"identified measure failed validation: {violations[0].describe()}"
        )
    return IdentificationResult(
        method="sugeno",
        capacity=cap,
        status="optimal",
        fit_error=None,
        objective=None,
        diagnostics={
            "lambda": solution.lam,
            "branch": solution.branch,
            "residual": solution.residual,
            "iterations": solution.iterations,
        },
    )
