"""Shapley importance, pairwise interaction, and capacity semantics.

The Shapley value of criterion i averages its marginal contribution
mu(T + {i}) - mu(T) over all coalitions T not containing i, weighted by
(n - t - 1)! t! / n! where t = |T|. The values sum to 1. Scaled by n they
read against 1: n phi_i > 1 marks an attribute more important than average.

The interaction index of a pair {i, j} averages the second difference
mu(T + {i,j}) - mu(T + {i}) - mu(T + {j}) + mu(T) over coalitions T
avoiding both, weighted by (n - t - 2)! t! / (n - 1)!. It lives in [-1, 1];
positive means complementary criteria, negative redundant ones, zero
(for all pairs) additivity.

Both indices are linear in the capacity coefficients; the expansion
matrices used to build linear constraints live here too.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .capacity import Capacity, tolerance
from .subsets import canonical_masks, full_mask, members, subset_position


@lru_cache(maxsize=None)
def _shapley_weights(n: int) -> tuple[float, ...]:
    return tuple(
        factorial(n - t - 1) * factorial(t) / factorial(n) for t in range(n)
    )


@lru_cache(maxsize=None)
def _interaction_weights(n: int) -> tuple[float, ...]:
    return tuple(
        factorial(n - t - 2) * factorial(t) / factorial(n - 1)
        for t in range(n - 1)
    )


def shapley(cap: Capacity) -> np.ndarray:
    """Shapley importance of every criterion."""
    n = cap.n
    weights = _shapley_weights(n)
    vals = cap.values
    phi = np.zeros(n)
    for i in range(n):
        bit = 1 << i
        acc = 0.0
        for mask in range(1 << n):
            if mask & bit:
                continue
            acc += weights[mask.bit_count()] * (vals[mask | bit] - vals[mask])
        phi[i] = acc
    return phi


def interaction(cap: Capacity, i: int, j: int) -> float:
    """Interaction index of the pair {i, j} (1-based, distinct)."""
    n = cap.n
    if i == j:
        raise ValueError("interaction needs two distinct criteria")
    if not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"criteria {i}, {j} outside 1..{n}")
    bi, bj = 1 << (i - 1), 1 << (j - 1)
    weights = _interaction_weights(n)
    vals = cap.values
    acc = 0.0
    for mask in range(1 << n):
        if mask & (bi | bj):
            continue
        acc += weights[mask.bit_count()] * (
            vals[mask | bi | bj] - vals[mask | bi] - vals[mask | bj] + vals[mask]
        )
    return float(acc)


def interaction_matrix(cap: Capacity) -> np.ndarray:
    """Symmetric matrix of pair interactions, zero diagonal."""
    n = cap.n
    out = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            out[i - 1, j - 1] = out[j - 1, i - 1] = interaction(cap, i, j)
    return out


# --- linear expansions ----------------------------------------------------
#
# With u the canonical coefficient vector (nonempty proper subsets) and
# mu(empty) = 0, mu(full) = 1 fixed, both indices are affine in u:
# phi = S u + s0 and I_ij = q_ij . u + r_ij.


@lru_cache(maxsize=None)
def shapley_expansion(n: int) -> tuple[np.ndarray, np.ndarray]:
    """(S, s0) with shapley(cap) == S @ u + s0 for u = cap.to_vector()."""
    weights = _shapley_weights(n)
    m = (1 << n) - 2
    top = full_mask(n)
    S = np.zeros((n, m))
    s0 = np.zeros(n)
    for i in range(n):
        bit = 1 << i
        for mask in range(1 << n):
            if mask & bit:
                continue
            w = weights[mask.bit_count()]
            grown = mask | bit
            if grown == top:
                s0[i] += w
            else:
                S[i, subset_position(grown, n) - 1] += w
            if mask:
                S[i, subset_position(mask, n) - 1] -= w
    return S, s0


@lru_cache(maxsize=None)
def interaction_expansion(n: int, i: int, j: int) -> tuple[np.ndarray, float]:
    """(q, r) with interaction(cap, i, j) == q @ u + r."""
    if i == j or not (1 <= i <= n and 1 <= j <= n):
        raise ValueError(f"bad pair ({i}, {j}) for n={n}")
    weights = _interaction_weights(n)
    bi, bj = 1 << (i - 1), 1 << (j - 1)
    top = full_mask(n)
    q = np.zeros((1 << n) - 2)
    r = 0.0
    for mask in range(1 << n):
        if mask & (bi | bj):
            continue
        w = weights[mask.bit_count()]
        both = mask | bi | bj
        if both == top:
            r += w
        else:
            q[subset_position(both, n) - 1] += w
        q[subset_position(mask | bi, n) - 1] -= w
        q[subset_position(mask | bj, n) - 1] -= w
        if mask:
            q[subset_position(mask, n) - 1] += w
    return q, r


# --- 2-additivity ----------------------------------------------------------


@dataclass(frozen=True)
class TwoAdditiveReport:
    """Residuals of the three conditions a capacity determined by its
    singleton and pair coefficients must satisfy."""

    ok: bool
    normality_residual: float
    negativity_residuals: tuple[tuple[tuple[int, ...], float], ...]
    monotonicity_residuals: tuple[tuple[tuple[int, ...], int, float], ...]
    tol: float


def is_two_additive(cap: Capacity, tol: float | None = None) -> TwoAdditiveReport:
    """Check the singleton/pair description of the capacity for
    2-additivity.

    Three conditions, reported with their residuals:
      normality      sum_pairs mu(ij) - (n - 2) sum_i mu(i) = 1
      non-negativity mu(i) >= 0 for every singleton
      monotonicity   sum_{j in A} (mu(kj) - mu(j)) >= (|A| - 2) mu(k)
                     for every subset A with |A| >= 2 and every k in A
    """
    if tol is None:
        tol = tolerance(1e-9)
    n = cap.n
    vals = cap.values
    single = {i: float(vals[1 << (i - 1)]) for i in range(1, n + 1)}
    pair = {
        (i, j): float(vals[(1 << (i - 1)) | (1 << (j - 1))])
        for i in range(1, n + 1)
        for j in range(i + 1, n + 1)
    }

    lhs = sum(pair.values()) - (n - 2) * sum(single.values())
    normality = abs(lhs - 1.0)

    negativity = tuple(
        ((i,), -single[i]) for i in range(1, n + 1) if single[i] < -tol
    )

    mono: list[tuple[tuple[int, ...], int, float]] = []
    for mask in range(1, 1 << n):
        elems = members(mask)
        if len(elems) < 2:
            continue
        for k in elems:
            acc = 0.0
            for j in elems:
                if j == k:
                    continue
                key = (k, j) if k < j else (j, k)
                acc += pair[key] - single[j]
            shortfall = (len(elems) - 2) * single[k] - acc
            if shortfall > tol:
                mono.append((elems, k, float(shortfall)))

    ok = normality <= tol and not negativity and not mono
    return TwoAdditiveReport(ok, float(normality), negativity, tuple(mono), tol)


# --- pair and criterion semantics ------------------------------------------


@dataclass(frozen=True)
class PairSemantics:
    """Reading of a capacity's structure: one label per criterion pair plus
    veto and pass flags per criterion."""

    n: int
    labels: dict
    veto: tuple[bool, ...]
    pass_effect: tuple[bool, ...]
    tol: float


def classify_pairs(cap: Capacity, tol: float = 0.05) -> PairSemantics:
    """Label each pair by how its joint weight compares with the sum of its
    parts: above means the pair covers what the parts miss alone
    (negative correlation between criteria), below means overlap
    (positive correlation), inside the band means independence.

    A criterion is a veto when every coalition without it carries no
    weight, and a favor (pass) criterion when every coalition with it
    carries full weight."""
    n = cap.n
    vals = cap.values
    labels = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            joint = vals[(1 << (i - 1)) | (1 << (j - 1))]
            parts = vals[1 << (i - 1)] + vals[1 << (j - 1)]
            if joint > parts + tol:
                labels[(i, j)] = "negative-correlation"
            elif joint < parts - tol:
                labels[(i, j)] = "positive-correlation"
            else:
                labels[(i, j)] = "independent"

    veto = []
    pass_effect = []
    proper = canonical_masks(n)
    for i in range(1, n + 1):
        bit = 1 << (i - 1)
        veto.append(all(vals[m] <= tol for m in proper if not m & bit))
        pass_effect.append(all(vals[m] >= 1.0 - tol for m in proper if m & bit))
    return PairSemantics(n, labels, tuple(veto), tuple(pass_effect), tol)


@dataclass(frozen=True)
class IndexReport:
    """Shapley vector, scaled Shapley vector, interaction matrix, and pair
    semantics of one capacity."""

    n: int
    shapley: tuple[float, ...]
    shapley_scaled: tuple[float, ...]
    interactions: np.ndarray
    semantics: PairSemantics

    def to_dict(self) -> dict:
        inter = {}
        for i in range(1, self.n + 1):
            for j in range(i + 1, self.n + 1):
                inter[f"{i},{j}"] = float(self.interactions[i - 1, j - 1])
        return {
            "shapley": list(self.shapley),
            "shapley_scaled": list(self.shapley_scaled),
            "interactions": inter,
            "pair_labels": {
                f"{i},{j}": label for (i, j), label in self.semantics.labels.items()
            },
            "veto": list(self.semantics.veto),
            "pass": list(self.semantics.pass_effect),
        }


def index_report(cap: Capacity, tol: float = 0.05) -> IndexReport:
    phi = shapley(cap)
    return IndexReport(
        cap.n,
        tuple(float(x) for x in phi),
        tuple(float(x) * cap.n for x in phi),
        interaction_matrix(cap),
        classify_pairs(cap, tol),
    )
