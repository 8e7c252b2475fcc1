"""Discrete Choquet integral of a score vector against a capacity.

Sort the scores ascending, then accumulate each increment weighted by the
capacity of the tail coalition that attains at least that score:

    C(f) = sum_i (f(x_(i)) - f(x_(i-1))) * mu({x_(i), .., x_(n)})

with f(x_(0)) = 0. Equal scores are ordered by ascending criterion index;
the integral's value does not depend on how ties are broken because tied
increments are zero.
"""

from typing import Sequence

import numpy as np

from .capacity import Capacity, CriteriaVector, as_scores
from .subsets import full_mask


def ascending_order(f: Sequence[float]) -> tuple[int, ...]:
    """Criteria (1-based) sorted by ascending score, ties by index."""
    return tuple(
        sorted(range(1, len(f) + 1), key=lambda i: (f[i - 1], i))
    )


def tail_masks(order: Sequence[int], n: int) -> tuple[int, ...]:
    """Masks of the suffix coalitions {x_(i), .., x_(n)} for i = 1..n."""
    masks = []
    mask = full_mask(n)
    for crit in order:
        masks.append(mask)
        mask &= ~(1 << (crit - 1))
    return tuple(masks)


def choquet(cap: Capacity, f: "CriteriaVector | Sequence[float]") -> float:
    """Choquet integral of the scores f against the capacity."""
    scores = as_scores(f)
    if len(scores) != cap.n:
        raise ValueError(
            f"expected {cap.n} scores, got {len(scores)}"
        )
    order = ascending_order(scores)
    total = 0.0
    previous = 0.0
    for crit, mask in zip(order, tail_masks(order, cap.n)):
        value = scores[crit - 1]
        total += (value - previous) * cap.values[mask]
        previous = value
    return float(total)


def two_additive_choquet(
    shapley: Sequence[float],
    interactions: np.ndarray,
    f: "CriteriaVector | Sequence[float]",
) -> float:
    """Choquet integral of a 2-additive capacity from its indices alone:

        C(f) = sum_i phi_i f_i - 1/2 sum_{i<j} I_ij |f_i - f_j|

    interactions is a symmetric n-by-n matrix with the pair indices off the
    diagonal. Equivalent to the lattice form whenever the capacity is
    2-additive."""
    scores = np.asarray(as_scores(f))
    phi = np.asarray(shapley, dtype=float)
    inter = np.asarray(interactions, dtype=float)
    n = scores.size
    if phi.shape != (n,) or inter.shape != (n, n):
        raise ValueError("index shapes do not match the score vector")
    total = float(phi @ scores)
    for i in range(n):
        for j in range(i + 1, n):
            total -= 0.5 * inter[i, j] * abs(scores[i] - scores[j])
    return total
