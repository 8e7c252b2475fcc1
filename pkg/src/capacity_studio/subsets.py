"""Bitmask subsets of a criterion set and their canonical vector positions.

Criteria are numbered 1..n. A subset is a bitmask where bit (i - 1) set
means criterion i belongs to the subset. Capacity coefficient vectors
enumerate the nonempty proper subsets in a fixed order: cardinality
ascending, and lexicographic by the sorted element tuple within each
cardinality block. Positions are 1-based, so position 1 is {1} and
position 2**n - 2 is {2, .., n}.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

MAX_CRITERIA = 12


def full_mask(n: int) -> int:
    return (1 << n) - 1


def members(mask: int) -> tuple[int, ...]:
    """Elements of the subset, ascending."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def mask_of(elements: Iterable[int], n: int) -> int:
    """Bitmask of the given criteria, validating the 1..n range."""
    mask = 0
    for e in elements:
        if not isinstance(e, int) or isinstance(e, bool) or not 1 <= e <= n:
            raise ValueError(f"criterion index {e!r} outside 1..{n}")
        bit = 1 << (e - 1)
        if mask & bit:
            raise ValueError(f"criterion index {e} repeated")
        mask |= bit
    return mask


def size(mask: int) -> int:
    return mask.bit_count()


@dataclass(frozen=True)
class CriterionSet:
    """A subset of the criteria 1..n, stored as an n-bit mask."""

    mask: int
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_CRITERIA:
            raise ValueError(f"criterion count {self.n} outside 1..{MAX_CRITERIA}")
        if not 0 <= self.mask < (1 << self.n):
            raise ValueError(
                f"mask {self.mask:#x} has bits beyond criterion {self.n}"
            )

    @classmethod
    def of(cls, elements: Iterable[int], n: int) -> "CriterionSet":
        return cls(mask_of(elements, n), n)

    @property
    def members(self) -> tuple[int, ...]:
        return members(self.mask)

    @property
    def size(self) -> int:
        return self.mask.bit_count()


@lru_cache(maxsize=None)
def _order(n: int) -> tuple[tuple[int, ...], dict]:
    """Canonical mask order and its inverse for one criterion count."""
    if not 1 <= n <= MAX_CRITERIA:
        raise ValueError(f"criterion count {n} outside 1..{MAX_CRITERIA}")
    masks = []
    for k in range(1, n):
        for combo in combinations(range(1, n + 1), k):
            masks.append(mask_of(combo, n))
    position = {m: p for p, m in enumerate(masks, start=1)}
    return tuple(masks), position


def subset_position(s: "CriterionSet | int", n: int | None = None) -> int:
    """1-based position of a nonempty proper subset in the canonical order.

    Accepts a CriterionSet, or a raw mask together with n."""
    if isinstance(s, CriterionSet):
        mask, n = s.mask, s.n
    else:
        if n is None:
            raise TypeError("subset_position needs n when given a raw mask")
        mask = s
    _, position = _order(n)
    pos = position.get(mask)
    if pos is None:
        raise ValueError(
            f"mask {mask:#x} is not a nonempty proper subset of 1..{n}"
        )
    return pos


def position_subset(pos: int, n: int) -> int:
    """Inverse of subset_position."""
    masks, _ = _order(n)
    if not 1 <= pos <= len(masks):
        raise ValueError(f"position {pos} outside 1..{len(masks)}")
    return masks[pos - 1]


def canonical_masks(n: int) -> tuple[int, ...]:
    """All nonempty proper subset masks in canonical order."""
    return _order(n)[0]


def format_subset(mask: int) -> str:
    """Comma-joined ascending element list, e.g. '1,3,5'."""
    return ",".join(str(e) for e in members(mask))


def parse_subset(text: str, n: int) -> int:
    """Parse '1,3,5' into a mask, validating range and duplicates."""
    parts = [p.strip() for p in text.split(",")]
    if any(not p for p in parts):
        raise ValueError(f"malformed subset key {text!r}")
    try:
        elements: Sequence[int] = [int(p) for p in parts]
    except ValueError:
        raise ValueError(f"malformed subset key {text!r}") from None
    return mask_of(elements, n)
