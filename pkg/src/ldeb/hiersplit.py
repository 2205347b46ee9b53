"""Hierarchical binary split-sets over encoded emotion values.

A split specification is an ordered list of disjoint value sets, one per
level.  Level k sees only the dialogues whose value was not claimed by an
earlier level; within a level, value-in-set is class 0 and everything else
is class 1.  Routing a value through the levels ends at the first level
that claims it, or at the residual leaf after the last level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .encoding import MAX_VALUE
from .exceptions import EmptySplitSetError, InvalidSplitSpecError, OutOfRangeError


@dataclass(frozen=True)
class SplitSpec:
    """Ordered disjoint sets of encoded values, one per cascade level."""

    levels: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        levels = tuple(frozenset(s) for s in self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels:
            raise InvalidSplitSpecError("split spec has no levels")
        seen: set[int] = set()
        for k, level in enumerate(levels, 1):
            if not level:
                raise InvalidSplitSpecError(f"level {k} is empty")
            for v in level:
                if not isinstance(v, int) or not 0 <= v <= MAX_VALUE:
                    raise InvalidSplitSpecError(f"level {k}: value {v!r} not in 0..{MAX_VALUE}")
                if v in seen:
                    raise InvalidSplitSpecError(f"value {v} appears in two levels")
                seen.add(v)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def n_leaves(self) -> int:
        """One leaf per level plus the residual leaf."""
        return len(self.levels) + 1

    def to_lists(self) -> list[list[int]]:
        return [sorted(level) for level in self.levels]

    @classmethod
    def from_lists(cls, levels: Iterable[Iterable[int]]) -> "SplitSpec":
        return cls(levels=tuple(frozenset(level) for level in levels))


#: The default cascade: singletons first, then two three-value levels.
DEFAULT_SPLIT_SPEC = SplitSpec.from_lists([[64], [68], [65, 69, 4], [66, 96, 80]])


@dataclass(frozen=True, eq=False)
class SplitSet:
    """Rows and binary labels for one cascade level.

    ``row_ids`` are dialogue ids; ``labels`` is 0 where the dialogue's
    value belongs to the level's set and 1 otherwise.
    """

    level: int
    row_ids: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "row_ids", np.asarray(self.row_ids, dtype=np.int64))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))

    @property
    def n_rows(self) -> int:
        return self.row_ids.shape[0]

    @property
    def counts(self) -> tuple[int, int]:
        n0 = int(np.count_nonzero(self.labels == 0))
        return n0, self.labels.shape[0] - n0


def build_split_sets(
    labeled: Sequence[tuple[int, int]],
    spec: SplitSpec = DEFAULT_SPLIT_SPEC,
) -> list[SplitSet]:
    """Materialize every level's rows and labels from (id, value) pairs.

    A level where either class is empty cannot train a binary model and is
    an error.
    """
    remaining = [(rid, value) for rid, value in labeled]
    splits: list[SplitSet] = []
    for k, level in enumerate(spec.levels, 1):
        row_ids = [rid for rid, _ in remaining]
        labels = [0 if value in level else 1 for _, value in remaining]
        n0 = labels.count(0)
        n1 = len(labels) - n0
        if n0 == 0 or n1 == 0:
            raise EmptySplitSetError(
                f"level {k}: class counts {n0}/{n1}; both classes must be present"
            )
        splits.append(SplitSet(level=k, row_ids=np.asarray(row_ids), labels=np.asarray(labels)))
        remaining = [(rid, value) for rid, value in remaining if value not in level]
    return splits


def route_to_leaf(value: int, spec: SplitSpec = DEFAULT_SPLIT_SPEC) -> int:
    """Leaf index a value reaches: ``k`` for the first level set (0-based)
    containing it, or ``n_levels`` for the residual leaf."""
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value <= MAX_VALUE:
        raise OutOfRangeError(f"value {value!r} is not an encoded value in 0..{MAX_VALUE}")
    for k, level in enumerate(spec.levels):
        if value in level:
            return k
    return spec.n_levels


class LevelBalance(NamedTuple):
    level: int
    count0: int
    count1: int
    pct0: float
    pct1: float


def balance_report(splits: Sequence[SplitSet]) -> list[LevelBalance]:
    """Class counts and percentages (rounded to 0.1) per level."""
    report = []
    for s in splits:
        n0, n1 = s.counts
        total = n0 + n1
        report.append(LevelBalance(
            level=s.level,
            count0=n0,
            count1=n1,
            pct0=round(100.0 * n0 / total, 1),
            pct1=round(100.0 * n1 / total, 1),
        ))
    return report
