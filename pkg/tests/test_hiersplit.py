import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldeb import (
    DEFAULT_SPLIT_SPEC,
    SplitSpec,
    balance_report,
    build_split_sets,
    label_corpus,
    route_to_leaf,
)
from ldeb.exceptions import (
    EmptySplitSetError,
    InvalidSplitSpecError,
    OutOfRangeError,
)


def test_default_spec_shape():
    assert DEFAULT_SPLIT_SPEC.levels == (
        frozenset({64}), frozenset({68}), frozenset({65, 69, 4}),
        frozenset({66, 96, 80}))
    assert DEFAULT_SPLIT_SPEC.n_levels == 4
    assert DEFAULT_SPLIT_SPEC.n_leaves == 5


def test_spec_round_trip():
    spec = SplitSpec.from_lists([[3, 1], [2]])
    assert spec.to_lists() == [[1, 3], [2]]
    assert SplitSpec.from_lists(spec.to_lists()) == spec


def test_spec_validation():
    with pytest.raises(InvalidSplitSpecError):
        SplitSpec.from_lists([])
    with pytest.raises(InvalidSplitSpecError):
        SplitSpec.from_lists([[1], []])
    with pytest.raises(InvalidSplitSpecError):
        SplitSpec.from_lists([[1, 2], [2]])
    with pytest.raises(InvalidSplitSpecError):
        SplitSpec.from_lists([[128]])
    with pytest.raises(InvalidSplitSpecError):
        SplitSpec.from_lists([[-1]])


def test_route_to_leaf_defaults():
    assert route_to_leaf(64) == 0
    assert route_to_leaf(68) == 1
    for v in (65, 69, 4):
        assert route_to_leaf(v) == 2
    for v in (66, 96, 80):
        assert route_to_leaf(v) == 3
    assert route_to_leaf(2) == 4
    assert route_to_leaf(88) == 4
    assert route_to_leaf(127) == 4


def test_route_to_leaf_rejects_bad_values():
    for bad in (-1, 128, True, 2.5):
        with pytest.raises(OutOfRangeError):
            route_to_leaf(bad)


def test_route_partitions_every_value():
    claimed = set()
    for level in DEFAULT_SPLIT_SPEC.levels:
        claimed |= level
    for v in range(128):
        leaf = route_to_leaf(v)
        if v in claimed:
            assert v in DEFAULT_SPLIT_SPEC.levels[leaf]
        else:
            assert leaf == DEFAULT_SPLIT_SPEC.n_levels


def test_split_sets_on_fixture(corpus, expected):
    splits = build_split_sets(label_corpus(corpus))
    assert [list(s.counts) for s in splits] == expected["level_sizes"]
    balances = balance_report(splits)
    assert [[b.pct0, b.pct1] for b in balances] == expected["balances"]
    # each level keeps exactly the previous level's label-1 rows
    for prev, nxt in zip(splits, splits[1:]):
        assert np.array_equal(nxt.row_ids, prev.row_ids[prev.labels == 1])
    assert splits[0].n_rows == len(corpus)
    residual = splits[-1].counts[1]
    assert residual == expected["residual_count"]


def test_split_sets_label_rule():
    labeled = [(0, 64), (1, 68), (2, 64), (3, 2)]
    splits = build_split_sets(labeled, SplitSpec.from_lists([[64], [68]]))
    assert splits[0].labels.tolist() == [0, 1, 0, 1]
    assert splits[0].row_ids.tolist() == [0, 1, 2, 3]
    assert splits[1].labels.tolist() == [0, 1]
    assert splits[1].row_ids.tolist() == [1, 3]


def test_empty_split_set_is_an_error():
    with pytest.raises(EmptySplitSetError, match="level 1"):
        build_split_sets([(0, 64), (1, 64)], SplitSpec.from_lists([[64]]))
    with pytest.raises(EmptySplitSetError, match="level 1"):
        build_split_sets([(0, 68)], SplitSpec.from_lists([[64]]))
    with pytest.raises(EmptySplitSetError, match="level 2"):
        build_split_sets([(0, 64), (1, 68)],
                         SplitSpec.from_lists([[64], [68]]))


def test_balance_rounding():
    labeled = [(0, 7), (1, 9), (2, 9)]
    splits = build_split_sets(labeled, SplitSpec.from_lists([[7]]))
    b = balance_report(splits)[0]
    assert (b.count0, b.count1) == (1, 2)
    assert (b.pct0, b.pct1) == (33.3, 66.7)


@st.composite
def values_and_spec(draw):
    values = draw(st.lists(st.integers(min_value=0, max_value=127),
                           min_size=4, max_size=60))
    pool = sorted(set(values))
    n_levels = draw(st.integers(min_value=1, max_value=3))
    levels = []
    used = set()
    for _ in range(n_levels):
        available = [v for v in pool if v not in used]
        if not available:
            break
        pick = draw(st.lists(st.sampled_from(available), min_size=1,
                             max_size=3, unique=True))
        used |= set(pick)
        levels.append(pick)
    return values, levels


@given(values_and_spec())
def test_split_sets_match_sequential_filter_oracle(case):
    values, levels = case
    if not levels:
        return
    labeled = list(enumerate(values))
    spec = SplitSpec.from_lists(levels)
    remaining = list(enumerate(values))
    try:
        splits = build_split_sets(labeled, spec)
    except EmptySplitSetError:
        # the oracle must agree that some level is one-sided
        one_sided = False
        for level in levels:
            level_set = set(level)
            n0 = sum(1 for _, v in remaining if v in level_set)
            n1 = len(remaining) - n0
            if n0 == 0 or n1 == 0:
                one_sided = True
                break
            remaining = [(i, v) for i, v in remaining if v not in level_set]
        assert one_sided
        return
    for s, level in zip(splits, levels):
        level_set = set(level)
        assert s.row_ids.tolist() == [i for i, _ in remaining]
        assert s.labels.tolist() == [0 if v in level_set else 1
                                     for _, v in remaining]
        remaining = [(i, v) for i, v in remaining if v not in level_set]
    # routing agrees with membership
    for v in set(values):
        leaf = route_to_leaf(v, spec)
        if any(v in set(level) for level in levels):
            assert v in set(levels[leaf])
        else:
            assert leaf == len(levels)
