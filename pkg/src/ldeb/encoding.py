"""Seven-bit presence encoding of dialogue emotion annotations.

A dialogue's per-utterance labels are reduced to the *set* of classes that
occur, and that set is packed into one integer: class ``e`` contributes
``2**(6 - e)``, so class 0 is the most significant bit and class 6 the
least.  Order and multiplicity never matter.  A dialogue always has at
least one label, so encoded dialogue values lie in 1..127; the decoding
helpers additionally accept 0 (the empty set) for completeness.
"""

from __future__ import annotations

from collections import Counter

from .corpus import Corpus, N_CLASSES
from .exceptions import BadLabelError, EmptyLabelListError, OutOfRangeError

#: Class names in label order; index equals the label value.
EMOTION_NAMES = (
    "No Emotion",
    "Anger",
    "Disgust",
    "Fear",
    "Happiness",
    "Sadness",
    "Surprise",
)

#: Bit weight of each class, index equals the label value.
BIT_WEIGHTS = tuple(2 ** (N_CLASSES - 1 - e) for e in range(N_CLASSES))

MAX_VALUE = 2 ** N_CLASSES - 1


def emo_sum(emotions) -> int:
    """Encode a non-empty label sequence into its presence value.

    >>> emo_sum([4, 2, 0, 1, 0, 1])
    116
    """
    labels = list(emotions)
    if not labels:
        raise EmptyLabelListError("cannot encode an empty label list")
    value = 0
    for e in set(labels):
        if not isinstance(e, int) or isinstance(e, bool) or not 0 <= e < N_CLASSES:
            raise BadLabelError(f"label {e!r} not in 0..6")
        value += BIT_WEIGHTS[e]
    return value


def emo_decode(value: int) -> set[int]:
    """Recover the set of classes present in an encoded value."""
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value <= MAX_VALUE:
        raise OutOfRangeError(f"value {value!r} not in 0..{MAX_VALUE}")
    return {e for e in range(N_CLASSES) if value >> (N_CLASSES - 1 - e) & 1}


def emo_binary(value: int) -> str:
    """Render an encoded value as its 7-character bit string."""
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value <= MAX_VALUE:
        raise OutOfRangeError(f"value {value!r} not in 0..{MAX_VALUE}")
    return format(value, "07b")


def emo_describe(value: int) -> str:
    """Human-readable class list for an encoded value.

    Names are joined with `` + `` in class order; 0 yields the empty string.

    >>> emo_describe(66)
    'No Emotion + Sadness'
    """
    return " + ".join(EMOTION_NAMES[e] for e in sorted(emo_decode(value)))


def label_corpus(corpus: Corpus) -> list[tuple[int, int]]:
    """Encode every dialogue; returns (dialogue id, value) pairs in order."""
    return [(d.id, emo_sum(d.emotions)) for d in corpus]


def emo_histogram(labeled: list[tuple[int, int]]) -> dict[int, int]:
    """Count dialogues per encoded value.  Keys are present values only."""
    return dict(Counter(value for _, value in labeled))
