"""Tokenization and the bag-of-words feature space.

Tokenization is whitespace splitting with case folding and removal of
punctuation stuck to token edges.  Interior punctuation is kept by default
(so a contraction stays one token); an optional mode strips it too.  Stop
words are kept: function-word usage is part of the signal here.

The vocabulary assigns indices in first-occurrence order over a single
sequential pass of the corpus, which makes it reproducible from the data
alone.  Feature vectors are raw token counts; tokens outside the
vocabulary are ignored at transform time.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from functools import lru_cache, partial
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, TransformerMixin

from .corpus import Corpus, Dialogue
from .exceptions import AlignmentError, EmptyCorpusError

Tokenizer = Callable[[str], list[str]]


@lru_cache(maxsize=4096)
def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(
    text: str,
    lowercase: bool = True,
    strip_edge_punct: bool = True,
    remove_interior_punct: bool = False,
) -> list[str]:
    """Split text into normalized tokens.

    Splits on whitespace, folds case, and repeatedly strips punctuation
    (any Unicode P* category) from both ends of each piece.  Pieces that
    end up empty are dropped.  With ``remove_interior_punct`` punctuation
    characters inside a token are deleted as well.
    """
    tokens = []
    for piece in text.split():
        if lowercase:
            piece = piece.lower()
        if strip_edge_punct:
            start, end = 0, len(piece)
            while start < end and _is_punct(piece[start]):
                start += 1
            while end > start and _is_punct(piece[end - 1]):
                end -= 1
            piece = piece[start:end]
        if remove_interior_punct:
            piece = "".join(ch for ch in piece if not _is_punct(ch))
        if piece:
            tokens.append(piece)
    return tokens


@dataclass(frozen=True)
class Vocabulary:
    """Tokens in index order plus the reverse lookup."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ValueError("vocabulary contains duplicate tokens")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def index(self, token: str) -> int:
        return self._index[token]

    def get(self, token: str, default: int = -1) -> int:
        return self._index.get(token, default)


def _dialogue_text(item) -> str:
    if isinstance(item, Dialogue):
        return item.text
    if isinstance(item, str):
        return item
    if isinstance(item, (list, tuple)):
        return " ".join(item)
    raise TypeError(f"cannot read dialogue text from {type(item).__name__}")


def build_vocabulary(
    corpus: Corpus | Iterable,
    tokenizer: Tokenizer = tokenize,
) -> tuple[Vocabulary, int]:
    """Single pass over the corpus: first-occurrence vocabulary + token total.

    Returns the vocabulary and the total token count (all occurrences, not
    just distinct tokens).  An empty corpus is an error.
    """
    seen: dict[str, int] = {}
    total = 0
    n_dialogues = 0
    for item in corpus:
        n_dialogues += 1
        for tok in tokenizer(_dialogue_text(item)):
            total += 1
            if tok not in seen:
                seen[tok] = len(seen)
    if n_dialogues == 0:
        raise EmptyCorpusError("cannot build a vocabulary from an empty corpus")
    return Vocabulary(tokens=tuple(seen)), total


def vectorize(dialogue, vocabulary: Vocabulary, tokenizer: Tokenizer = tokenize) -> dict[int, int]:
    """Count in-vocabulary tokens of one dialogue; unknown tokens are skipped.

    Returns a sparse mapping {feature index: count}.  The vector's nominal
    dimension is ``len(vocabulary)``.
    """
    counts: dict[int, int] = {}
    for tok in tokenizer(_dialogue_text(dialogue)):
        j = vocabulary.get(tok)
        if j >= 0:
            counts[j] = counts.get(j, 0) + 1
    return counts


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Aligned count rows and integer labels.

    ``X`` is CSR with one row per dialogue; ``labels`` holds one integer per
    row (encoded values or binary levels, depending on the stage).
    """

    X: sp.csr_matrix
    labels: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if self.X.shape[0] != labels.shape[0]:
            raise AlignmentError(
                f"{self.X.shape[0]} feature rows vs {labels.shape[0]} labels"
            )

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


def _rows_to_csr(rows: Sequence[dict[int, int]], n_features: int) -> sp.csr_matrix:
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    nnz = sum(len(r) for r in rows)
    indices = np.empty(nnz, dtype=np.int64)
    data = np.empty(nnz, dtype=np.int64)
    pos = 0
    for i, row in enumerate(rows):
        for j in sorted(row):
            indices[pos] = j
            data[pos] = row[j]
            pos += 1
        indptr[i + 1] = pos
    return sp.csr_matrix((data, indices, indptr), shape=(len(rows), n_features))


def _vectorize_chunk(texts: list[str], vocabulary: Vocabulary, tokenizer: Tokenizer):
    return [vectorize(t, vocabulary, tokenizer) for t in texts]


_CHUNK_ROWS = 256


def _vectorize_rows(texts: list[str], vocabulary: Vocabulary,
                    tokenizer: Tokenizer, n_jobs: int) -> list[dict[int, int]]:
    """Chunked, optionally parallel vectorization.  Rows are independent,
    so the result never depends on the worker count."""
    if n_jobs == 1 or len(texts) <= _CHUNK_ROWS:
        return _vectorize_chunk(texts, vocabulary, tokenizer)
    pieces = Parallel(n_jobs=n_jobs)(
        delayed(_vectorize_chunk)(texts[i:i + _CHUNK_ROWS], vocabulary, tokenizer)
        for i in range(0, len(texts), _CHUNK_ROWS)
    )
    return [row for piece in pieces for row in piece]


def build_feature_matrix(
    corpus: Corpus | Iterable,
    labels: Sequence[int],
    vocabulary: Vocabulary,
    tokenizer: Tokenizer = tokenize,
    n_jobs: int = 1,
) -> FeatureMatrix:
    """Vectorize a whole corpus against a fixed vocabulary.

    ``labels`` must supply one integer per dialogue; pairs of
    (dialogue id, value) as produced by the labeling step are accepted too.
    The result does not depend on ``n_jobs``.
    """
    texts = [_dialogue_text(item) for item in corpus]
    label_list = [v[1] if isinstance(v, tuple) else int(v) for v in labels]
    if len(texts) != len(label_list):
        raise AlignmentError(f"{len(texts)} dialogues vs {len(label_list)} labels")
    rows = _vectorize_rows(texts, vocabulary, tokenizer, n_jobs)
    X = _rows_to_csr(rows, len(vocabulary))
    return FeatureMatrix(X=X, labels=np.asarray(label_list, dtype=np.int64))


class DialogueVectorizer(BaseEstimator, TransformerMixin):
    """Count vectorizer over whole dialogues.

    fit() learns the first-occurrence vocabulary; transform() maps
    dialogues (or plain strings) to sparse count rows.  Tokens unseen
    during fit are ignored.
    """

    def __init__(
        self,
        lowercase: bool = True,
        strip_edge_punct: bool = True,
        remove_interior_punct: bool = False,
        n_jobs: int = 1,
    ):
        self.lowercase = lowercase
        self.strip_edge_punct = strip_edge_punct
        self.remove_interior_punct = remove_interior_punct
        self.n_jobs = n_jobs

    def _tokenizer(self) -> Tokenizer:
        return partial(
            tokenize,
            lowercase=self.lowercase,
            strip_edge_punct=self.strip_edge_punct,
            remove_interior_punct=self.remove_interior_punct,
        )

    def fit(self, X, y=None):
        self.vocabulary_, self.total_tokens_ = build_vocabulary(X, self._tokenizer())
        return self

    def transform(self, X) -> sp.csr_matrix:
        if not hasattr(self, "vocabulary_"):
            raise EmptyCorpusError("vectorizer is not fitted")
        texts = [_dialogue_text(item) for item in X]
        rows = _vectorize_rows(texts, self.vocabulary_, self._tokenizer(), self.n_jobs)
        return _rows_to_csr(rows, len(self.vocabulary_))
