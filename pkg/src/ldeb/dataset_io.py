"""Plain-text persistence for vocabularies and sparse labeled rows.

Vocabulary files hold one token per line, position = index.  Dataset files
hold one row per line::

    <label> <index>:<count> <index>:<count> ...

with 0-based feature indices in strictly increasing order and no header.
Both formats round-trip exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .exceptions import DataError
from .featurize import FeatureMatrix, Vocabulary


def save_vocabulary(vocabulary: Vocabulary, path: str | Path) -> None:
    """One token per line, in index order."""
    for tok in vocabulary.tokens:
        if "\n" in tok or "\r" in tok:
            raise DataError(f"token {tok!r} contains a newline")
    Path(path).write_text("\n".join(vocabulary.tokens) + "\n", encoding="utf-8")


def load_vocabulary(path: str | Path) -> Vocabulary:
    """Inverse of save_vocabulary."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    try:
        return Vocabulary(tokens=tuple(lines))
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def save_sparse_rows(X: sp.spmatrix, labels, path: str | Path) -> None:
    """Write labeled sparse count rows in the index:count line format."""
    X = sp.csr_matrix(X)
    X.sort_indices()
    labels = np.asarray(labels)
    if X.shape[0] != labels.shape[0]:
        raise DataError(f"{X.shape[0]} rows vs {labels.shape[0]} labels")
    lines = []
    for i in range(X.shape[0]):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        entries = " ".join(
            f"{X.indices[p]}:{X.data[p]}" for p in range(lo, hi)
        )
        lines.append(f"{labels[i]} {entries}".rstrip())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_sparse_rows(path: str | Path, n_features: int | None = None) -> tuple[sp.csr_matrix, np.ndarray]:
    """Read labeled sparse rows.

    The matrix width is ``n_features`` when given (required to reproduce a
    wider space than the file's largest index), otherwise inferred as
    max index + 1.
    """
    path = Path(path)
    labels: list[int] = []
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    max_index = -1
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        parts = line.split()
        if not parts:
            raise DataError(f"{path.name}:{lineno}: empty row")
        try:
            labels.append(int(parts[0]))
        except ValueError:
            raise DataError(f"{path.name}:{lineno}: bad label {parts[0]!r}") from None
        prev = -1
        for entry in parts[1:]:
            try:
                idx_s, count_s = entry.split(":", 1)
                idx, count = int(idx_s), int(count_s)
            except ValueError:
                raise DataError(f"{path.name}:{lineno}: bad entry {entry!r}") from None
            if idx <= prev:
                raise DataError(
                    f"{path.name}:{lineno}: index {idx} not strictly increasing"
                )
            if idx < 0 or count <= 0:
                raise DataError(f"{path.name}:{lineno}: invalid entry {entry!r}")
            prev = idx
            indices.append(idx)
            data.append(count)
        max_index = max(max_index, prev)
        indptr.append(len(indices))
    if n_features is None:
        n_features = max_index + 1
    elif max_index >= n_features:
        raise DataError(f"{path.name}: index {max_index} outside width {n_features}")
    X = sp.csr_matrix(
        (np.asarray(data, dtype=np.int64),
         np.asarray(indices, dtype=np.int64),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(labels), n_features),
    )
    return X, np.asarray(labels, dtype=np.int64)


def save_dataset(matrix: FeatureMatrix, path: str | Path) -> None:
    """Persist a FeatureMatrix (rows + labels) as sparse text."""
    save_sparse_rows(matrix.X, matrix.labels, path)


def load_dataset(path: str | Path, n_features: int | None = None) -> FeatureMatrix:
    """Inverse of save_dataset."""
    X, labels = load_sparse_rows(path, n_features)
    return FeatureMatrix(X=X, labels=labels)
