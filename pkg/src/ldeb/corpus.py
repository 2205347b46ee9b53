"""Reading and writing dialogue corpora.

The native on-disk layout is a pair of aligned text files: one dialogue per
line with utterances separated by a delimiter token (``__eou__``), and one
line of space-separated emotion labels per dialogue.  A JSON-lines adapter
is provided for the same records.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .exceptions import (
    BadLabelError,
    DataError,
    EmptyDialogueError,
    LengthMismatchError,
    LineCountMismatchError,
)

logger = logging.getLogger(__name__)

EOU = "__eou__"

#: Number of emotion classes; labels are integers in ``range(N_CLASSES)``.
N_CLASSES = 7


@dataclass(frozen=True)
class Dialogue:
    """One dialogue: an id, its utterances, and one label per utterance.

    Labels are integers in 0..6.  Construction validates the record, so a
    ``Dialogue`` that exists is well formed.
    """

    id: int
    utterances: tuple[str, ...]
    emotions: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "utterances", tuple(self.utterances))
        object.__setattr__(self, "emotions", tuple(self.emotions))
        if len(self.utterances) == 0:
            raise EmptyDialogueError(f"dialogue {self.id}: no utterances")
        for u in self.utterances:
            if not u.strip():
                raise EmptyDialogueError(f"dialogue {self.id}: blank utterance")
        for e in self.emotions:
            if not isinstance(e, int) or isinstance(e, bool) or not 0 <= e < N_CLASSES:
                raise BadLabelError(f"dialogue {self.id}: label {e!r} not in 0..6")
        if len(self.utterances) != len(self.emotions):
            raise LengthMismatchError(
                f"dialogue {self.id}: {len(self.utterances)} utterances "
                f"vs {len(self.emotions)} labels"
            )

    @property
    def text(self) -> str:
        """All utterances joined by single spaces."""
        return " ".join(self.utterances)


@dataclass(frozen=True)
class Corpus:
    """An ordered collection of dialogues with consecutive ids from 0."""

    dialogues: tuple[Dialogue, ...]
    source: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dialogues", tuple(self.dialogues))
        for i, d in enumerate(self.dialogues):
            if d.id != i:
                raise DataError(f"dialogue at position {i} has id {d.id}")

    def __len__(self) -> int:
        return len(self.dialogues)

    def __iter__(self) -> Iterator[Dialogue]:
        return iter(self.dialogues)

    def __getitem__(self, i: int) -> Dialogue:
        return self.dialogues[i]


def parse_dialogue_line(line: str, delimiter: str = EOU) -> list[str]:
    """Split one dialogue line into utterances.

    Segments are stripped of surrounding whitespace and empty segments are
    dropped, so a trailing delimiter does not produce a phantom utterance.
    Raises EmptyDialogueError when nothing remains.
    """
    parts = [p.strip() for p in line.split(delimiter)]
    utterances = [p for p in parts if p]
    if not utterances:
        raise EmptyDialogueError("line has no utterances")
    return utterances


def parse_emotion_line(line: str) -> list[int]:
    """Parse one line of space-separated labels into a list of ints 0..6."""
    labels = []
    for tok in line.split():
        try:
            value = int(tok)
        except ValueError:
            raise BadLabelError(f"label {tok!r} is not an integer") from None
        if not 0 <= value < N_CLASSES:
            raise BadLabelError(f"label {value} not in 0..6")
        labels.append(value)
    return labels


def load_corpus(
    dialogues_path: str | Path,
    emotions_path: str | Path,
    delimiter: str = EOU,
    on_length_mismatch: str = "error",
) -> Corpus:
    """Load a corpus from the paired text/label files.

    The two files must have the same number of lines.  A per-dialogue length
    mismatch (utterance count vs label count) aborts with an error by
    default; pass ``on_length_mismatch="drop"`` to skip such lines with a
    warning instead, which some releases of the data require.
    """
    if on_length_mismatch not in ("error", "drop"):
        raise ValueError("on_length_mismatch must be 'error' or 'drop'")
    dialogues_path = Path(dialogues_path)
    emotions_path = Path(emotions_path)
    text_lines = dialogues_path.read_text(encoding="utf-8").splitlines()
    label_lines = emotions_path.read_text(encoding="utf-8").splitlines()
    if len(text_lines) != len(label_lines):
        raise LineCountMismatchError(
            f"{dialogues_path.name}: {len(text_lines)} lines, "
            f"{emotions_path.name}: {len(label_lines)} lines"
        )
    dialogues: list[Dialogue] = []
    dropped = 0
    for lineno, (text_line, label_line) in enumerate(zip(text_lines, label_lines), 1):
        try:
            utterances = parse_dialogue_line(text_line, delimiter)
            emotions = parse_emotion_line(label_line)
            dialogues.append(
                Dialogue(id=len(dialogues), utterances=tuple(utterances),
                         emotions=tuple(emotions))
            )
        except LengthMismatchError as exc:
            if on_length_mismatch == "drop":
                logger.warning("line %d dropped: %s", lineno, exc)
                dropped += 1
                continue
            raise LengthMismatchError(f"line {lineno}: {exc}") from None
        except DataError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
    if dropped:
        logger.warning("dropped %d mismatched line(s)", dropped)
    return Corpus(dialogues=tuple(dialogues), source=str(dialogues_path))


def save_corpus(
    corpus: Corpus,
    dialogues_path: str | Path,
    emotions_path: str | Path,
    delimiter: str = EOU,
) -> None:
    """Write a corpus back out in the paired-file layout.

    Each utterance is followed by the delimiter, matching the format
    ``load_corpus`` reads.  Utterances containing the delimiter cannot be
    represented and are rejected.
    """
    text_lines = []
    label_lines = []
    for d in corpus:
        for u in d.utterances:
            if delimiter in u:
                raise DataError(
                    f"dialogue {d.id}: utterance contains the delimiter {delimiter!r}"
                )
        text_lines.append(" ".join(f"{u} {delimiter}" for u in d.utterances))
        label_lines.append(" ".join(str(e) for e in d.emotions))
    Path(dialogues_path).write_text("\n".join(text_lines) + "\n", encoding="utf-8")
    Path(emotions_path).write_text("\n".join(label_lines) + "\n", encoding="utf-8")


def load_corpus_jsonl(path: str | Path) -> Corpus:
    """Load a corpus from JSON lines: {"utterances": [...], "emotions": [...]}.

    Records are taken in file order.  An explicit "id" field, when present,
    must match the line position.
    """
    path = Path(path)
    dialogues: list[Dialogue] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {lineno}: invalid JSON: {exc}") from None
        if not isinstance(record, dict) or "utterances" not in record or "emotions" not in record:
            raise DataError(f"line {lineno}: expected utterances and emotions fields")
        rid = record.get("id", len(dialogues))
        if rid != len(dialogues):
            raise DataError(f"line {lineno}: id {rid} out of order")
        emotions = record["emotions"]
        if not all(isinstance(e, int) and not isinstance(e, bool) for e in emotions):
            raise BadLabelError(f"line {lineno}: non-integer label")
        try:
            dialogues.append(
                Dialogue(id=len(dialogues),
                         utterances=tuple(str(u) for u in record["utterances"]),
                         emotions=tuple(emotions))
            )
        except DataError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
    return Corpus(dialogues=tuple(dialogues), source=str(path))


def save_corpus_jsonl(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as JSON lines, one record per dialogue."""
    lines = []
    for d in corpus:
        lines.append(json.dumps(
            {"id": d.id, "utterances": list(d.utterances), "emotions": list(d.emotions)},
            ensure_ascii=False,
        ))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
