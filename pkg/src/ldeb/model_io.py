"""Versioned JSON envelopes for trained models.

Every file carries a format marker, a version, and the model kind, so a
loader can refuse anything it does not understand instead of misreading
it.  Serialization is canonical (sorted keys, fixed separators): the same
model always produces the same bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

from .exceptions import ModelError
from .forest import RandomForest
from .mlp import MlpClassifier

FORMAT = "ldeb-model"
VERSION = 1

_KINDS = {
    "forest": RandomForest,
    "mlp": MlpClassifier,
}


def model_kind(model) -> str:
    for kind, cls in _KINDS.items():
        if isinstance(model, cls):
            return kind
    raise ModelError(f"cannot persist a {type(model).__name__}")


def model_to_json(model) -> str:
    envelope = {
        "format": FORMAT,
        "version": VERSION,
        "kind": model_kind(model),
        "model": model.to_dict(),
    }
    return json.dumps(envelope, sort_keys=True, separators=(",", ":")) + "\n"


def save_model(model, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model), encoding="utf-8")


def load_model(path: str | Path):
    path = Path(path)
    try:
        envelope = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"{path}: cannot read model: {exc}") from None
    if not isinstance(envelope, dict) or envelope.get("format") != FORMAT:
        raise ModelError(f"{path}: not a model file")
    if envelope.get("version") != VERSION:
        raise ModelError(f"{path}: unsupported version {envelope.get('version')!r}")
    kind = envelope.get("kind")
    cls = _KINDS.get(kind)
    if cls is None:
        raise ModelError(f"{path}: unknown model kind {kind!r}")
    return cls.from_dict(envelope["model"])
