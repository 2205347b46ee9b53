"""Run configuration: defaults, JSON loading, flag overrides, hashing.

A config is a flat set of named values.  Files may set any subset; unknown
keys are rejected rather than ignored, so typos fail loudly.  A hash of the
result-shaping fields (everything except execution-only knobs like worker
count) goes into run manifests, making "same config" checkable by string
comparison.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import ConfigError
from .forest import RandomForest
from .hiersplit import DEFAULT_SPLIT_SPEC, InvalidSplitSpecError, SplitSpec
from .mlp import MlpClassifier


@dataclass
class RunConfig:
    # data
    dialogues_path: str | None = None
    emotions_path: str | None = None
    jsonl_path: str | None = None
    on_length_mismatch: str = "error"
    # tokenizer
    lowercase: bool = True
    strip_edge_punct: bool = True
    remove_interior_punct: bool = False
    # split
    split_levels: list = field(
        default_factory=lambda: DEFAULT_SPLIT_SPEC.to_lists())
    # evaluation
    learner: str = "forest"
    ratio: float = 0.8
    stratify: bool = False
    trials: int = 1
    # forest
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    bootstrap: bool = True
    # network
    hidden_layer_sizes: list = field(default_factory=lambda: [891, 828, 734])
    learning_rate: float = 0.01
    batch_size: int = 20
    epochs: int = 80
    init_scale: float = 0.05
    output_activation: str = "identity"
    # run
    seed: int = 0
    jobs: int = 1
    out_dir: str = "out"

    def __post_init__(self) -> None:
        if self.learner not in ("forest", "mlp", "both"):
            raise ConfigError(f"learner must be forest, mlp, or both, got {self.learner!r}")
        if self.on_length_mismatch not in ("error", "drop"):
            raise ConfigError(
                f"on_length_mismatch must be error or drop, got {self.on_length_mismatch!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError(f"jobs must be a positive integer, got {self.jobs!r}")
        try:
            self.split_spec()
        except InvalidSplitSpecError as exc:
            raise ConfigError(f"split_levels: {exc}") from None

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        return cls.from_dict(data)

    def split_spec(self) -> SplitSpec:
        return SplitSpec.from_lists(self.split_levels)

    #: Knobs that steer execution but cannot change any persisted artifact:
    #: results are worker-count-invariant, and the trials count only picks
    #: how many seeds the evaluate stage summarizes (rewritten every run).
    EXECUTION_ONLY = ("jobs", "trials")

    def canonical_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True,
                          separators=(",", ":"))

    def config_hash(self) -> str:
        payload = dataclasses.asdict(self)
        for key in self.EXECUTION_ONLY:
            payload.pop(key)
        canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def make_forest(self, n_jobs: int | None = None) -> RandomForest:
        return RandomForest(
            n_trees=self.n_trees,
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            bootstrap=self.bootstrap,
            seed=self.seed,
            n_jobs=n_jobs if n_jobs is not None else self.jobs,
        )

    def make_mlp(self) -> MlpClassifier:
        return MlpClassifier(
            hidden_layer_sizes=tuple(self.hidden_layer_sizes),
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            init_scale=self.init_scale,
            output_activation=self.output_activation,
            seed=self.seed,
        )

    def learners(self) -> list[str]:
        return ["forest", "mlp"] if self.learner == "both" else [self.learner]
