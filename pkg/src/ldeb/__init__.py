"""Emotion-aggregate dialogue labeling and hierarchical cascade classification.

The pieces, in pipeline order: corpus loading (`corpus`), the seven-bit
presence encoding (`encoding`), bag-of-words features (`featurize`),
per-level binary split-sets (`hiersplit`), the two learners (`forest`,
`mlp`), and evaluation plus the prediction cascade (`evaluate`).  The
`ldeb` command line drives the same code.
"""

from .corpus import (
    Corpus,
    Dialogue,
    load_corpus,
    load_corpus_jsonl,
    parse_dialogue_line,
    parse_emotion_line,
    save_corpus,
    save_corpus_jsonl,
)
from .encoding import (
    EMOTION_NAMES,
    emo_binary,
    emo_decode,
    emo_describe,
    emo_histogram,
    emo_sum,
    label_corpus,
)
from .evaluate import (
    CascadeClassifier,
    ConfusionMatrix,
    MetricsReport,
    cascade_predict,
    confusion_matrix,
    evaluate_level,
    format_score_table,
    run_trials,
    train_test_split,
)
from .featurize import (
    DialogueVectorizer,
    FeatureMatrix,
    Vocabulary,
    build_feature_matrix,
    build_vocabulary,
    tokenize,
    vectorize,
)
from .forest import DecisionTree, RandomForest, best_split, gini
from .hiersplit import (
    DEFAULT_SPLIT_SPEC,
    SplitSet,
    SplitSpec,
    balance_report,
    build_split_sets,
    route_to_leaf,
)
from .mlp import MlpClassifier
from .model_io import load_model, save_model
from . import exceptions

__version__ = "0.1.0"

__all__ = [
    "Corpus", "Dialogue", "load_corpus", "load_corpus_jsonl",
    "parse_dialogue_line", "parse_emotion_line", "save_corpus",
    "save_corpus_jsonl",
    "EMOTION_NAMES", "emo_binary", "emo_decode", "emo_describe",
    "emo_histogram", "emo_sum", "label_corpus",
    "CascadeClassifier", "ConfusionMatrix", "MetricsReport",
    "cascade_predict", "confusion_matrix", "evaluate_level",
    "format_score_table", "run_trials", "train_test_split",
    "DialogueVectorizer", "FeatureMatrix", "Vocabulary",
    "build_feature_matrix", "build_vocabulary", "tokenize", "vectorize",
    "DecisionTree", "RandomForest", "best_split", "gini",
    "DEFAULT_SPLIT_SPEC", "SplitSet", "SplitSpec", "balance_report",
    "build_split_sets", "route_to_leaf",
    "MlpClassifier",
    "load_model", "save_model",
    "exceptions",
    "__version__",
]
