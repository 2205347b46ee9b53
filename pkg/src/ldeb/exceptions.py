"""Exception hierarchy.

Three broad families map onto the CLI exit codes: configuration problems
(exit 2), data problems (exit 3), and model problems (exit 4).  Library
callers can catch the family bases; the CLI maps them to codes in one place.
"""


class LdebError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(LdebError):
    """Invalid configuration value or parameter combination."""


class DataError(LdebError):
    """Malformed, inconsistent, or insufficient input data."""


class ModelError(LdebError):
    """Failure while training, persisting, or applying a model."""


# -- corpus ------------------------------------------------------------

class EmptyDialogueError(DataError):
    """A dialogue line produced no utterances."""


class BadLabelError(DataError):
    """An emotion label is not an integer in 0..6."""


class LineCountMismatchError(DataError):
    """The text file and the label file have different line counts."""


class LengthMismatchError(DataError):
    """A dialogue's utterance count differs from its label count."""


# -- encoding ----------------------------------------------------------

class EmptyLabelListError(DataError):
    """An emotion label list is empty where at least one label is required."""


class OutOfRangeError(DataError):
    """An encoded value is outside the representable range 0..127."""


# -- featurize ---------------------------------------------------------

class EmptyCorpusError(DataError):
    """A corpus with no dialogues where at least one is required."""


class AlignmentError(DataError):
    """Feature rows and labels do not line up one to one."""


# -- hiersplit ---------------------------------------------------------

class InvalidSplitSpecError(ConfigError):
    """A split specification violates its structural rules."""


class EmptySplitSetError(DataError):
    """A split level where one of the two classes has no rows."""


# -- learners ----------------------------------------------------------

class EmptyNodeError(ModelError):
    """Impurity requested for a node with zero total count."""


class OneClassTrainingError(ModelError):
    """Training data contains a single class; nothing to learn."""


class NonFiniteLossError(ModelError):
    """Training loss became NaN or infinite (divergence guard)."""


class ShapeMismatchError(ModelError):
    """Input width does not match the width the model was trained on."""


# -- evaluation --------------------------------------------------------

class TooFewRowsError(DataError):
    """Not enough rows to carve out the requested partition."""


class UntrainedLevelError(ModelError):
    """A cascade level was asked to predict before being fitted."""
