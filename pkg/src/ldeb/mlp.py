"""Feed-forward network trained with plain SGD, written from first principles.

Architecture: input -> ReLU hidden layers -> 2 raw outputs.  The loss is
mean squared error against one-hot targets, averaged over both the batch
and the two outputs.  The output layer is linear by default; sigmoid and
softmax are available as options and the backward pass accounts for them.

The input matrix is sparse, and a batch only touches the first-layer weight
rows of features that actually occur in it, so the update cost scales with
the batch's token count rather than the vocabulary size.  All arithmetic is
float64 and every random draw comes from one generator seeded once, so a
fit is exactly reproducible.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin

from .exceptions import (
    ConfigError,
    ModelError,
    NonFiniteLossError,
    OneClassTrainingError,
    ShapeMismatchError,
    TooFewRowsError,
)

_N_OUTPUTS = 2
_CHUNK = 4096


class MlpClassifier(BaseEstimator, ClassifierMixin):
    """Binary classifier; predicts the argmax of the two outputs.

    Weights start uniform in [-init_scale, init_scale), biases at zero.
    Each epoch shuffles the row order (the final short batch is kept) and
    records the training accuracy measured after the epoch's updates.
    """

    def __init__(self, hidden_layer_sizes=(891, 828, 734), learning_rate: float = 0.01,
                 batch_size: int = 20, epochs: int = 80, init_scale: float = 0.05,
                 output_activation: str = "identity", seed: int = 0):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.init_scale = init_scale
        self.output_activation = output_activation
        self.seed = seed

    # -- configuration -------------------------------------------------

    def _validate_params(self):
        sizes = tuple(self.hidden_layer_sizes)
        for h in sizes:
            if not isinstance(h, int) or isinstance(h, bool) or h < 1:
                raise ConfigError(f"hidden layer size {h!r} must be a positive integer")
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ConfigError(f"batch_size must be a positive integer, got {self.batch_size!r}")
        if not isinstance(self.epochs, int) or self.epochs < 0:
            raise ConfigError(f"epochs must be a non-negative integer, got {self.epochs!r}")
        if not (isinstance(self.learning_rate, (int, float))
                and not isinstance(self.learning_rate, bool)
                and self.learning_rate >= 0):
            raise ConfigError(
                f"learning_rate must be non-negative, got {self.learning_rate!r}")
        if not (isinstance(self.init_scale, (int, float)) and self.init_scale > 0):
            raise ConfigError(f"init_scale must be positive, got {self.init_scale!r}")
        if self.output_activation not in ("identity", "sigmoid", "softmax"):
            raise ConfigError(f"unknown output_activation {self.output_activation!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        return sizes

    @staticmethod
    def _as_csr(X) -> sp.csr_matrix:
        if sp.issparse(X):
            out = X.tocsr().astype(np.float64)
        else:
            out = sp.csr_matrix(np.asarray(X, dtype=np.float64))
        out.sort_indices()
        return out

    # -- forward / backward --------------------------------------------

    def _activate_output(self, Z: np.ndarray) -> np.ndarray:
        if self.output_activation == "sigmoid":
            return 1.0 / (1.0 + np.exp(-Z))
        if self.output_activation == "softmax":
            shifted = Z - Z.max(axis=1, keepdims=True)
            e = np.exp(shifted)
            return e / e.sum(axis=1, keepdims=True)
        return Z

    def _forward_cached(self, Xb):
        """Returns (output, pre-activations, post-activations); the input
        itself sits at position 0 of the post-activation list."""
        As: list = [Xb]
        Zs: list[np.ndarray] = []
        A = Xb
        last = len(self.weights_) - 1
        for l, (W, b) in enumerate(zip(self.weights_, self.biases_)):
            Z = A @ W + b
            Zs.append(Z)
            A = self._activate_output(Z) if l == last else np.maximum(Z, 0.0)
            As.append(A)
        return As[-1], Zs, As

    def _backward(self, yb: np.ndarray, out: np.ndarray, Zs, As):
        """Gradients of the batch loss for every layer.

        Returns (loss, grads) where each grads entry is (cols, dW, db);
        ``cols`` is None for dense inputs, otherwise the feature columns
        to which the first-layer rows of dW correspond.
        """
        B = out.shape[0]
        T = np.zeros((B, _N_OUTPUTS), dtype=np.float64)
        T[np.arange(B), yb] = 1.0
        diff = out - T
        loss = float((diff * diff).mean())
        g = 2.0 * diff / (B * _N_OUTPUTS)
        if self.output_activation == "sigmoid":
            delta = g * out * (1.0 - out)
        elif self.output_activation == "softmax":
            delta = out * (g - (g * out).sum(axis=1, keepdims=True))
        else:
            delta = g
        grads: list = [None] * len(self.weights_)
        for l in range(len(self.weights_) - 1, -1, -1):
            A_prev = As[l]
            db = delta.sum(axis=0)
            if l == 0 and sp.issparse(A_prev):
                cols = np.unique(A_prev.indices)
                dW = (A_prev[:, cols]).T @ delta
                grads[l] = (cols, np.asarray(dW), db)
            else:
                grads[l] = (None, A_prev.T @ delta, db)
            if l > 0:
                delta = (delta @ self.weights_[l].T) * (Zs[l - 1] > 0.0)
        return loss, grads

    def _apply(self, grads):
        lr = self.learning_rate
        for l, (cols, dW, db) in enumerate(grads):
            if cols is None:
                self.weights_[l] -= lr * dW
            else:
                self.weights_[l][cols, :] -= lr * dW
            self.biases_[l] -= lr * db

    # -- training --------------------------------------------------------

    def fit(self, X, y):
        sizes = self._validate_params()
        X = self._as_csr(X)
        y = np.asarray(y, dtype=np.int64)
        if X.shape[0] != y.shape[0]:
            raise ShapeMismatchError(f"{X.shape[0]} rows vs {y.shape[0]} labels")
        if X.shape[0] == 0:
            raise TooFewRowsError("cannot fit on an empty matrix")
        if not np.isin(y, (0, 1)).all():
            raise ConfigError("labels must be binary 0/1")
        if np.unique(y).shape[0] < 2:
            raise OneClassTrainingError(f"training labels are all {int(y[0])}")

        rng = np.random.default_rng(self.seed)
        dims = [X.shape[1]] + list(sizes) + [_N_OUTPUTS]
        self.weights_ = [
            rng.uniform(-self.init_scale, self.init_scale, size=(dims[i], dims[i + 1]))
            for i in range(len(dims) - 1)
        ]
        self.biases_ = [np.zeros(dims[i + 1], dtype=np.float64) for i in range(len(dims) - 1)]
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1], dtype=np.int64)
        self.training_accuracy_: list[float] = []
        self.training_loss_: list[float] = []

        n = X.shape[0]
        for epoch in range(self.epochs):
            perm = rng.permutation(n)
            batch_losses = []
            for start in range(0, n, self.batch_size):
                rows = perm[start:start + self.batch_size]
                Xb = X[rows]
                out, Zs, As = self._forward_cached(Xb)
                loss, grads = self._backward(y[rows], out, Zs, As)
                if not np.isfinite(loss):
                    raise NonFiniteLossError(
                        f"epoch {epoch + 1}, batch {start // self.batch_size + 1}: "
                        f"loss is {loss}")
                self._apply(grads)
                batch_losses.append(loss)
            self.training_loss_.append(float(np.mean(batch_losses)))
            self.training_accuracy_.append(self._training_accuracy(X, y))
        return self

    def _training_accuracy(self, X: sp.csr_matrix, y: np.ndarray) -> float:
        hits = 0
        for start in range(0, X.shape[0], _CHUNK):
            out, _, _ = self._forward_cached(X[start:start + _CHUNK])
            hits += int((out.argmax(axis=1) == y[start:start + _CHUNK]).sum())
        return hits / X.shape[0]

    # -- inference -------------------------------------------------------

    def _check_ready(self, X) -> sp.csr_matrix:
        if not hasattr(self, "weights_"):
            raise ModelError("network is not fitted")
        X = self._as_csr(X)
        if X.shape[1] != self.n_features_in_:
            raise ShapeMismatchError(
                f"X has {X.shape[1]} features, model was trained on {self.n_features_in_}")
        return X

    def forward(self, X) -> np.ndarray:
        """Network outputs, shape (n_rows, 2), computed in chunks."""
        X = self._check_ready(X)
        parts = []
        for start in range(0, X.shape[0], _CHUNK):
            out, _, _ = self._forward_cached(X[start:start + _CHUNK])
            parts.append(out)
        if not parts:
            return np.empty((0, _N_OUTPUTS), dtype=np.float64)
        return np.vstack(parts)

    def predict(self, X) -> np.ndarray:
        return self.forward(X).argmax(axis=1).astype(np.int64)

    def loss_gradients(self, X, y):
        """Loss and dense per-layer gradients for the whole batch.

        Runs the exact forward/backward used in training and densifies the
        first layer, which makes it the natural hook for numerical
        gradient verification.
        """
        X = self._check_ready(X)
        y = np.asarray(y, dtype=np.int64)
        out, Zs, As = self._forward_cached(X)
        loss, grads = self._backward(y, out, Zs, As)
        dense = []
        for l, (cols, dW, db) in enumerate(grads):
            if cols is None:
                dense.append((dW, db))
            else:
                full = np.zeros_like(self.weights_[l])
                full[cols, :] = dW
                dense.append((full, db))
        return loss, dense

    def loss_on(self, X, y) -> float:
        """Batch loss at the current weights, without any update."""
        X = self._check_ready(X)
        y = np.asarray(y, dtype=np.int64)
        out, _, _ = self._forward_cached(X)
        T = np.zeros((out.shape[0], _N_OUTPUTS), dtype=np.float64)
        T[np.arange(out.shape[0]), y] = 1.0
        return float(((out - T) ** 2).mean())

    # -- persistence -----------------------------------------------------

    def to_dict(self) -> dict:
        if not hasattr(self, "weights_"):
            raise ModelError("network is not fitted")
        return {
            "hidden_layer_sizes": list(self.hidden_layer_sizes),
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "init_scale": self.init_scale,
            "output_activation": self.output_activation,
            "seed": self.seed,
            "input_width": int(self.n_features_in_),
            "layers": [
                {
                    "shape": [int(W.shape[0]), int(W.shape[1])],
                    "weights": W.ravel().tolist(),
                    "bias": b.tolist(),
                }
                for W, b in zip(self.weights_, self.biases_)
            ],
            "training_accuracy": list(self.training_accuracy_),
            "training_loss": list(self.training_loss_),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "MlpClassifier":
        try:
            est = cls(
                hidden_layer_sizes=tuple(payload["hidden_layer_sizes"]),
                learning_rate=payload["learning_rate"],
                batch_size=payload["batch_size"],
                epochs=payload["epochs"],
                init_scale=payload["init_scale"],
                output_activation=payload["output_activation"],
                seed=payload["seed"],
            )
            est.weights_ = []
            est.biases_ = []
            for layer in payload["layers"]:
                rows, cols = layer["shape"]
                W = np.asarray(layer["weights"], dtype=np.float64).reshape(rows, cols)
                b = np.asarray(layer["bias"], dtype=np.float64)
                if b.shape[0] != cols:
                    raise ValueError(f"bias width {b.shape[0]} != {cols}")
                est.weights_.append(W)
                est.biases_.append(b)
            est.n_features_in_ = int(payload["input_width"])
            est.training_accuracy_ = list(payload.get("training_accuracy", []))
            est.training_loss_ = list(payload.get("training_loss", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed network payload: {exc}") from None
        if not est.weights_ or est.weights_[0].shape[0] != est.n_features_in_:
            raise ModelError("network payload is inconsistent with its input width")
        est.classes_ = np.array([0, 1], dtype=np.int64)
        return est
