"""Binary logistic regression over presence/absence features.

Trained from w = 0, b = 0 by full-batch proximal gradient descent on mean
cross-entropy plus (lambda/2)||w||^2. The L2 term is handled in closed form
(prox step), so large lambda cannot make the iteration diverge; a step that
would raise the loss is retried at half the learning rate.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, TrainingError

# Keep outputs strictly inside (0, 1) even when the logit saturates.
_P_MIN = np.nextafter(0.0, 1.0)
_P_MAX = np.nextafter(1.0, 0.0)


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class TrainConfig:
    l2_lambda: float = 1e-4
    max_iters: int = 2000
    learning_rate: float = 0.5
    tolerance: float = 1e-6
    seed: int = 0  # unused by the deterministic solver; kept for config echo

    def __post_init__(self):
        for name in ("l2_lambda", "max_iters", "learning_rate", "tolerance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(eq=False)
class LogisticModel:
    weights: np.ndarray
    bias: float
    vocab: tuple[str, ...] | None = None
    eval_counter: int = 0
    history: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = float(self.bias)
        self._lock = threading.Lock()

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def _count(self, k: int):
        with self._lock:
            self.eval_counter += k

    def _check(self, X, ndim):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != ndim or X.shape[-1] != self.n_features:
            raise ShapeError(
                f"expected {'a vector' if ndim == 1 else 'rows'} of length {self.n_features}, "
                f"got shape {X.shape}"
            )
        return X

    def predict_proba(self, x) -> float:
        """Positive-class probability of one bit vector. Counts one evaluation."""
        x = self._check(x, 1)
        self._count(1)
        return float(np.clip(sigmoid(x @ self.weights + self.bias), _P_MIN, _P_MAX))

    def predict_proba_batch(self, X) -> np.ndarray:
        """Row-wise probabilities; counts one evaluation per row."""
        X = self._check(X, 2)
        self._count(len(X))
        return np.clip(sigmoid(X @ self.weights + self.bias), _P_MIN, _P_MAX)

    def reset_counter(self):
        with self._lock:
            self.eval_counter = 0

    def to_json(self) -> str:
        doc = {"weights": self.weights.tolist(), "bias": self.bias,
               "vocab": list(self.vocab) if self.vocab is not None else None}
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "LogisticModel":
        doc = json.loads(text)
        try:
            weights, bias = doc["weights"], doc["bias"]
        except (KeyError, TypeError) as exc:
            raise ShapeError(f"model JSON is missing {exc}") from exc
        vocab = doc.get("vocab")
        if vocab is not None and len(vocab) != len(weights):
            raise ShapeError(f"model has {len(weights)} weights but {len(vocab)} vocab tokens")
        return cls(np.array(weights, dtype=np.float64), bias,
                   tuple(vocab) if vocab is not None else None)


def loss_and_grad(w, b, X, y, l2_lambda):
    """Mean binary cross-entropy + (lambda/2)||w||^2 and its gradient in (w, b)."""
    z = X @ w + b
    # log(1 + e^z) - y z, computed without overflow
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2_lambda * (w @ w)
    r = sigmoid(z) - y
    gw = X.T @ r / len(y) + l2_lambda * w
    gb = r.mean()
    return loss, gw, gb


def _data_loss(w, b, X, y):
    z = X @ w + b
    return np.mean(np.logaddexp(0.0, z) - y * z)


def train_logistic(X, y, cfg: TrainConfig = TrainConfig(), vocab=None) -> LogisticModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise TrainingError(f"need a non-empty 2-D design matrix, got shape {X.shape}")
    if len(y) != len(X):
        raise TrainingError(f"{len(X)} rows but {len(y)} labels")
    if not np.isin(y, (0.0, 1.0)).all():
        raise TrainingError("labels must be 0 or 1")
    if vocab is not None and len(vocab) != X.shape[1]:
        raise TrainingError(f"{X.shape[1]} features but {len(vocab)} vocab tokens")

    lam = cfg.l2_lambda
    w = np.zeros(X.shape[1])
    b = 0.0
    lr = cfg.learning_rate
    loss, gw, gb = loss_and_grad(w, b, X, y, lam)
    history = [loss]
    for _ in range(cfg.max_iters):
        if max(np.abs(gw).max(initial=0.0), abs(gb)) < cfg.tolerance:
            break
        g_data = gw - lam * w
        while True:
            w_new = (w - lr * g_data) / (1.0 + lr * lam)
            b_new = b - lr * gb
            new_loss = _data_loss(w_new, b_new, X, y) + 0.5 * lam * (w_new @ w_new)
            if new_loss <= loss or lr < 1e-12:
                break
            lr *= 0.5
        w, b = w_new, b_new
        loss, gw, gb = loss_and_grad(w, b, X, y, lam)
        history.append(loss)
    m = LogisticModel(w, b, tuple(vocab) if vocab is not None else None)
    m.history = history
    return m


def accuracy(m: LogisticModel, X, y) -> float:
    """Fraction of rows whose thresholded prediction (>= 0.5 is positive) matches ``y``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if len(X) == 0:
        raise ValueError("accuracy needs at least one instance")
    if len(y) != len(X):
        raise ShapeError(f"{len(X)} rows but {len(y)} labels")
    pred = (m.predict_proba_batch(X) >= 0.5).astype(int)
    return float(np.mean(pred == y))
