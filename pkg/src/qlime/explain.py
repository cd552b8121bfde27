"""Q-LIME and classical LIME explainers, plus top-k and overlap metrics.

Both explainers attribute the positive-class probability of a
``LogisticModel`` (or anything with ``predict_proba``/``predict_proba_batch``
and an ``eval_counter``). Entries are ranked by absolute weight, ties broken
by token.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import encoder, statevec
from .encoder import CoFeaturePolicy, FlipMode
from .errors import ExplanationError, ShapeError, SizeError


@dataclass(frozen=True)
class Entry:
    index: int
    token: str
    weight: float


@dataclass
class Explanation:
    entries: list[Entry]
    method: str
    seed: int | None
    shots: int | None
    model_evals: int
    vocab: tuple[str, ...] = field(default=(), repr=False)

    def to_dict(self, top_k: int | None = None) -> dict:
        entries = self.entries if top_k is None else self.entries[:top_k]
        return {
            "method": self.method,
            "seed": self.seed,
            "shots": self.shots,
            "model_evals": self.model_evals,
            "entries": [{"index": e.index, "token": e.token, "weight": e.weight} for e in entries],
        }

    def to_json(self, top_k: int | None = None) -> str:
        return json.dumps(self.to_dict(top_k), indent=2)

    def weights(self) -> dict[int, float]:
        return {e.index: e.weight for e in self.entries}


@dataclass(frozen=True)
class LimeConfig:
    n_perturbations: int = 300
    kernel_width: float = 25.0
    ridge_lambda: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_perturbations < 1:
            raise ValueError(f"n_perturbations must be >= 1, got {self.n_perturbations}")
        if not (self.kernel_width > 0 and self.ridge_lambda > 0):
            raise ValueError("kernel_width and ridge_lambda must be positive")


@dataclass(frozen=True)
class QlimeConfig:
    flip_mode: FlipMode = FlipMode.ONE_TO_ZERO
    policy: CoFeaturePolicy = CoFeaturePolicy.QUANTUM_SAMPLED
    shots: int | None = None
    repeats: int = 1
    seed: int = 0
    backend: str = "dense"

    def __post_init__(self):
        if self.backend not in ("dense", "product"):
            raise ValueError(f"backend must be 'dense' or 'product', got {self.backend!r}")
        if self.backend == "product" and self.shots is not None:
            raise ValueError("the product backend only supports shots=None")
        if self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be >= 1 or None, got {self.shots}")


def _tokens(vocab) -> tuple[str, ...]:
    return tuple(getattr(vocab, "tokens", vocab))


def _check_instance(m, x, tokens):
    x = encoder.as_bits(x)
    if len(x) != len(tokens):
        raise ShapeError(f"instance has {len(x)} features, vocabulary has {len(tokens)}")
    if len(x) != len(m.weights):
        raise ShapeError(f"instance has {len(x)} features, model expects {len(m.weights)}")
    return x


def _ranked(pairs, tokens) -> list[Entry]:
    entries = [Entry(int(k), tokens[k], float(w)) for k, w in pairs]
    entries.sort(key=lambda e: (-abs(e.weight), e.token))
    return entries


def qlime_explain(m, x, vocab, cfg: QlimeConfig = QlimeConfig()) -> Explanation:
    """Score each flippable feature by the prediction change its flip causes.

    For ONE_TO_ZERO every present feature is scored: its qubit is reset to
    |0>, ``cfg.repeats`` bitstrings are measured from the perturbed state
    (or the single-bit flip is used under DETERMINISTIC_HOLD), and the
    weight is f(x) minus the mean prediction over those bitstrings.
    """
    tokens = _tokens(vocab)
    x = _check_instance(m, x, tokens)
    if len(x) > statevec.MAX_QUBITS:
        raise SizeError(f"at most {statevec.MAX_QUBITS} features can be encoded, got {len(x)}")

    rng = np.random.default_rng(cfg.seed)
    f_x = m.predict_proba(x)
    evals = 1
    target = 1 if cfg.flip_mode is FlipMode.ONE_TO_ZERO else 0
    flips = np.flatnonzero(x == target)
    encoded = None
    if len(flips) and cfg.backend == "dense" and cfg.policy is CoFeaturePolicy.QUANTUM_SAMPLED:
        encoded = encoder.encode(x)
    pairs = []
    for k in flips:
        Z = encoder.draw_perturbed_bits(
            x, int(k), cfg.flip_mode, cfg.policy, cfg.shots, rng,
            size=cfg.repeats, backend=cfg.backend, encoded=encoded,
        )
        preds = m.predict_proba_batch(Z)
        evals += len(Z)
        pairs.append((k, f_x - preds.mean()))
    return Explanation(_ranked(pairs, tokens), "QLIME", cfg.seed, cfg.shots, evals, tokens)


def _cosine_distance(x: np.ndarray, Z: np.ndarray) -> np.ndarray:
    xn = np.linalg.norm(x)
    zn = np.linalg.norm(Z, axis=1)
    denom = xn * zn
    sim = np.divide(Z @ x, denom, out=np.zeros(len(Z)), where=denom > 0)
    return 1.0 - sim


def weighted_ridge(Z, y, sample_weight, ridge_lambda):
    """Ridge regression with an unpenalized intercept; returns (coef, intercept)."""
    sw = sample_weight / sample_weight.sum()
    z_mean = sw @ Z
    y_mean = sw @ y
    Zc = Z - z_mean
    yc = y - y_mean
    A = Zc.T @ (Zc * sample_weight[:, None]) + ridge_lambda * np.eye(Z.shape[1])
    coef = np.linalg.solve(A, Zc.T @ (yc * sample_weight))
    return coef, y_mean - z_mean @ coef


def lime_explain(m, x, vocab, cfg: LimeConfig = LimeConfig()) -> Explanation:
    """Classical LIME for bag-of-words instances.

    Present features are independently kept or dropped with probability 1/2;
    a ridge model weighted by ``exp(-d^2 / width^2)`` (d = cosine distance to
    the instance) is fit to the model's predictions on the present-feature
    indicators.
    """
    tokens = _tokens(vocab)
    x = _check_instance(m, x, tokens)
    present = np.flatnonzero(x)
    if len(present) == 0:
        raise ExplanationError("instance has no present features to perturb")

    rng = np.random.default_rng(cfg.seed)
    keep = rng.integers(0, 2, size=(cfg.n_perturbations, len(present)), dtype=np.uint8)
    Z = np.zeros((cfg.n_perturbations, len(x)), dtype=np.uint8)
    Z[:, present] = keep
    preds = m.predict_proba_batch(Z)
    d = _cosine_distance(x.astype(np.float64), Z.astype(np.float64))
    pi = np.exp(-(d**2) / cfg.kernel_width**2)
    coef, _ = weighted_ridge(keep.astype(np.float64), preds, pi, cfg.ridge_lambda)
    entries = _ranked(zip(present, coef), tokens)
    return Explanation(entries, "LIME", cfg.seed, None, cfg.n_perturbations, tokens)


def surrogate_eval(e: Explanation, x) -> float:
    """Local linear surrogate: sum of entry weights over the features set in ``x``."""
    x = encoder.as_bits(x)
    if e.vocab and len(x) != len(e.vocab):
        raise ShapeError(f"vector has {len(x)} features, explanation covers {len(e.vocab)}")
    total = 0.0
    for entry in e.entries:
        if entry.index >= len(x):
            raise ShapeError(f"entry index {entry.index} out of range for length {len(x)}")
        total += entry.weight * x[entry.index]
    return float(total)


def top_k(e: Explanation, k: int) -> list[str]:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return [entry.token for entry in e.entries[:k]]


def overlap(a: Explanation, b: Explanation, k: int = 5) -> int:
    if a.vocab and b.vocab and a.vocab != b.vocab:
        raise ExplanationError("explanations were built over different vocabularies")
    return len(set(top_k(a, k)) & set(top_k(b, k)))
