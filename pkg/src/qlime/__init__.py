"""Quantum-inspired local explanations for binary bag-of-words classifiers."""

from .encoder import CoFeaturePolicy, FlipMode, angles_for, draw_perturbed_bits, encode, perturbed_state
from .explain import (
    Entry,
    Explanation,
    LimeConfig,
    QlimeConfig,
    lime_explain,
    overlap,
    qlime_explain,
    surrogate_eval,
    top_k,
)
from .model import LogisticModel, TrainConfig, accuracy, train_logistic

__version__ = "0.1.0"
