"""Angle encoding of binary feature vectors and single-feature perturbations.

A present feature (bit 1) rotates its qubit by pi/2 into |+>, an absent one
leaves it in |0>. Perturbing feature ``k`` re-encodes with only angle ``k``
changed; applying X to the encoded qubit would not do anything measurable,
since X|+> = |+>.
"""

from __future__ import annotations

import enum

import numpy as np

from . import statevec
from .errors import FlipError, ShapeError, SizeError

HALF_PI = np.pi / 2


class FlipMode(enum.Enum):
    ONE_TO_ZERO = "one_to_zero"
    ZERO_TO_ONE = "zero_to_one"


class CoFeaturePolicy(enum.Enum):
    QUANTUM_SAMPLED = "quantum_sampled"
    DETERMINISTIC_HOLD = "deterministic_hold"


def as_bits(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ShapeError(f"bit vector must be 1-D, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ShapeError("bit vector entries must be 0 or 1")
    return arr.astype(np.uint8)


def angles_for(x) -> np.ndarray:
    return as_bits(x) * HALF_PI


def encode_angles(thetas) -> statevec.StateVector:
    thetas = np.asarray(thetas, dtype=np.float64)
    s = statevec.zero_state(len(thetas))
    for q, theta in enumerate(thetas):
        if theta != 0.0:  # RY(0) is the identity
            s = statevec.apply_ry(s, q, theta)
    return s


def encode(x) -> statevec.StateVector:
    x = as_bits(x)
    if not 1 <= len(x) <= statevec.MAX_QUBITS:
        raise SizeError(f"feature vector length must be in [1, {statevec.MAX_QUBITS}], got {len(x)}")
    return encode_angles(angles_for(x))


def _check_flip(x: np.ndarray, k: int, mode: FlipMode):
    if not 0 <= k < len(x):
        raise FlipError(k, mode, f"feature index {k} out of range for length {len(x)}")
    need = 1 if mode is FlipMode.ONE_TO_ZERO else 0
    if x[k] != need:
        raise FlipError(k, mode, f"{mode.name} flip needs feature {k} == {need}, found {x[k]}")


def _flipped_angles(x: np.ndarray, k: int, mode: FlipMode) -> np.ndarray:
    thetas = angles_for(x)
    thetas[k] = 0.0 if mode is FlipMode.ONE_TO_ZERO else HALF_PI
    return thetas


def perturbed_state(x, k: int, mode: FlipMode = FlipMode.ONE_TO_ZERO,
                    encoded: statevec.StateVector | None = None) -> statevec.StateVector:
    """Encoded state of ``x`` with only feature ``k``'s angle changed.

    Re-encodes from |0...0> by default. Passing ``encoded`` (the output of
    ``encode(x)``) instead rotates qubit ``k`` by the angle difference, one
    gate rather than popcount(x) of them; equal up to rounding.
    """
    x = as_bits(x)
    _check_flip(x, k, mode)
    if encoded is None:
        return encode_angles(_flipped_angles(x, k, mode))
    delta = -HALF_PI if mode is FlipMode.ONE_TO_ZERO else HALF_PI
    return statevec.apply_ry(encoded, k, delta)


def draw_perturbed_bits(
    x,
    k: int,
    mode: FlipMode = FlipMode.ONE_TO_ZERO,
    policy: CoFeaturePolicy = CoFeaturePolicy.QUANTUM_SAMPLED,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
    size: int | None = None,
    backend: str = "dense",
    encoded: statevec.StateVector | None = None,
) -> np.ndarray:
    """Draw perturbed bitstrings for feature ``k``.

    Returns one bit vector, or a ``(size, n)`` array of independent draws.
    Under a finite ``shots`` budget each draw gets its own freshly estimated
    empirical distribution. ``backend="product"`` samples qubits from their
    marginals without building the 2^n state (analytic mode only).
    """
    x = as_bits(x)
    _check_flip(x, k, mode)
    if policy is CoFeaturePolicy.DETERMINISTIC_HOLD:
        flipped = x.copy()
        flipped[k] ^= 1
        return flipped if size is None else np.tile(flipped, (size, 1))

    if rng is None:
        raise ValueError("QUANTUM_SAMPLED draws need an rng")
    if backend == "product":
        if shots is not None:
            raise ValueError("the product backend only supports analytic (shots=None) sampling")
        return statevec.sample_product(_flipped_angles(x, k, mode), rng, size)
    if backend != "dense":
        raise ValueError(f"unknown backend {backend!r}")

    p = statevec.probabilities(perturbed_state(x, k, mode, encoded))
    if shots is None:
        return statevec.sample(p, rng, size)
    if size is None:
        return statevec.sample(statevec.sample_shots(p, shots, rng), rng)
    rows = [statevec.sample(statevec.sample_shots(p, shots, rng), rng) for _ in range(size)]
    return np.array(rows, dtype=np.uint8).reshape(size, len(x))
