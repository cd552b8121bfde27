"""Dense state-vector simulator restricted to RY rotations and Pauli-X.

Basis labels are big-endian: qubit ``i`` is bit ``n - 1 - i`` of the basis
index, so the bitstring of a label reads left to right in qubit order.
States are treated as immutable values; every gate returns a new state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import QubitIndexError, SizeError

MAX_QUBITS = 20
NORM_ATOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if len(self.amplitudes) != 1 << self.n_qubits:
            raise SizeError(
                f"expected {1 << self.n_qubits} amplitudes, got {len(self.amplitudes)}"
            )
        self.amplitudes.setflags(write=False)

    def __len__(self):
        return len(self.amplitudes)


def _check_n(n):
    if not 1 <= n <= MAX_QUBITS:
        raise SizeError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


def _check_qubit(s: StateVector, q: int):
    if not 0 <= q < s.n_qubits:
        raise QubitIndexError(f"qubit {q} out of range for {s.n_qubits}-qubit state")


def _split(amps: np.ndarray, q: int) -> np.ndarray:
    # view as (high bits, qubit q, low bits)
    return amps.reshape(1 << q, 2, -1)


def zero_state(n: int) -> StateVector:
    _check_n(n)
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


def apply_ry(s: StateVector, q: int, theta: float) -> StateVector:
    """Rotate qubit ``q`` by ``RY(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]``."""
    _check_qubit(s, q)
    c, sn = np.cos(theta / 2), np.sin(theta / 2)
    rot = np.array([[c, -sn], [sn, c]])
    # real matrix: act on the interleaved (re, im) float view, one batched matmul
    v = _split(s.amplitudes.view(np.float64), q)
    out = np.matmul(rot, v).reshape(-1).view(np.complex128)
    return StateVector(s.n_qubits, out)


def apply_x(s: StateVector, q: int) -> StateVector:
    _check_qubit(s, q)
    v = _split(s.amplitudes, q)
    return StateVector(s.n_qubits, v[:, ::-1, :].reshape(-1).copy())


def probabilities(s: StateVector) -> np.ndarray:
    a = s.amplitudes
    return a.real**2 + a.imag**2


def index_to_bits(b: int | np.ndarray, n: int) -> np.ndarray:
    """Decode basis index (or array of indices) into big-endian bit rows."""
    shifts = np.arange(n - 1, -1, -1)
    return ((np.asarray(b)[..., None] >> shifts) & 1).astype(np.uint8)


def bits_to_index(bits) -> int:
    b = 0
    for bit in bits:
        b = (b << 1) | int(bit)
    return b


def _n_from_probs(p: np.ndarray) -> int:
    n = len(p).bit_length() - 1
    if n < 1 or len(p) != 1 << n:
        raise SizeError(f"probability vector length {len(p)} is not 2^n with n >= 1")
    return n


def _draw_indices(p: np.ndarray, rng: np.random.Generator, size=None) -> np.ndarray:
    cdf = np.cumsum(p)
    u = rng.random(size) * cdf[-1]
    # side="right" never lands on a zero-probability label
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(p) - 1)


def sample(p: np.ndarray, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw basis labels from ``p`` and return them as bit vectors.

    With ``size=None`` a single length-n vector is returned, otherwise an
    array of shape ``(size, n)``.
    """
    p = np.asarray(p, dtype=np.float64)
    n = _n_from_probs(p)
    return index_to_bits(_draw_indices(p, rng, size), n)


def sample_shots(p: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Empirical distribution of ``shots`` independent measurements of ``p``."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p = np.asarray(p, dtype=np.float64)
    _n_from_probs(p)
    counts = np.bincount(_draw_indices(p, rng, shots), minlength=len(p))
    return counts / shots


def sample_product(thetas, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Measure the product state ``RY(thetas[0]) x ... x RY(thetas[-1]) |0...0>``.

    Draws each qubit from its own marginal, sin^2(theta/2) for reading 1.
    Same distribution as ``sample(probabilities(...))`` on the dense state,
    in O(n) per draw instead of O(2^n).
    """
    p1 = np.sin(np.asarray(thetas, dtype=np.float64) / 2) ** 2
    shape = p1.shape if size is None else (size, len(p1))
    return (rng.random(shape) < p1).astype(np.uint8)
