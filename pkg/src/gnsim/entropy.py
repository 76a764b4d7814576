"""Second Renyi entropy from randomized measurements, with an exact
reduced-density-matrix oracle.

The protocol applies an independent Haar-random single-qubit unitary to every
qubit of subsystem A, reads out the outcome distribution P(s) over A, and
forms the cross-correlation

    X = 2^{|A|} sum_{s,s'} (-2)^{-D[s,s']} P(s) P(s')

with D the Hamming distance.  Averaged over unitary draws, X estimates the
subsystem purity Tr(rho_A^2); the entropy is S2 = -ln(mean X).  The double sum
factorizes over qubits, so X is evaluated by sweeping the 2x2 kernel
[[1, -1/2], [-1/2, 1]] along each axis of the probability tensor
(O(|A| 2^{|A|}) instead of 4^{|A|}).

Draws use independent child seeds spawned from the configured seed, so serial
and parallel execution produce identical ensembles.  Exact-probability mode
reads P(s) from the amplitudes; finite-shot mode draws a multinomial sample
per unitary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import unitary_1q
from .simulate import Statevector, _subsystem_matrix

_KERNEL = np.array([[1.0, -0.5], [-0.5, 1.0]])


@dataclass(frozen=True)
class RMConfig:
    """Randomized-measurement setup: subsystem, draw count, shot mode, seed."""

    subsystem: tuple[int, ...]
    n_unitaries: int
    shots: int | None = None  # None = exact outcome probabilities
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.subsystem) == 0:
            raise ValueError("subsystem must be nonempty")
        if len(set(self.subsystem)) != len(self.subsystem):
            raise ValueError("subsystem qubits must be distinct")
        if self.n_unitaries < 1:
            raise ValueError("need at least one unitary draw")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shot count must be >= 1")


@dataclass(frozen=True)
class PurityEstimate:
    """Per-draw X values with their mean, entropy, and standard error.

    s2 = -ln(x_bar) is only defined for positive x_bar; a non-positive mean
    (possible at small draw/shot counts) is flagged through ``warning`` and
    s2 is NaN rather than an exception.
    """

    x_values: np.ndarray
    x_bar: float
    s2: float
    std_error: float
    warning: str | None = None


def sample_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed 2x2 unitary: QR of a complex Ginibre matrix with the
    R-diagonal phase fixed, giving a deterministic draw per generator state."""
    z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def estimate_X(probabilities: np.ndarray) -> float:
    """Hamming-kernel cross-correlation X of one outcome distribution over A.

    ``probabilities`` is the flat length-2^{|A|} outcome distribution
    (little-endian over the subsystem).  Must sum to 1 within 1e-9.
    """
    p = np.asarray(probabilities, dtype=float)
    n = p.size.bit_length() - 1
    if p.size != 1 << n or n < 1:
        raise ValueError("probability vector length must be a power of two >= 2")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total}, not 1")
    kp = p.reshape((2,) * n)
    for axis in range(n):
        kp = np.tensordot(_KERNEL, kp, axes=([1], [axis]))
        kp = np.moveaxis(kp, 0, axis)
    return float(2**n * np.dot(p, kp.reshape(-1)))


def estimate_purity(state: Statevector, config: RMConfig) -> PurityEstimate:
    """Randomized-measurement purity of the configured subsystem of ``state``."""
    if any(q >= state.n for q in config.subsystem):
        raise ValueError("subsystem extends past the register")
    children = np.random.SeedSequence(config.seed).spawn(config.n_unitaries)
    xs = np.empty(config.n_unitaries)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        rotated = state.copy()
        for q in config.subsystem:
            rotated.apply(unitary_1q(sample_su2(rng), q))
        p = rotated.marginal_probabilities(config.subsystem)
        if config.shots is not None:
            p = rng.multinomial(config.shots, p / p.sum()) / config.shots
        xs[i] = estimate_X(p)
    x_bar = float(xs.mean())
    std_error = float(xs.std(ddof=1) / math.sqrt(len(xs))) if len(xs) > 1 else 0.0
    if x_bar > 0:
        return PurityEstimate(xs, x_bar, -math.log(x_bar), std_error)
    return PurityEstimate(
        xs, x_bar, float("nan"), std_error, warning="non-positive purity estimate"
    )


def exact_purity(state: Statevector, subsystem) -> float:
    """Tr(rho_A^2) from the dense reduced density matrix (|A| <= 14)."""
    subsystem = tuple(subsystem)
    if len(subsystem) > 14:
        raise ValueError("dense reduced density matrix limited to 14 qubits")
    m = _subsystem_matrix(state, subsystem)
    rho = m.T @ m.conj()
    dim = rho.shape[0]
    if np.max(np.abs(rho - rho.conj().T)) > 1e-9:
        raise AssertionError("reduced density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-9:
        raise AssertionError("reduced density matrix trace differs from 1")
    if dim <= 4096:
        if float(np.linalg.eigvalsh(rho).min()) < -1e-9:
            raise AssertionError("reduced density matrix is not positive")
    return float(np.sum(np.abs(rho) ** 2))


def exact_renyi2(state: Statevector, subsystem) -> float:
    """S2 = -ln Tr(rho_A^2) (natural logarithm)."""
    return -math.log(exact_purity(state, subsystem))
