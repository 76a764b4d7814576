"""Localized diagonal-operator approximation: least-squares compression of
diagonal circuit blocks onto short nearest-neighbor ansaetze.

A diagonal n-qubit unitary is fully described by its 2^n phase angles.  Any
circuit made of phase-type gates (P, CP, RZZ, RZ, CZ) and SWAP pairs whose net
wire permutation is the identity is diagonal, and its phases can be read off
exactly by symbolic propagation: track the wire permutation and accumulate the
additive phase contribution of every gate per basis index.  No matrix algebra
is involved, so the extraction is exact and works at any width.

An ansatz whose gates are CP or RZZ on nearest-neighbor pairs has phases that
are linear in the gate parameters x: theta(x) = M x.  Matching the ansatz
phases against a target phase vector phi is then a linear least-squares
problem.  Rows where both sides are identically zero (trivial 0 = 0
constraints) are dropped; rows with a zero ansatz row but nonzero target are
kept because they carry irreducible residual.  The minimum-norm solution is
x = A^+ b with the Moore-Penrose pseudoinverse, computed from the normal
equations (A^T A)^{-1} A^T when A has full column rank and by a rank-revealing
SVD otherwise.

Phases are accumulated without modular reduction: entries such as -2*theta are
kept as raw sums, since wrapping them into (-pi, pi] would corrupt the
least-squares geometry at large angles.  ``PhaseVector.reduced()`` is available
when wrapped phases are explicitly wanted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit

# Gate kinds admissible in a diagonal circuit (plus SWAP as a pure permutation).
_DIAGONAL_KINDS = frozenset({"P", "CP", "RZZ", "RZ", "CZ"})


class NonDiagonalCircuitError(ValueError):
    """Raised when a circuit fed to the phase extractor is not diagonal."""

    def __init__(self, message: str, gate_index: int | None = None):
        super().__init__(message)
        self.gate_index = gate_index


@dataclass(frozen=True)
class PhaseVector:
    """2^n accumulated diagonal phases, little-endian basis indexing."""

    n_qubits: int
    phases: np.ndarray

    def __post_init__(self) -> None:
        if self.phases.shape != (2**self.n_qubits,):
            raise ValueError(
                f"expected {2**self.n_qubits} phases, got {self.phases.shape}"
            )
        if not np.all(np.isfinite(self.phases)):
            raise ValueError("non-finite phase entries")

    def reduced(self) -> "PhaseVector":
        """Phases wrapped into (-pi, pi]."""
        wrapped = np.mod(-self.phases + np.pi, 2.0 * np.pi)
        return PhaseVector(self.n_qubits, np.pi - wrapped)

    def unitary_diagonal(self) -> np.ndarray:
        return np.exp(1j * self.phases)


@dataclass(frozen=True)
class AnsatzTemplate:
    """Ordered diagonal two-qubit gates on nearest-neighbor pairs.

    Each entry is (kind, q1, q2, parameter_index) with kind in {"CP", "RZZ"}
    and |q1 - q2| = 1.  ``m`` is the parameter count; every parameter index in
    0..m-1 must be used at least once.
    """

    n_qubits: int
    gates: tuple[tuple[str, int, int, int], ...]
    m: int

    def __post_init__(self) -> None:
        used = set()
        for kind, q1, q2, p in self.gates:
            if kind not in ("CP", "RZZ"):
                raise ValueError(f"unsupported ansatz gate kind {kind!r}")
            if abs(q1 - q2) != 1:
                raise ValueError(f"ansatz pair ({q1},{q2}) is not nearest-neighbor")
            if not (0 <= q1 < self.n_qubits and 0 <= q2 < self.n_qubits):
                raise ValueError(f"ansatz pair ({q1},{q2}) outside register")
            if not (0 <= p < self.m):
                raise ValueError(f"parameter index {p} outside [0, {self.m})")
            used.add(p)
        if used != set(range(self.m)):
            raise ValueError("every parameter index must be used at least once")


def flavor_template(N: int, kind: str) -> AnsatzTemplate:
    """The 2N-qubit, (2N-1)-parameter ladder used to compress the quartic block:
    one gate per even pair (0,1), (2,3), ... then one per odd pair (1,2), (3,4), ...
    Parameters are indexed in that order."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if kind not in ("CP", "RZZ"):
        raise ValueError(f"kind must be CP or RZZ, got {kind!r}")
    nq = 2 * N
    gates = []
    p = 0
    for i in range(0, nq - 1, 2):
        gates.append((kind, i, i + 1, p))
        p += 1
    for i in range(1, nq - 1, 2):
        gates.append((kind, i, i + 1, p))
        p += 1
    return AnsatzTemplate(nq, tuple(gates), p)


def diagonal_phase_of_circuit(circuit: Circuit, reduce: bool = False) -> PhaseVector:
    """Exact diagonal phases of a P/CP/RZZ/RZ/CZ + SWAP circuit.

    SWAPs must pair up so that the final wire order is restored; any
    non-diagonal gate is rejected with its position.  Raw accumulated phases
    are returned unless ``reduce`` is set.
    """
    n = circuit.width
    idx = np.arange(2**n)
    cur = idx.copy()  # cur[k] = present basis index of the state that began as k
    phases = np.zeros(2**n)
    for i, g in enumerate(circuit.gates):
        if g.kind == "SWAP":
            p, q = g.qubits
            bp = (cur >> p) & 1
            bq = (cur >> q) & 1
            cur = cur ^ ((bp ^ bq) * ((1 << p) | (1 << q)))
        elif g.kind in _DIAGONAL_KINDS:
            if g.kind == "P":
                phases += g.angle * ((cur >> g.qubits[0]) & 1)
            elif g.kind == "RZ":
                phases += g.angle * ((cur >> g.qubits[0]) & 1) - g.angle / 2.0
            elif g.kind == "CZ":
                p, q = g.qubits
                phases += np.pi * (((cur >> p) & 1) & ((cur >> q) & 1))
            elif g.kind == "CP":
                p, q = g.qubits
                phases += g.angle * (((cur >> p) & 1) & ((cur >> q) & 1))
            else:  # RZZ: -x/2 on equal bits, +x/2 on unequal bits
                p, q = g.qubits
                neq = ((cur >> p) & 1) ^ ((cur >> q) & 1)
                phases += g.angle * (neq - 0.5)
        else:
            raise NonDiagonalCircuitError(
                f"gate {g.kind}{g.qubits} at position {i} is not diagonal",
                gate_index=i,
            )
    if not np.array_equal(cur, idx):
        last_swap = max(
            (i for i, g in enumerate(circuit.gates) if g.kind == "SWAP"), default=None
        )
        raise NonDiagonalCircuitError(
            "SWAP gates do not restore the original wire order "
            f"(last SWAP at position {last_swap})",
            gate_index=last_swap,
        )
    pv = PhaseVector(n, phases)
    return pv.reduced() if reduce else pv


def ansatz_phase_map(template: AnsatzTemplate) -> np.ndarray:
    """Matrix M with theta(x) = M x: one row per basis index, one column per
    parameter.  CP(x) on (p,q) adds x where both bits are 1; RZZ(x) adds -x/2
    on equal bits and +x/2 on unequal bits."""
    k = np.arange(2**template.n_qubits)
    M = np.zeros((2**template.n_qubits, template.m))
    for kind, q1, q2, p in template.gates:
        b1 = (k >> q1) & 1
        b2 = (k >> q2) & 1
        if kind == "CP":
            M[:, p] += b1 & b2
        else:
            M[:, p] += (b1 ^ b2) - 0.5
    return M


@dataclass(frozen=True)
class LinearSystem:
    """Phase-matching constraints A x = b after dropping trivial 0 = 0 rows.

    row_index_map[i] is the basis index behind constraint i.  Rows with a zero
    A row but nonzero b are retained; they carry irreducible residual.
    """

    A: np.ndarray
    b: np.ndarray
    row_index_map: np.ndarray


def assemble_system(target: PhaseVector, template: AnsatzTemplate) -> LinearSystem:
    if target.n_qubits != template.n_qubits:
        raise ValueError(
            f"target on {target.n_qubits} qubits vs template on {template.n_qubits}"
        )
    M = ansatz_phase_map(template)
    keep = ~((target.phases == 0.0) & np.all(M == 0.0, axis=1))
    rows = np.nonzero(keep)[0]
    return LinearSystem(A=M[keep], b=target.phases[keep], row_index_map=rows)


def pseudoinverse(A: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudoinverse: (A^T A)^{-1} A^T when A has full column
    rank, otherwise the SVD-based pseudoinverse."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("expected a matrix")
    if A.size and np.linalg.matrix_rank(A) == A.shape[1]:
        return np.linalg.solve(A.T @ A, A.T)
    return np.linalg.pinv(A)


@dataclass(frozen=True)
class LdoaSolution:
    """Least-squares ansatz parameters and both residual norms.

    residual_phase_norm is ||b - A x|| over the retained constraints;
    residual_unitary_norm is the diagonal 2-norm ||U_target - U_ansatz|| over
    the full 2^n diagonal (excluded rows are exact matches and contribute 0).
    """

    x: np.ndarray
    residual_phase_norm: float
    residual_unitary_norm: float


def pseudoinverse_solve(system: LinearSystem) -> LdoaSolution:
    if system.A.shape[0] == 0:
        x = np.zeros(system.A.shape[1])
        return LdoaSolution(x, 0.0, 0.0)
    x = pseudoinverse(system.A) @ system.b
    d = system.b - system.A @ x
    return LdoaSolution(
        x=x,
        residual_phase_norm=float(np.linalg.norm(d)),
        residual_unitary_norm=float(np.sqrt(np.sum(2.0 - 2.0 * np.cos(d)))),
    )


def residual_unitary_norm(
    target: PhaseVector, template: AnsatzTemplate, x: np.ndarray
) -> float:
    """||U_target - U_ansatz(x)|| over the full diagonal:
    sqrt( sum_k |e^{i phi_k} - e^{i theta_k(x)}|^2 )
    = sqrt( sum_k 2 - 2 cos(phi_k - theta_k(x)) )."""
    theta = ansatz_phase_map(template) @ np.asarray(x, dtype=float)
    d = target.phases - theta
    return float(np.sqrt(np.sum(2.0 - 2.0 * np.cos(d))))


def solve_ansatz(target: PhaseVector, template: AnsatzTemplate) -> LdoaSolution:
    """Assemble and solve in one step."""
    return pseudoinverse_solve(assemble_system(target, template))
