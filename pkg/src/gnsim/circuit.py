"""Gate-level circuit representation, lowering to a CZ + single-qubit basis, and
resource statistics.

Conventions used throughout the package:

- Qubit/bit indexing is little-endian: qubit 0 is the least significant bit of a
  computational-basis index.
- Angles are in radians.  ``P(theta)`` = diag(1, e^{i theta});
  ``CP(theta)`` adds phase theta to the |11> component;
  ``RZZ(theta)`` = exp(-i (theta/2) Z (x) Z);
  ``RX``/``RZ`` follow exp(-i (theta/2) X) / exp(-i (theta/2) Z).
- Circuits are plain ordered gate lists.  They are treated as immutable once
  shared between workers; construction (append/extend) is single-owner.

Lowering maps every two-qubit gate onto a fixed CZ-equivalent budget:
CP -> 2 CZ, RZZ -> 2 CZ, SWAP -> 3 CZ, CX -> 1 CZ.  All equivalences hold up to
global phase and are exercised against dense unitaries in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Gate kinds with an angle parameter / with two qubits.
ANGLED_KINDS = frozenset({"P", "CP", "RZZ", "RX", "RZ"})
TWO_QUBIT_KINDS = frozenset({"CP", "RZZ", "SWAP", "CX", "CZ"})
ALL_KINDS = frozenset({"P", "CP", "RZZ", "SWAP", "RX", "RZ", "X", "CX", "CZ", "U1Q"})

# Basis after lowering.
LOWERED_KINDS = frozenset({"CZ", "RZ", "RX", "P", "U1Q"})

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """One gate: a kind tag, target qubits, and an optional angle or 2x2 matrix."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind} gate has repeated qubits {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")
        if self.kind in ANGLED_KINDS and self.angle is None:
            raise ValueError(f"{self.kind} gate requires an angle")
        if self.kind == "U1Q":
            if self.matrix is None or self.matrix.shape != (2, 2):
                raise ValueError("U1Q gate requires a 2x2 matrix")
            dev = np.max(np.abs(self.matrix @ self.matrix.conj().T - np.eye(2)))
            if dev > 1e-12:
                raise ValueError(f"U1Q matrix is not unitary (deviation {dev:.2e})")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2


def phase(theta: float, q: int) -> Gate:
    return Gate("P", (q,), angle=theta)


def cphase(theta: float, q1: int, q2: int) -> Gate:
    return Gate("CP", (q1, q2), angle=theta)


def rzz(theta: float, q1: int, q2: int) -> Gate:
    return Gate("RZZ", (q1, q2), angle=theta)


def swap(q1: int, q2: int) -> Gate:
    return Gate("SWAP", (q1, q2))


def rx(theta: float, q: int) -> Gate:
    return Gate("RX", (q,), angle=theta)


def rz(theta: float, q: int) -> Gate:
    return Gate("RZ", (q,), angle=theta)


def pauli_x(q: int) -> Gate:
    return Gate("X", (q,))


def cx(control: int, target: int) -> Gate:
    return Gate("CX", (control, target))


def cz(q1: int, q2: int) -> Gate:
    return Gate("CZ", (q1, q2))


def unitary_1q(matrix: np.ndarray, q: int) -> Gate:
    return Gate("U1Q", (q,), matrix=np.asarray(matrix, dtype=complex))


def hadamard(q: int) -> Gate:
    return unitary_1q(_HADAMARD, q)


@dataclass
class Circuit:
    """An ordered gate list over ``width`` qubits."""

    width: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError("circuit width must be >= 1")
        for i, g in enumerate(self.gates):
            self._check(g, i)

    def _check(self, gate: Gate, index: int | None = None) -> None:
        if any(q >= self.width for q in gate.qubits):
            where = "" if index is None else f" at position {index}"
            raise IndexError(
                f"gate {gate.kind}{gate.qubits}{where} exceeds circuit width {self.width}"
            )

    def append(self, gate: Gate) -> "Circuit":
        """Append one gate, preserving order.  Returns self for chaining."""
        self._check(gate)
        self.gates.append(gate)
        return self

    def extend(self, gates) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    def concat(self, other: "Circuit") -> "Circuit":
        """New circuit equal to self followed by other (widths must match)."""
        if other.width != self.width:
            raise ValueError("cannot concatenate circuits of different widths")
        return Circuit(self.width, list(self.gates) + list(other.gates))

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)


@dataclass(frozen=True)
class CircuitStats:
    """Resource summary.  cz_depth / cz_count refer to the lowered circuit;
    two_qubit_depth is the two-qubit layer depth of the circuit as given."""

    total_depth: int
    two_qubit_depth: int
    cz_depth: int
    cz_count: int


def depth(circuit: Circuit, which: str = "all") -> int:
    """ASAP greedy layer count.

    Each gate lands on layer 1 + max(layer of the previous gate on each of its
    qubits).  With ``which="two_qubit"`` only two-qubit gates are counted and
    only they advance the per-qubit frontier.
    """
    if which not in ("all", "two_qubit"):
        raise ValueError(f"unknown depth filter {which!r}")
    frontier = [0] * circuit.width
    top = 0
    for g in circuit.gates:
        if which == "two_qubit" and not g.is_two_qubit:
            continue
        layer = 1 + max(frontier[q] for q in g.qubits)
        for q in g.qubits:
            frontier[q] = layer
        if layer > top:
            top = layer
    return top


def _lower_gate(g: Gate) -> list[Gate]:
    if g.kind in ("P", "RZ", "RX", "CZ", "U1Q"):
        return [g]
    if g.kind == "X":
        return [unitary_1q(_PAULI_X, g.qubits[0])]
    if g.kind == "CX":
        c, t = g.qubits
        return [hadamard(t), cz(c, t), hadamard(t)]
    if g.kind == "RZZ":
        # RZZ(b) on (p,q) = H_q . CZ . RX_q(b) . CZ . H_q   (H RZ H = RX)
        p, q = g.qubits
        return [hadamard(q), cz(p, q), rx(g.angle, q), cz(p, q), hadamard(q)]
    if g.kind == "CP":
        # CP(t) = P(t/2) (x) P(t/2) . RZZ(-t/2), up to global phase e^{-it/4}
        p, q = g.qubits
        out = [phase(g.angle / 2.0, p), phase(g.angle / 2.0, q)]
        out.extend(_lower_gate(rzz(-g.angle / 2.0, p, q)))
        return out
    if g.kind == "SWAP":
        p, q = g.qubits
        out: list[Gate] = []
        for c, t in ((p, q), (q, p), (p, q)):
            out.extend(_lower_gate(cx(c, t)))
        return out
    raise ValueError(f"cannot lower gate kind {g.kind!r}")


def lower_to_cz(circuit: Circuit) -> Circuit:
    """Rewrite onto the {CZ, RZ, RX, P, U1Q} basis, equivalent up to global phase."""
    out = Circuit(circuit.width)
    for g in circuit.gates:
        out.extend(_lower_gate(g))
    return out


def stats(circuit: Circuit) -> CircuitStats:
    """Depth and CZ-count summary of the circuit after lowering."""
    lowered = lower_to_cz(circuit)
    return CircuitStats(
        total_depth=depth(lowered, "all"),
        two_qubit_depth=depth(circuit, "two_qubit"),
        cz_depth=depth(lowered, "two_qubit"),
        cz_count=sum(1 for g in lowered.gates if g.kind == "CZ"),
    )


STATS_CSV_HEADER = "r,total_depth,cz_depth,cz_count"


def circuit_to_text(circuit: Circuit) -> str:
    """Line-oriented dump: one gate per line, ``KIND angle q1 [q2]``.

    Angle-free kinds omit the angle field.  U1Q lines carry the eight matrix
    components (re/im, row-major) in place of the angle.  Angles and matrix
    entries are written with 17 significant digits.
    """
    lines = [f"# width {circuit.width}"]
    for g in circuit.gates:
        qs = " ".join(str(q) for q in g.qubits)
        if g.kind in ANGLED_KINDS:
            lines.append(f"{g.kind} {g.angle:.17g} {qs}")
        elif g.kind == "U1Q":
            m = " ".join(
                f"{v:.17g}" for e in g.matrix.ravel() for v in (e.real, e.imag)
            )
            lines.append(f"U1Q {m} {qs}")
        else:
            lines.append(f"{g.kind} {qs}")
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    """Parse the ``circuit_to_text`` format back into a Circuit."""
    width = None
    gates: list[Gate] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "width":
                width = int(parts[1])
            continue
        tok = line.split()
        kind = tok[0]
        if kind in ANGLED_KINDS:
            angle = float(tok[1])
            qs = tuple(int(x) for x in tok[2:])
            gates.append(Gate(kind, qs, angle=angle))
        elif kind == "U1Q":
            vals = [float(x) for x in tok[1:9]]
            mat = np.array(
                [
                    [vals[0] + 1j * vals[1], vals[2] + 1j * vals[3]],
                    [vals[4] + 1j * vals[5], vals[6] + 1j * vals[7]],
                ]
            )
            gates.append(unitary_1q(mat, int(tok[9])))
        else:
            gates.append(Gate(kind, tuple(int(x) for x in tok[1:])))
    if width is None:
        width = 1 + max((q for g in gates for q in g.qubits), default=0)
    return Circuit(width, gates)
