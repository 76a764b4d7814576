"""Trotter step circuits for the lattice Gross-Neveu model on a linear
nearest-neighbor register.

A single first-order step for time slice dt applies, in circuit order, the
quartic interaction blocks, then the odd hop layer, then the even hop layer
(the rightmost factor of the operator product U_even . U_odd . U_int acts
first).  Blocks span 2N qubits: even hop / interaction blocks start at qubit
offsets k with k mod 2N = 0, odd hop blocks at k mod 2N = N, and a block is
emitted only when it fits inside the register.

Angles: theta_h = dt / (2a) for each two-qubit hop rotation and
theta_g = g^2 dt / a for the interaction phases.

The hop block routes flavor-matched qubit pairs together with a triangular
SWAP network of N(N-1) SWAPs (depth 2(N-1)), applies one XY-YX rotation per
flavor, and un-routes.  The interaction block applies P(theta_g/2) on all 2N
qubits followed by a brick ladder of N(2N-1) CP gates interleaved with
2(2N-1)(N-1) SWAPs that lets every qubit pair meet once; pairs on the same
staggered site pick up +theta_g, all other pairs -theta_g.  With an ``ldoa``
mode the CP+SWAP ladder is replaced by the 2N-1 gate nearest-neighbor ansatz
whose parameters solve the phase-matching least squares of :mod:`gnsim.ldoa`;
the parameters are linear in theta_g, so one solve per (N, kind) is reused for
every block and every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import Circuit, Gate, cphase, cx, phase, rx, rz, rzz, swap
from .ldoa import diagonal_phase_of_circuit, flavor_template, solve_ansatz
from .model import LatticeParams

ORDERS = ("first", "second", "second_optimized")
LDOA_MODES = ("none", "cp", "rzz")


@dataclass(frozen=True)
class TrotterPlan:
    """Step schedule with derived per-step angles."""

    order: str
    r: int
    t: float
    dt: float
    theta_h: float
    theta_g: float
    ldoa: str = "none"

    def __post_init__(self) -> None:
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order!r}")
        if self.ldoa not in LDOA_MODES:
            raise ValueError(f"ldoa must be one of {LDOA_MODES}, got {self.ldoa!r}")
        if self.r < 1:
            raise ValueError(f"step count must be >= 1, got {self.r}")
        if self.t < 0:
            raise ValueError(f"total time must be >= 0, got {self.t}")
        if abs(self.dt * self.r - self.t) > 1e-15 * max(1.0, abs(self.t)):
            raise ValueError("dt * r != t")


def make_plan(
    params: LatticeParams,
    t: float,
    r: int,
    order: str = "first",
    ldoa: str = "none",
) -> TrotterPlan:
    """Plan with dt = t/r, theta_h = dt/(2a), theta_g = g^2 dt / a."""
    dt = t / r
    return TrotterPlan(
        order=order,
        r=r,
        t=t,
        dt=dt,
        theta_h=dt / (2.0 * params.a),
        theta_g=params.g**2 * dt / params.a,
        ldoa=ldoa,
    )


def build_xyyx(theta: float, q1: int, q2: int, width: int | None = None) -> Circuit:
    """exp(-i (theta/2) (X_{q1} Y_{q2} - Y_{q1} X_{q2})) on adjacent qubits,
    as two CX gates dressed with RX/RZ rotations."""
    if abs(q1 - q2) != 1:
        raise ValueError(f"qubits ({q1},{q2}) must be adjacent")
    c = Circuit(width if width is not None else max(q1, q2) + 1)
    c.append(rx(-np.pi / 2.0, q1))
    c.append(rz(-np.pi / 2.0, q2))
    c.append(rx(-np.pi / 2.0, q2))
    c.append(cx(q1, q2))
    c.append(rx(theta, q1))
    c.append(rz(theta, q2))
    c.append(cx(q1, q2))
    c.append(rx(np.pi / 2.0, q1))
    c.append(rx(np.pi / 2.0, q2))
    c.append(rz(np.pi / 2.0, q2))
    return c


def _hop_swap_layers(N: int) -> list[list[tuple[int, int]]]:
    # Triangular network shuffling [A0..A_{N-1}, B0..B_{N-1}] into [A0,B0,A1,B1,...]:
    # layer s swaps (N-1-s + 2k, N-s + 2k) for k = 0..s.
    return [
        [(N - 1 - s + 2 * k, N - s + 2 * k) for k in range(s + 1)]
        for s in range(N - 1)
    ]


def build_hop_block(
    N: int, theta_h: float, base: int = 0, width: int | None = None
) -> Circuit:
    """Hop block on qubits [base, base + 2N): route flavor pairs adjacent,
    one XY-YX(theta_h) per flavor, mirrored un-routing."""
    c = Circuit(width if width is not None else base + 2 * N)
    layers = _hop_swap_layers(N)
    for layer in layers:
        for i, j in layer:
            c.append(swap(base + i, base + j))
    for b in range(N):
        c.extend(build_xyyx(theta_h, base + 2 * b, base + 2 * b + 1, c.width).gates)
    for layer in reversed(layers):
        for i, j in layer:
            c.append(swap(base + i, base + j))
    return c


def build_int_ladder(
    N: int, theta_g: float, base: int = 0, width: int | None = None
) -> Circuit:
    """The CP + SWAP brick ladder of the interaction block (no single-qubit
    phase layer): every pair of the 2N qubits meets exactly once, with CP angle
    +theta_g for same-staggered-site pairs and -theta_g otherwise."""
    nq = 2 * N
    c = Circuit(width if width is not None else base + nq)
    perm = list(range(nq))  # perm[wire] = home position of the qubit on that wire

    def pairs(parity: int) -> list[tuple[int, int]]:
        return [(i, i + 1) for i in range(parity, nq - 1, 2)]

    def cp_angle(h1: int, h2: int) -> float:
        same_site = (h1 < N) == (h2 < N)
        return theta_g if same_site else -theta_g

    for layer in range(2 * nq - 2):
        if layer < 2 * N:
            # CP layer; preceded (from the third layer on) by a SWAP layer
            # acting on the previous layer's pairs.
            if layer >= 2:
                for i, j in pairs((layer - 1) % 2):
                    c.append(swap(base + i, base + j))
                    perm[i], perm[j] = perm[j], perm[i]
            for i, j in pairs(layer % 2):
                c.append(cphase(cp_angle(perm[i], perm[j]), base + i, base + j))
        else:
            # Un-routing: the forward SWAP layers in reverse.
            for i, j in pairs(layer % 2):
                c.append(swap(base + i, base + j))
                perm[i], perm[j] = perm[j], perm[i]
    assert perm == list(range(nq))
    return c


@lru_cache(maxsize=None)
def interaction_ansatz_unit(N: int, kind: str) -> tuple[float, ...]:
    """Ansatz parameters at theta_g = 1 for the given flavor count and gate
    kind ("CP" or "RZZ").  Parameters are linear in theta_g, so scaled copies
    serve every block of every circuit.  Solved at runtime for any N."""
    ladder = build_int_ladder(N, 1.0)
    target = diagonal_phase_of_circuit(ladder)
    sol = solve_ansatz(target, flavor_template(N, kind))
    return tuple(float(v) for v in sol.x)


def build_int_block(
    N: int,
    theta_g: float,
    base: int = 0,
    ldoa: str = "none",
    width: int | None = None,
) -> Circuit:
    """Interaction block on [base, base + 2N): P(theta_g/2) on every qubit,
    then either the exact CP+SWAP ladder (ldoa="none") or its 2N-1 gate
    nearest-neighbor replacement (ldoa="cp"/"rzz")."""
    if ldoa not in LDOA_MODES:
        raise ValueError(f"ldoa must be one of {LDOA_MODES}, got {ldoa!r}")
    nq = 2 * N
    c = Circuit(width if width is not None else base + nq)
    for q in range(nq):
        c.append(phase(theta_g / 2.0, base + q))
    if ldoa == "none":
        c.extend(build_int_ladder(N, theta_g, base, c.width).gates)
        return c
    kind = ldoa.upper()
    x = interaction_ansatz_unit(N, kind)
    make = cphase if kind == "CP" else rzz
    for gk, q1, q2, p in flavor_template(N, kind).gates:
        c.append(make(theta_g * x[p], base + q1, base + q2))
    return c


def _emit_hop_layer(c: Circuit, params: LatticeParams, theta: float, parity: int) -> None:
    # parity 0: blocks at k mod 2N = 0 (even layer); parity 1: k mod 2N = N (odd).
    nq = params.n_qubits
    span = 2 * params.N
    start = 0 if parity == 0 else params.N
    for base in range(start, nq - span + 1, span):
        c.extend(build_hop_block(params.N, theta, base, nq).gates)


def _emit_int_layer(c: Circuit, params: LatticeParams, theta_g: float, ldoa: str) -> None:
    nq = params.n_qubits
    span = 2 * params.N
    for base in range(0, nq - span + 1, span):
        c.extend(build_int_block(params.N, theta_g, base, ldoa, nq).gates)


def build_step_first(params: LatticeParams, plan: TrotterPlan) -> Circuit:
    """One first-order step: interaction blocks, odd hop layer, even hop layer."""
    c = Circuit(params.n_qubits)
    _emit_int_layer(c, params, plan.theta_g, plan.ldoa)
    _emit_hop_layer(c, params, plan.theta_h, 1)
    _emit_hop_layer(c, params, plan.theta_h, 0)
    return c


def build_step_second(params: LatticeParams, plan: TrotterPlan) -> Circuit:
    """One symmetric step: even and odd hop half-layers around one full-angle
    interaction layer (the two half-angle interaction factors merge)."""
    c = Circuit(params.n_qubits)
    half = plan.theta_h / 2.0
    _emit_hop_layer(c, params, half, 0)
    _emit_hop_layer(c, params, half, 1)
    _emit_int_layer(c, params, plan.theta_g, plan.ldoa)
    _emit_hop_layer(c, params, half, 1)
    _emit_hop_layer(c, params, half, 0)
    return c


def build_evolution(params: LatticeParams, plan: TrotterPlan) -> Circuit:
    """The full r-step circuit for the plan.

    "second_optimized" merges the adjacent even half-layers of consecutive
    symmetric steps into single full-angle even layers, leaving half-angle
    even caps at both ends; it has exactly r - 1 fewer even hop layers than
    "second" and is gate-identical to it at r = 1.
    """
    c = Circuit(params.n_qubits)
    if plan.order == "first":
        step = build_step_first(params, plan)
        for _ in range(plan.r):
            c.extend(step.gates)
    elif plan.order == "second":
        step = build_step_second(params, plan)
        for _ in range(plan.r):
            c.extend(step.gates)
    else:
        half = plan.theta_h / 2.0
        _emit_hop_layer(c, params, half, 0)
        for k in range(plan.r):
            _emit_hop_layer(c, params, half, 1)
            _emit_int_layer(c, params, plan.theta_g, plan.ldoa)
            _emit_hop_layer(c, params, half, 1)
            _emit_hop_layer(c, params, plan.theta_h if k < plan.r - 1 else half, 0)
    return c
